#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nlrate/hamiltonian.hpp"
#include "nlrate/kernel.hpp"
#include "nlrate/legendre.hpp"
#include "nlrate/ratefn.hpp"
#include "nlrate/solver.hpp"

namespace nlrate {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace props {

inline constexpr std::uint64_t kSeed = 20240611;

inline std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

inline std::vector<Kernel> regular_kernels() {
  return {Kernel::uniform(1.0), Kernel::polynomial(), Kernel::gaussian(),
          Kernel::stretched_exp(2.0), Kernel::critical_exp()};
}

// Probe range for p: well inside the domain and small enough for quadrature.
inline double p_range(const Kernel& k) {
  const auto d = domain(k);
  return d.bounded() ? 0.9 * d.p_max : 5.0;
}

inline std::string label(const Kernel& k) { return std::string(family_name(k.family())); }

// Maximum of a unimodal function on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b, int iters = 120) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d);
    }
  }
  return std::max(fc, fd);
}

}  // namespace props

inline std::vector<CheckResult> kernel_suite() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(props::kSeed);
  for (const auto& k : props::regular_kernels()) {
    const double reach = k.compact() ? k.support_radius() : 8.0;
    std::uniform_real_distribution<double> dist(-reach, reach);
    bool sym = true;
    for (int i = 0; i < 1000; ++i) {
      const double y = dist(rng);
      if (k.eval(y) != k.eval(-y)) sym = false;
    }
    out.push_back({"kernel symmetry " + props::label(k), sym, "1000 random points"});

    // Composite Simpson over the support, split at 0.
    const double top = k.compact() ? k.support_radius() : 60.0;
    const int n = 200000;
    const double h = top / n;
    double s = k.eval(0.0) + (k.compact() ? k.edge_value() : k.eval(top));
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * k.eval(i * h);
    const double m = 2.0 * s * h / 3.0;
    const double rel = std::abs(m - k.mass()) / k.mass();
    out.push_back({"kernel mass " + props::label(k), rel < 1e-8, props::fmt("relative error %.3g", rel)});
  }
  for (double alpha : {0.5, 1.5}) {
    const auto k = Kernel::singular_compact(alpha);
    // In log y the second moment integrand y^3 J(y) is smooth; the [0, 1e-8] piece is analytic.
    const double lo = std::log(1e-8);
    const int n = 20000;
    const double h = -lo / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double y = std::exp(lo + i * h);
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * y * y * y * k.eval(y);
    }
    const double moment = 2.0 * (s * h / 3.0 + std::pow(1e-8, 2.0 - alpha) / (2.0 - alpha));
    const double want = 2.0 / (2.0 - alpha);
    const double rel = std::abs(moment - want) / want;
    out.push_back({"levy second moment alpha=" + detail::format_number(alpha), rel < 1e-8,
                   props::fmt("relative error %.3g", rel)});
  }
  return out;
}

inline std::vector<CheckResult> hamiltonian_suite() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(props::kSeed + 1);
  auto kernels = props::regular_kernels();
  kernels.push_back(Kernel::singular_compact(0.5));
  for (const auto& k : kernels) {
    const double P = props::p_range(k);
    std::uniform_real_distribution<double> dist(-P, P);
    const std::string name = props::label(k);

    bool even = true, monotone = true, convex = true, deriv_ok = true;
    double worst_convex = 0.0, worst_deriv = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double p = dist(rng);
      const auto hp = h_value(k, p);
      if (h_value(k, -p).value != hp.value) even = false;
      if (p != 0.0 && !(p * hp.deriv > 0.0)) monotone = false;

      double t[3] = {dist(rng), dist(rng), dist(rng)};
      std::sort(t, t + 3);
      if (t[0] < t[1] && t[1] < t[2]) {
        const double lam = (t[2] - t[1]) / (t[2] - t[0]);
        const double gap = h_value(k, t[1]).value -
                           (lam * h_value(k, t[0]).value + (1.0 - lam) * h_value(k, t[2]).value);
        worst_convex = std::max(worst_convex, gap);
        if (gap > 1e-10) convex = false;
      }

      const double e = 1e-5;
      const double fd = (h_value(k, p + e).value - h_value(k, p - e).value) / (2.0 * e);
      const double err = std::abs(fd - hp.deriv);
      worst_deriv = std::max(worst_deriv, err / std::max(1.0, std::abs(hp.deriv)));
      if (err > std::max(1e-6, 1e-4 * std::abs(hp.deriv))) deriv_ok = false;
    }
    out.push_back({"H evenness " + name, even, "50 random p"});
    out.push_back({"H monotone gradient " + name, monotone, "p H'(p) > 0"});
    out.push_back({"H convexity " + name, convex, props::fmt("worst gap %.3g", worst_convex)});
    out.push_back({"H derivative consistency " + name, deriv_ok,
                   props::fmt("worst scaled error %.3g", worst_deriv)});
  }

  for (const auto& k : {Kernel::uniform(1.0), Kernel::gaussian(), Kernel::critical_exp()}) {
    double worst = 0.0;
    for (double p : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      if (!domain(k).contains(p)) continue;
      const auto a = h_value(k, p);
      const auto b = h_value(k, p, EvalMode::ForceQuadrature);
      worst = std::max(worst, std::abs(a.value - b.value) / std::abs(a.value));
    }
    out.push_back({"H quadrature vs closed form " + props::label(k), worst < 1e-8,
                   props::fmt("worst relative error %.3g", worst)});
  }
  return out;
}

inline std::vector<CheckResult> legendre_suite() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(props::kSeed + 2);
  for (const auto& k : props::regular_kernels()) {
    const std::string name = props::label(k);
    const double P = props::p_range(k);
    std::uniform_real_distribution<double> pd(-P, P), qd(-50.0, 50.0);

    double worst_fy = -kInf;
    for (int i = 0; i < 200; ++i) {
      const double p = pd(rng), q = qd(rng);
      worst_fy = std::max(worst_fy, p * q - h_value(k, p).value - conjugate(k, q).value);
    }
    out.push_back({"Fenchel-Young " + name, worst_fy <= 1e-9,
                   props::fmt("max p q - H - L = %.3g", worst_fy)});

    // H(p) = sup_q { p q - L(q) }: coarse scan, then golden refinement around the best cell.
    std::uniform_real_distribution<double> bd(-0.8 * P, 0.8 * P);
    double worst_bi = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double p = bd(rng);
      const double qmax = 1.5 * std::abs(h_value(k, p).deriv) + 1.0;
      auto f = [&](double q) { return p * q - conjugate(k, q).value; };
      const int m = 64;
      int best = 0;
      double best_v = -kInf;
      for (int j = 0; j <= m; ++j) {
        const double v = f(-qmax + 2.0 * qmax * j / m);
        if (v > best_v) { best_v = v; best = j; }
      }
      const double step = 2.0 * qmax / m;
      const double c = -qmax + step * best;
      const double sup = props::golden_max(f, c - step, c + step);
      const double hv = h_value(k, p).value;
      worst_bi = std::max(worst_bi, std::abs(sup - hv) / std::max(1.0, std::abs(hv)));
    }
    out.push_back({"biconjugacy " + name, worst_bi < 1e-6, props::fmt("worst relative error %.3g", worst_bi)});

    bool even = true;
    for (int i = 0; i < 50; ++i) {
      const double q = qd(rng);
      const auto a = conjugate(k, q), b = conjugate(k, -q);
      if (a.value != b.value || a.p0 != -b.p0) even = false;
    }
    out.push_back({"L evenness " + name, even, "50 random q"});

    bool slope = true;
    for (double c : {0.5, 2.0, 10.0}) {
      double prev = -kInf;
      for (double r = 0.05; r < 40.0; r *= 1.3) {
        const double s = conjugate(k, c * r).value / r;
        if (s < prev - 1e-12 * std::abs(prev)) slope = false;
        prev = s;
      }
    }
    out.push_back({"L*(c r)/r nondecreasing " + name, slope, "c in {0.5, 2, 10}"});

    double worst_mid = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double a = qd(rng), b = qd(rng);
      const double gap = conjugate(k, 0.5 * (a + b)).value -
                         0.5 * (conjugate(k, a).value + conjugate(k, b).value);
      worst_mid = std::max(worst_mid, gap);
    }
    out.push_back({"L convexity " + name, worst_mid <= 1e-10, props::fmt("worst midpoint gap %.3g", worst_mid)});
  }
  return out;
}

inline std::vector<CheckResult> ratefn_suite() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(props::kSeed + 3);
  std::uniform_real_distribution<double> xd(-0.99, 0.99), td(0.01, 2.0);
  for (const auto& k : props::regular_kernels()) {
    const std::string name = props::label(k);
    bool boundary = true;
    for (double t : {1e-3, 0.1, 1.0, 10.0}) {
      if (rate(k, 1.0, t) != 0.0 || rate(k, -1.0, t) != 0.0) boundary = false;
    }
    out.push_back({"rate boundary zero " + name, boundary, "x = +-1"});

    bool in_t = true, in_x = true, cap = true;
    for (int i = 0; i < 40; ++i) {
      const double x = xd(rng);
      double t1 = td(rng), t2 = td(rng);
      if (t1 > t2) std::swap(t1, t2);
      const double r1 = rate(k, x, t1), r2 = rate(k, x, t2);
      if (r1 < r2 * (1.0 - 1e-12)) in_t = false;

      double a1 = std::abs(x), a2 = std::abs(xd(rng));
      if (a1 > a2) std::swap(a1, a2);
      if (rate(k, a1, t1) < rate(k, a2, t1) * (1.0 - 1e-12)) in_x = false;

      for (double A : {0.5, 5.0, 50.0}) {
        const double c = rate_capped(k, x, t1, A);
        if (c > A || c > r1 || (r1 <= A && c != r1)) cap = false;
      }
    }
    out.push_back({"rate monotone in t " + name, in_t, "40 random pairs"});
    out.push_back({"rate monotone in |x| " + name, in_x, "40 random pairs"});
    out.push_back({"rate cap consistency " + name, cap, "A in {0.5, 5, 50}"});
  }
  return out;
}

inline std::vector<CheckResult> solver_suite() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(props::kSeed + 4);
  const auto uni = Kernel::uniform(1.0);
  const auto gauss = Kernel::gaussian();

  {
    const Grid g = aligned_grid(uni, 6.0, 1.0 / 16.0);
    const Field u0 = Field::sample(g, [](double x) { return std::exp(-x * x); });
    SolveConfig cfg;
    cfg.T = 1.0;
    bool ok = true;
    integrate(uni, u0, cfg, [&](const Field& f) {
      for (double v : f.values) if (v < 0.0 || v > 1.0) ok = false;
    });
    out.push_back({"maximum principle", ok, "0 <= u <= max u0 at every step"});

    Field v0 = u0;
    for (double& v : v0.values) v += 0.3;
    const Field u = integrate(uni, u0, cfg), v = integrate(uni, v0, cfg);
    bool cmp = true;
    for (std::size_t i = 0; i < g.n; ++i) if (u.values[i] > v.values[i]) cmp = false;
    out.push_back({"comparison principle", cmp, "v0 = u0 + 0.3"});
  }

  {
    const double h = 1.0 / 16.0;
    const Grid small = aligned_grid(uni, 5.0, h), big = aligned_grid(uni, 8.0, h);
    SolveConfig cfg;
    cfg.T = 1.0;
    const Field us = integrate(uni, Field::constant(small, 1.0), cfg);
    const Field ub = integrate(uni, Field::constant(big, 1.0), cfg);
    const std::size_t off = (big.n - small.n) / 2;
    bool mono = true;
    for (std::size_t i = 0; i < small.n; ++i) if (ub.values[i + off] < us.values[i]) mono = false;
    out.push_back({"monotone in R", mono, "u0 = 1, R = 5 vs 8"});

    Field prev = Field::constant(small, 1.0);
    bool decay = true;
    integrate(uni, prev, cfg, [&](const Field& f) {
      for (std::size_t i = 0; i < small.n; ++i) if (f.values[i] > prev.values[i]) decay = false;
      prev = f;
    });
    out.push_back({"decay in t", decay, "u0 = 1, every step"});
  }

  {
    double worst = 0.0;
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (const auto& k : {uni, gauss}) {
      const Grid g = aligned_grid(k, 7.0, 1.0 / 16.0);
      ConvolutionOperator direct(k, g, ConvolutionMethod::Direct);
      ConvolutionOperator fast(k, g, ConvolutionMethod::FastTransform);
      for (int r = 0; r < 25; ++r) {
        std::vector<double> f(g.n);
        for (double& v : f) v = d(rng);
        const auto a = direct.apply(f), b = fast.apply(f);
        for (std::size_t i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
      }
    }
    out.push_back({"direct vs fast transform", worst <= 1e-10, props::fmt("max difference %.3g", worst)});
  }

  {
    // (J * cos)(0) = sin(1) for the uniform kernel on [-1, 1].
    auto err = [&](double h) {
      const Grid g = aligned_grid(uni, 4.0, h);
      const Field c = convolve(uni, Field::sample(g, [](double x) { return std::cos(x); }));
      return std::abs(c.values[g.center()] - std::sin(1.0));
    };
    const double ratio = err(1.0 / 8.0) / err(1.0 / 16.0);
    out.push_back({"trapezoid order", ratio >= 3.5 && ratio <= 4.5, props::fmt("error ratio %.4f", ratio)});
  }
  return out;
}

inline const std::map<std::string, std::function<std::vector<CheckResult>()>>& property_suites() {
  static const std::map<std::string, std::function<std::vector<CheckResult>()>> suites{
      {"kernel", kernel_suite},     {"hamiltonian", hamiltonian_suite},
      {"legendre", legendre_suite}, {"ratefn", ratefn_suite},
      {"solver", solver_suite},
  };
  return suites;
}

/// Runs the named suites, or all of them when the list is empty.
inline std::vector<CheckResult> run_property_suites(const std::vector<std::string>& names = {}) {
  std::vector<CheckResult> out;
  const auto& all = property_suites();
  if (names.empty()) {
    for (const auto& [name, run] : all) {
      auto r = run();
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }
  for (const auto& name : names) {
    const auto it = all.find(name);
    if (it == all.end()) throw ValidationError("suite: unknown suite '" + name + "'");
    auto r = it->second();
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace nlrate
