// Acceptance checks. Usage: acceptance [criterion...]; prints one PASS/FAIL line per
// criterion and exits non-zero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nlrate/nlrate.hpp"

using namespace nlrate;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
    passed = passed && ok;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome closed_forms() {
  Outcome o;
  for (const auto& k : {Kernel::uniform(1.0), Kernel::gaussian(), Kernel::critical_exp()}) {
    double worst = 0.0;
    for (double p : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      if (!domain(k).contains(p)) continue;
      const double exact = k.family() == KernelFamily::UniformCompact ? std::sinh(p) / p - 1.0
                           : k.family() == KernelFamily::Gaussian     ? std::expm1(0.5 * p * p)
                                                                      : p * p / (1.0 - p * p);
      const double q = h_value(k, p, EvalMode::ForceQuadrature).value;
      worst = std::max(worst, std::abs(q - exact) / exact);
    }
    o.check(worst <= 1e-8, std::string(family_name(k.family())) + fmt(" rel err %.2e", worst));
  }
  return o;
}

Outcome legendre_point() {
  Outcome o;
  const auto lp = conjugate(Kernel::gaussian(), std::exp(0.5));
  o.check(std::abs(lp.p0 - 1.0) <= 1e-8 && std::abs(lp.value - 1.0) <= 1e-8,
          fmt("gaussian p0-1=%.2e L-1=%.2e", lp.p0 - 1.0, lp.value - 1.0));

  std::mt19937_64 rng(11);
  for (const auto& k : {Kernel::uniform(1.0), Kernel::gaussian(), Kernel::critical_exp(),
                        Kernel::stretched_exp(2.0), Kernel::polynomial()}) {
    const double P = domain(k).bounded() ? 0.95 * domain(k).p_max : 6.0;
    std::uniform_real_distribution<double> pd(-P, P), qd(-100.0, 100.0);
    double worst = -kInf;
    for (int i = 0; i < 200; ++i) {
      const double p = pd(rng), q = qd(rng);
      worst = std::max(worst, p * q - h_value(k, p).value - conjugate(k, q).value);
    }
    o.check(worst <= 1e-9, std::string(family_name(k.family())) + fmt(" FY max %.2e", worst));
  }
  return o;
}

Outcome asymptotic_laws() {
  Outcome o;
  {
    const std::vector<double> qs{1e6, 1e7, 1e8, 1e9};
    const auto law = asymptotic_ratio(Kernel::uniform(1.0), qs);
    bool closer = true;
    for (std::size_t i = 0; i + 1 < law.samples.size(); ++i) {
      closer = closer && std::abs(law.samples[i + 1].ratio - 1.0) < std::abs(law.samples[i].ratio - 1.0);
    }
    const double r8 = law.samples[2].ratio;
    o.check(closer && r8 >= 0.75 && r8 <= 1.35,
            fmt("uniform r(1e6..1e9)=%.4f..%.4f r(1e8)=%.4f", law.samples[0].ratio,
                law.samples[3].ratio, r8));
  }
  {
    const std::vector<double> qs{1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10};
    const auto law = asymptotic_ratio(Kernel::stretched_exp(2.0), qs);
    bool within = true;
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i + 1 < law.samples.size(); ++i) {
      const double step = law.samples[i + 1].ratio / law.samples[i].ratio;
      within = within && std::abs(step - 1.0) <= 0.05;
      if (i == 0) first = step;
      last = step;
    }
    o.check(within && std::abs(last - 1.0) < std::abs(first - 1.0) && law.samples.back().ratio > 0.0,
            fmt("stretched decade ratios %.4f..%.4f, value %.4f", first, last,
                law.samples.back().ratio));
  }
  {
    const double r = conjugate(Kernel::critical_exp(), 1e6).value / 1e6;
    o.check(r >= 0.99 && r <= 1.01, fmt("critical L(1e6)/1e6=%.5f", r));
  }
  return o;
}

Outcome singular_sandwich() {
  Outcome o;
  const std::vector<double> qs{1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
  for (double alpha : {0.5, 1.5}) {
    const auto s = sandwich_check(alpha, qs);
    o.check(s.c_lo > 0.0 && s.c_hi / s.c_lo < 20.0,
            fmt("alpha=%.1f [%.4f, %.4f]", alpha, s.c_lo, s.c_hi));
  }
  return o;
}

Outcome solver_reproduction() {
  Outcome o;
  const auto uni = Kernel::uniform(1.0);
  const double h = 1.0 / 64.0;  // <= eta/16 and shared by every R
  const std::vector<double> Rs{10.0, 15.0, 20.0};
  SolveConfig cfg;
  cfg.T = 0.1;

  bool bounded = true;
  std::vector<Field> us, vs;
  for (double R : Rs) {
    const Grid g = aligned_grid(uni, R, h);
    us.push_back(integrate(uni, Field::constant(g, 1.0), cfg, [&](const Field& f) {
      for (double v : f.values) bounded = bounded && v >= 0.0 && v <= 1.0;
    }));
    vs.push_back(integrate_deviation(uni, g, cfg));
  }
  o.check(bounded, "(a) 0<=u<=1 at every step");

  bool increasing = true;
  for (std::size_t r = 1; r < Rs.size(); ++r) {
    const std::size_t off = (us[r].grid.n - us[r - 1].grid.n) / 2;
    for (std::size_t i = 0; i < us[r - 1].grid.n; ++i) {
      increasing = increasing && us[r].values[i + off] >= us[r - 1].values[i] &&
                   vs[r].values[i + off] <= vs[r - 1].values[i];
    }
  }
  o.check(increasing, "(b) u_R nondecreasing in R on the common grid");

  std::vector<double> E;
  for (const auto& v : vs) {
    double sup = 0.0;
    for (std::size_t i = 0; i < v.grid.n; ++i) {
      if (std::abs(v.grid.x(i)) <= 0.8 * v.grid.R * (1.0 + 1e-12)) sup = std::max(sup, v.values[i]);
    }
    E.push_back(-std::log(sup));
  }
  const bool e_up = E[0] < E[1] && E[1] < E[2];
  const bool ratio_up = E[0] / Rs[0] < E[1] / Rs[1] && E[1] / Rs[1] < E[2] / Rs[2];
  o.check(e_up, fmt("(c) E=%.3f,%.3f,%.3f strictly increasing", E[0], E[1], E[2]));
  o.check(ratio_up, fmt("(c) E/R=%.4f,%.4f,%.4f increasing", E[0] / Rs[0], E[1] / Rs[1], E[2] / Rs[2]));

  std::vector<double> sup;
  for (const auto& k : {uni, Kernel::gaussian(), Kernel::critical_exp()}) {
    StudyConfig sc;
    sc.kernel_spec = k.describe();
    sc.R_list = {15.0};
    sup.push_back(run_study(sc).rows[0].sup_err);
  }
  o.check(sup[0] < sup[1] && sup[1] < sup[2],
          fmt("(d) sup_err uniform %.2e < gaussian %.2e < critical %.2e", sup[0], sup[1], sup[2]));
  return o;
}

Outcome rate_profile() {
  Outcome o;
  const auto uni = Kernel::uniform(1.0);
  const double A = 10.0, t = 0.1;
  double prev_gap = kInf;
  for (double R : {20.0, 40.0}) {
    const auto profile = extract_rate_profile(uni, R, t, A, 1.0);
    double at0 = NAN;
    for (const auto& p : profile) if (p.x == 0.0) at0 = p.value;
    const double ref = rate(uni, 0.0, t / R);
    const double gap = std::abs(at0 - ref) / ref;
    o.check(gap <= 0.35, fmt("R=%.0f I_R^A(0)=%.4f I_inf=%.4f", R, at0, ref));
    if (std::isfinite(prev_gap)) o.check(gap < prev_gap, fmt("gap %.4f -> %.4f", prev_gap, gap));
    prev_gap = gap;
  }
  return o;
}

Outcome micro_oracles() {
  Outcome o;
  {
    const auto k = Kernel::gaussian();
    const ConvolutionOperator op(k, Grid::make(1.0, 3));
    const std::vector<double> u{0.2, 1.0, 0.6};
    const double dt = 0.01;
    const auto c = op.apply(u);
    const double s = 1.0 / std::sqrt(2.0 * M_PI);
    const double j0 = s, j1 = s * std::exp(-0.5), j2 = s * std::exp(-2.0);
    const double hand[3] = {0.2 + dt * (j0 * 0.1 + j1 + j2 * 0.3 - 0.2),
                            1.0 + dt * (j1 * 0.1 + j0 + j1 * 0.3 - 1.0),
                            0.6 + dt * (j2 * 0.1 + j1 + j0 * 0.3 - 0.6)};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(u[i] + dt * (c[i] - u[i]) - hand[i]));
    o.check(worst <= 1e-14, fmt("euler step err %.1e", worst));
  }
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double worst = 0.0;
    const auto k = Kernel::uniform(1.0);
    const Grid g = aligned_grid(k, 10.0, 1.0 / 32.0);
    const ConvolutionOperator a(k, g, ConvolutionMethod::Direct);
    const ConvolutionOperator b(k, g, ConvolutionMethod::FastTransform);
    for (int r = 0; r < 50; ++r) {
      std::vector<double> f(g.n);
      for (double& v : f) v = d(rng);
      const auto x = a.apply(f), y = b.apply(f);
      for (std::size_t i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
    }
    o.check(worst <= 1e-10, fmt("direct vs fft %.1e", worst));
  }
  {
    const auto k = Kernel::uniform(1.0);
    auto err = [&](double h) {
      const Grid g = aligned_grid(k, 4.0, h);
      const auto c = convolve(k, Field::sample(g, [](double x) { return std::cos(x); }));
      return std::abs(c.values[g.center()] - std::sin(1.0));
    };
    const double ratio = err(1.0 / 8.0) / err(1.0 / 16.0);
    o.check(ratio >= 3.5 && ratio <= 4.5, fmt("trapezoid error ratio %.4f", ratio));
  }
  return o;
}

Outcome property_suites_all() {
  Outcome o;
  int failed = 0, total = 0;
  std::string names;
  for (const auto& r : run_property_suites()) {
    ++total;
    if (!r.passed) {
      ++failed;
      names += " " + r.name;
    }
  }
  o.check(failed == 0, fmt("%.0f/%.0f checks pass", total - failed, total) + names);
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "Hamiltonian closed-form agreement", 1.0, closed_forms},
      {2, "Legendre exactness point and Fenchel-Young", 60.0, legendre_point},
      {3, "asymptotic laws", 10.0, asymptotic_laws},
      {4, "singular sandwich", 30.0, singular_sandwich},
      {5, "solver reproduction", 120.0, solver_reproduction},
      {6, "rate-profile consistency", 180.0, rate_profile},
      {7, "micro-scale oracles", 60.0, micro_oracles},
      {8, "property suites", 300.0, property_suites_all},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool ok = o.passed && in_time;
    std::printf("%s criterion %d (%s): %s [%.2fs%s]\n", ok ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, in_time ? "" : fmt(" > %.0fs budget", c.budget_s).c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
