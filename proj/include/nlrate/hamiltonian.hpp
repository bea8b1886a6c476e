#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "nlrate/errors.hpp"
#include "nlrate/kernel.hpp"
#include "nlrate/quadrature.hpp"

namespace nlrate {

enum class HamiltonianMethod { ClosedForm, Quadrature };

/// H(p) = \int (e^{py} - 1) J(y) dy together with its first two derivatives.
struct HamiltonianEval {
  double value = 0.0;
  double deriv = 0.0;
  double second = 0.0;
  HamiltonianMethod method = HamiltonianMethod::ClosedForm;
  double quad_error_estimate = 0.0;
};

/// Radius of the set {p : H(p) < inf}.
struct HamiltonianDomain {
  double p_max = kInf;
  bool bounded() const noexcept { return std::isfinite(p_max); }
  bool contains(double p) const noexcept { return std::abs(p) < p_max; }
};

enum class EvalMode { Auto, ForceQuadrature };

inline HamiltonianDomain domain(const Kernel& k) {
  if (k.compact()) return {};
  switch (k.family()) {
    case KernelFamily::CriticalExp: return {1.0};
    case KernelFamily::Custom: return {k.declared_decay_rate()};
    default: return {};
  }
}

namespace detail {

// sinh(x)/x and its first two derivatives, series near zero.
struct Sinhc {
  double g_minus_one;
  double d1;
  double d2;
};

inline Sinhc sinhc(double x) {
  const double ax = std::abs(x);
  if (ax < 0.5) {
    // sum_k x^{2k} / (2k+1)!
    double g = 0.0, d1 = 0.0, d2 = 0.0;
    double fact = 1.0;  // (2k+1)!
    for (int k = 1; k < 14; ++k) {
      fact *= (2.0 * k) * (2.0 * k + 1.0);
      g += std::pow(x, 2 * k) / fact;
      d1 += 2.0 * k * std::pow(x, 2 * k - 1) / fact;
      d2 += 2.0 * k * (2.0 * k - 1.0) * std::pow(x, 2 * k - 2) / fact;
    }
    return {g, d1, d2};
  }
  const double s = std::sinh(x);
  const double c = std::cosh(x);
  return {s / x - 1.0, (x * c - s) / (x * x), ((x * x + 2.0) * s - 2.0 * x * c) / (x * x * x)};
}

inline HamiltonianEval closed_form(const Kernel& k, double p) {
  HamiltonianEval h;
  h.method = HamiltonianMethod::ClosedForm;
  switch (k.family()) {
    case KernelFamily::UniformCompact: {
      // sinh(eta p)/(eta p) - 1
      const double eta = k.param("eta");
      const auto s = sinhc(eta * p);
      h.value = s.g_minus_one;
      h.deriv = eta * s.d1;
      h.second = eta * eta * s.d2;
      break;
    }
    case KernelFamily::Gaussian: {
      const double e = std::exp(0.5 * p * p);
      h.value = std::expm1(0.5 * p * p);
      h.deriv = p * e;
      h.second = (1.0 + p * p) * e;
      break;
    }
    case KernelFamily::CriticalExp: {
      // 1/(1-p^2) - 1 = p^2/(1-p^2)
      const double d = 1.0 - p * p;
      h.value = p * p / d;
      h.deriv = 2.0 * p / (d * d);
      h.second = (2.0 + 6.0 * p * p) / (d * d * d);
      break;
    }
    default:
      throw std::logic_error("no closed form for this kernel");
  }
  return h;
}

inline bool has_closed_form(const Kernel& k) {
  switch (k.family()) {
    case KernelFamily::UniformCompact:
    case KernelFamily::Gaussian:
    case KernelFamily::CriticalExp:
      return true;
    default:
      return false;
  }
}

// Location of the maximum of a*y + ln J(y) on y >= 0 for infinite-support kernels.
inline double tilted_peak(const Kernel& k, double a) {
  switch (k.family()) {
    case KernelFamily::Gaussian: return a;
    case KernelFamily::StretchedExp: {
      const double alpha = k.param("alpha");
      return std::pow(a / alpha, 1.0 / (alpha - 1.0));
    }
    default: return 0.0;
  }
}

// Truncation radius for e^{a y} y^2 J(y): the log-integrand has dropped 40 units
// below its value at the tilted peak.
inline std::array<double, 2> truncation(const Kernel& k, double a) {
  const double peak = tilted_peak(k, a);
  auto log_env = [&](double y) { return a * y + k.log_eval(y) + 2.0 * std::log1p(y); };
  const double top = std::max(log_env(peak), log_env(peak + 1.0));
  double width = 1.0;
  while (log_env(peak + width) > top - 40.0) {
    width *= 2.0;
    if (width > 1e6) throw QuadratureError("tail truncation radius diverged", kInf);
  }
  return {peak, peak + width};
}

struct Integrands {
  quad::Result value, deriv, second;
};

// Integrals of the even-symmetrized integrands over y > 0 for a = |p|:
//   value:  (e^{ay} + e^{-ay} - 2) J = e^{ay} (1 - e^{-ay})^2 J
//   deriv:  y (e^{ay} - e^{-ay}) J
//   second: y^2 (e^{ay} + e^{-ay}) J
inline Integrands regular_quadrature(const Kernel& k, double a) {
  auto tilt = [&](double y) { return std::exp(a * y + k.log_eval(y)); };
  auto f_value = [&](double y) {
    const double x = a * y;
    if (x < 1.0) {
      const double s = std::sinh(0.5 * x);
      return 4.0 * s * s * k.eval(y);
    }
    const double m = -std::expm1(-x);
    return tilt(y) * m * m;
  };
  auto f_deriv = [&](double y) { return y * tilt(y) * (-std::expm1(-2.0 * a * y)); };
  auto f_second = [&](double y) { return y * y * tilt(y) * (1.0 + std::exp(-2.0 * a * y)); };

  std::vector<double> breaks;
  if (k.compact()) {
    const double s = k.support_radius();
    breaks = {0.0, 0.25 * s, 0.5 * s, 0.75 * s, s};
  } else {
    const auto [peak, end] = truncation(k, a);
    breaks.push_back(0.0);
    if (peak > 0.0) breaks.push_back(peak);
    const double w = end - peak;
    for (double f : {0.125, 0.25, 0.5, 1.0}) breaks.push_back(peak + f * w);
  }
  const std::span<const double> b(breaks);
  return {quad::integrate_pieces(f_value, b), quad::integrate_pieces(f_deriv, b),
          quad::integrate_pieces(f_second, b)};
}

}  // namespace detail

/// e^x - 1 - x, by Taylor series when |x| < 1e-4.
inline double exp_corrected(double x) {
  if (std::abs(x) < 1e-4) return x * x * (0.5 + x * (1.0 / 6.0 + x / 24.0));
  return std::expm1(x) - x;
}

/// Hamiltonian with the small-jump corrector for Levy densities:
/// H(p) = \int (e^{py} - 1 - p y 1_{|y|<1}) J(y) dy.
///
/// The origin is handled analytically on [0, delta] using the leading power
/// law J(y) ~ C y^{-1-s}; the rest is integrated in log(y).
inline HamiltonianEval h_value_levy(const Kernel& k, double p) {
  const double s = k.singularity_order();
  if (!(s > 0.0)) throw ValidationError("h_value_levy requires a kernel singular at the origin");
  const auto dom = domain(k);
  if (!dom.contains(p)) {
    throw DomainError("|p| outside the Hamiltonian domain", dom.p_max);
  }
  HamiltonianEval h;
  h.method = HamiltonianMethod::Quadrature;
  const double a = std::abs(p);
  const double support = k.support_radius();
  if (!std::isfinite(support)) {
    throw UnsupportedKernel("singular kernels must have compact support");
  }
  const double delta = std::min(1e-6, 1e-3 * support);
  const double c = k.eval(delta) * std::pow(delta, 1.0 + s);

  // Series on [0, delta] of the symmetrized integrands against C y^{-1-s}.
  double sv = 0.0, sd = 0.0, s2 = 0.0;
  double term = 1.0;  // a^{2m} / (2m)!
  for (int m = 0; m < 12; ++m) {
    const double e = 2.0 * m;
    if (m > 0) {
      term *= a * a / ((e - 1.0) * e);
      sv += 2.0 * term * std::pow(delta, e - s) / (e - s);
    }
    const double tail = std::pow(delta, e + 2.0 - s) / (e + 2.0 - s);
    s2 += 2.0 * term * tail;
    sd += 2.0 * term * a / (e + 1.0) * tail;
  }

  // Literal corrected integrand at +y and -y; the corrector only applies for |y| < 1.
  auto value_integrand = [&](double y) {
    const double j = k.eval(y);
    if (y < 1.0) return (exp_corrected(a * y) + exp_corrected(-a * y)) * j;
    return (std::expm1(a * y) + std::expm1(-a * y)) * j;
  };
  auto deriv_integrand = [&](double y) {
    const double j = k.eval(y);
    if (y < 1.0) return y * (std::expm1(a * y) - std::expm1(-a * y)) * j;
    return y * (std::exp(a * y) - std::exp(-a * y)) * j;
  };
  auto second_integrand = [&](double y) {
    return y * y * (std::exp(a * y) + std::exp(-a * y)) * k.eval(y);
  };
  auto in_log = [](auto f) { return [f](double u) { const double y = std::exp(u); return f(y) * y; }; };

  std::vector<double> breaks{std::log(delta)};
  const double top = std::log(std::min(1.0, support));
  for (int i = 1; i <= 8; ++i) breaks.push_back(breaks.front() + (top - breaks.front()) * i / 8.0);
  if (support > 1.0) breaks.push_back(std::log(support));
  const std::span<const double> b(breaks);

  const auto rv = quad::integrate_pieces(in_log(value_integrand), b);
  const auto rd = quad::integrate_pieces(in_log(deriv_integrand), b);
  const auto r2 = quad::integrate_pieces(in_log(second_integrand), b);

  h.value = c * sv + rv.value;
  h.deriv = std::copysign(c * sd + rd.value, p);
  if (p == 0.0) h.deriv = 0.0;
  h.second = c * s2 + r2.value;
  h.quad_error_estimate = rv.error + rd.error + r2.error;
  return h;
}

/// H(p) and derivatives. Closed forms for the uniform, Gaussian and critical
/// kernels unless quadrature is forced; singular kernels go through the
/// corrected Hamiltonian.
inline HamiltonianEval h_value(const Kernel& k, double p, EvalMode mode = EvalMode::Auto) {
  if (!std::isfinite(p)) throw ValidationError("p must be finite");
  const auto dom = domain(k);
  if (!dom.contains(p)) {
    throw DomainError("|p| = " + std::to_string(std::abs(p)) +
                          " outside the Hamiltonian domain |p| < " + std::to_string(dom.p_max),
                      dom.p_max);
  }
  if (k.singular()) return h_value_levy(k, p);
  if (mode == EvalMode::Auto && detail::has_closed_form(k)) return detail::closed_form(k, p);

  HamiltonianEval h;
  h.method = HamiltonianMethod::Quadrature;
  const double a = std::abs(p);
  const auto r = detail::regular_quadrature(k, a);
  h.value = r.value.value;
  h.deriv = p < 0.0 ? -r.deriv.value : r.deriv.value;
  h.second = r.second.value;
  h.quad_error_estimate = r.value.error + r.deriv.error + r.second.error;
  return h;
}

}  // namespace nlrate
