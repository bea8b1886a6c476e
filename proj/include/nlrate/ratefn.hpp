#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlrate/errors.hpp"
#include "nlrate/kernel.hpp"
#include "nlrate/legendre.hpp"

namespace nlrate {

/// I_inf(x, t) = t L*((1 - |x|) / t) on the rescaled unit interval.
///
/// The initial condition I_inf(x, 0) = +inf is not represented: t must be positive.
inline double rate(const Kernel& k, double x, double t) {
  if (!(std::abs(x) <= 1.0)) throw ValidationError("rate: |x| must be <= 1");
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("rate: t must be positive");
  const double dist = 1.0 - std::abs(x);
  if (dist == 0.0) return 0.0;
  return t * conjugate(k, dist / t).value;
}

/// I^A = min(A, I_inf).
inline double rate_capped(const Kernel& k, double x, double t, double cap) {
  if (!(cap > 0.0)) throw ValidationError("rate_capped: A must be positive");
  if (!(std::abs(x) <= 1.0)) throw ValidationError("rate: |x| must be <= 1");
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("rate: t must be positive");
  if (std::abs(x) == 1.0) return 0.0;
  return std::min(cap, rate(k, x, t));
}

/// Predicted decay of sup_{|x| <= theta R} (u - u_R)(t) ~ exp(-exponent).
struct BoundPrediction {
  double R = 0.0;
  double theta = 0.0;
  double t_phys = 0.0;
  double exponent = 0.0;  // R I_inf(theta, t_phys / R)
  double bound = 1.0;     // exp(-exponent)
  // (1-theta) R / eta * ln((1-theta) R / t) for compactly supported kernels, NaN otherwise.
  double asymptotic_exponent = std::numeric_limits<double>::quiet_NaN();
};

inline BoundPrediction bound(const Kernel& k, double R, double theta, double t_phys) {
  if (!(R > 0.0)) throw ValidationError("bound: R must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("bound: theta must lie in (0, 1)");
  if (!(t_phys > 0.0)) throw ValidationError("bound: t must be positive");
  BoundPrediction b;
  b.R = R;
  b.theta = theta;
  b.t_phys = t_phys;
  b.exponent = R * rate(k, theta, t_phys / R);
  b.bound = std::exp(-b.exponent);
  if (k.compact()) {
    const double d = (1.0 - theta) * R;
    b.asymptotic_exponent = d / k.support_radius() * std::log(d / t_phys);
  }
  return b;
}

}  // namespace nlrate
