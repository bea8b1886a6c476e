#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nlrate/errors.hpp"
#include "nlrate/hamiltonian.hpp"
#include "nlrate/kernel.hpp"

namespace nlrate {

/// One evaluation of L(q) = sup_p { p q - H(p) }.
struct LegendrePoint {
  double q = 0.0;
  double p0 = 0.0;
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |H'(p0) - q|
  // True when H' stays below q up to the edge of a bounded domain and the
  // value is the limit p -> p_max.
  bool saturated = false;
};

/// Solves H'(p0) = q with Newton steps kept inside a bisection bracket.
///
/// H' is strictly increasing, so the root is unique. The problem is solved for
/// |q| and mirrored, which makes L exactly even and p0 exactly odd.
inline LegendrePoint conjugate(const Kernel& k, double q) {
  if (!std::isfinite(q)) throw ValidationError("q must be finite");
  LegendrePoint out;
  out.q = q;
  if (q == 0.0) return out;

  const double target = std::abs(q);
  const auto dom = domain(k);
  const double cap = dom.bounded() ? dom.p_max * (1.0 - 1e-12) : kInf;
  auto dh = [&](double p) { return h_value(k, p).deriv; };

  // Grow the bracket geometrically from p = 0.
  double lo = 0.0;
  double hi = std::min(1.0, dom.bounded() ? 0.5 * dom.p_max : 1.0);
  int doublings = 0;
  while (dh(hi) < target) {
    lo = hi;
    if (hi >= cap) {
      // Supremum over the open domain is approached at its edge.
      const auto h = h_value(k, cap);
      out.p0 = std::copysign(cap, q);
      out.value = cap * target - h.value;
      out.residual = target - h.deriv;
      out.saturated = true;
      out.iterations = doublings;
      return out;
    }
    hi = std::min(2.0 * hi, cap);
    if (++doublings > 1000) throw ConjugateError("bracket for H'(p) = q did not close");
  }

  const double tol = 1e-10 * std::max(1.0, target);
  // H' is convex for the built-in families, so Newton from the right end of
  // the bracket approaches the root monotonically.
  double p = hi;
  int it = 0;
  HamiltonianEval h = h_value(k, p);
  for (; it < 300; ++it) {
    const double f = h.deriv - target;
    if (std::abs(f) <= tol) break;
    if (f < 0.0) lo = p; else hi = p;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
    double next = p - f / h.second;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    p = next;
    h = h_value(k, p);
  }
  if (it == 300) throw ConjugateError("Newton iteration for H'(p) = q did not converge");

  out.p0 = std::copysign(p, q);
  out.value = p * target - h.value;
  out.iterations = it;
  out.residual = std::abs(h.deriv - target);
  return out;
}

enum class LawForm {
  QLogQOverEta,   // q ln q / eta, compactly supported kernels
  QLogPower,      // q (ln q)^{(alpha-1)/alpha}, exp(-|y|^alpha)
  TwoQSqrtLog,    // 2 q (ln q)^{1/2}, Gaussian
  Linear,         // q, critical exponential decay
};

struct LawSample {
  double q = 0.0;
  double value = 0.0;  // L(q)
  double law = 0.0;    // f(q)
  double ratio = 0.0;  // L(q) / f(q)
};

/// Large-q law predicted for a kernel family, sampled at a list of q.
struct AsymptoticLaw {
  KernelFamily family = KernelFamily::UniformCompact;
  LawForm form = LawForm::QLogQOverEta;
  std::string formula;
  // Limit of L(q)/f(q) as q -> inf. Not 1 for the Gaussian and the stretched
  // exponential, where f drops the constant; NaN when only bounds are known.
  double expected_limit = 1.0;
  double scale = 1.0;  // eta or alpha, whichever the form uses
  std::vector<LawSample> samples;

  double predict(double q) const {
    const double lq = std::log(q);
    switch (form) {
      case LawForm::QLogQOverEta: return q * lq / scale;
      case LawForm::QLogPower: return q * std::pow(lq, (scale - 1.0) / scale);
      case LawForm::TwoQSqrtLog: return 2.0 * q * std::sqrt(lq);
      case LawForm::Linear: return q;
    }
    return q;
  }
};

namespace detail {

inline void check_probe_list(std::span<const double> qs) {
  if (qs.empty()) throw ValidationError("q list is empty");
  // ln q >= 1 is what keeps the log-type laws positive.
  if (qs.front() < std::numbers::e * (1.0 - 1e-12)) {
    throw ValidationError("q list must start at q >= e");
  }
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (!(qs[i] > qs[i - 1])) throw ValidationError("q list must be strictly increasing");
  }
}

inline AsymptoticLaw law_for(const Kernel& k) {
  AsymptoticLaw law;
  law.family = k.family();
  switch (k.family()) {
    case KernelFamily::UniformCompact:
    case KernelFamily::PolynomialCompact:
    case KernelFamily::SingularCompact:
      law.form = LawForm::QLogQOverEta;
      law.scale = k.support_radius();
      law.formula = "q*ln(q)/" + format_number(law.scale);
      if (k.singular()) law.expected_limit = std::numeric_limits<double>::quiet_NaN();
      break;
    case KernelFamily::StretchedExp: {
      const double alpha = k.param("alpha");
      law.form = LawForm::QLogPower;
      law.scale = alpha;
      law.formula = "q*ln(q)^(" + format_number((alpha - 1.0) / alpha) + ")";
      // ln q ~ c p^{alpha/(alpha-1)} with c = alpha^{-1/(alpha-1)} (1 - 1/alpha).
      const double c = std::pow(1.0 / alpha, 1.0 / (alpha - 1.0)) * (1.0 - 1.0 / alpha);
      law.expected_limit = std::pow(c, -(alpha - 1.0) / alpha);
      break;
    }
    case KernelFamily::Gaussian:
      law.form = LawForm::TwoQSqrtLog;
      law.formula = "2*q*ln(q)^(1/2)";
      // q = p e^{p^2/2} gives p ~ (2 ln q)^{1/2}, so L ~ sqrt(2) q (ln q)^{1/2}.
      law.expected_limit = 1.0 / std::numbers::sqrt2;
      break;
    case KernelFamily::CriticalExp:
      law.form = LawForm::Linear;
      law.formula = "q";
      break;
    case KernelFamily::Custom:
      if (k.compact()) {
        law.form = LawForm::QLogQOverEta;
        law.scale = k.support_radius();
        law.formula = "q*ln(q)/" + format_number(law.scale);
      } else if (std::isfinite(k.declared_decay_rate())) {
        law.form = LawForm::Linear;
        law.formula = "q";
        law.expected_limit = k.declared_decay_rate();
      } else {
        throw ValidationError("no asymptotic law for a custom kernel without support or decay");
      }
      break;
  }
  return law;
}

}  // namespace detail

/// L(q_k)/f(q_k) for the law matching the kernel family.
inline AsymptoticLaw asymptotic_ratio(const Kernel& k, std::span<const double> q_list) {
  detail::check_probe_list(q_list);
  auto law = detail::law_for(k);
  for (double q : q_list) {
    const auto lp = conjugate(k, q);
    const double f = law.predict(q);
    law.samples.push_back({q, lp.value, f, lp.value / f});
  }
  return law;
}

struct SandwichBounds {
  double c_lo = 0.0;
  double c_hi = 0.0;
  std::vector<LawSample> samples;
};

/// Range of L(q)/(q ln q) for the singular compact kernel |y|^{-1-alpha} 1_{[-1,1]}.
inline SandwichBounds sandwich_check(double alpha_lev, std::span<const double> q_list) {
  detail::check_probe_list(q_list);
  const auto k = Kernel::singular_compact(alpha_lev);
  SandwichBounds out;
  out.c_lo = kInf;
  out.c_hi = 0.0;
  for (double q : q_list) {
    const auto lp = conjugate(k, q);
    const double f = q * std::log(q);
    const double r = lp.value / f;
    out.samples.push_back({q, lp.value, f, r});
    out.c_lo = std::min(out.c_lo, r);
    out.c_hi = std::max(out.c_hi, r);
  }
  return out;
}

}  // namespace nlrate
