#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nlrate/errors.hpp"

namespace nlrate::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

inline constexpr double kAbsTol = 1e-12;
inline constexpr double kRelTol = 1e-10;

namespace detail {

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece rule(F& f, double a, double b) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  return {a, b, v, err};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod over consecutive breakpoints: the
/// interval with the largest error estimate is bisected until the total error
/// meets max(abs_tol, rel_tol * |I|). Throws QuadratureError otherwise.
template <class F>
Result integrate_pieces(F&& f, std::span<const double> breaks, double abs_tol = kAbsTol,
                        double rel_tol = kRelTol, int max_splits = 4000) {
  std::priority_queue<detail::Piece> heap;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) heap.push(detail::rule(f, breaks[i], breaks[i + 1]));
  }
  auto sums = [&] {
    Result r;
    auto copy = heap;
    while (!copy.empty()) {
      r.value += copy.top().value;
      r.error += copy.top().error;
      copy.pop();
    }
    return r;
  };
  Result total = sums();
  int splits = 0;
  while (!heap.empty() && total.error > std::max(abs_tol, rel_tol * std::abs(total.value)) &&
         splits < max_splits) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    const auto left = detail::rule(f, worst.a, mid);
    const auto right = detail::rule(f, mid, worst.b);
    heap.push(left);
    heap.push(right);
    total.value += left.value + right.value - worst.value;
    total.error += left.error + right.error - worst.error;
    ++splits;
    if (splits % 64 == 0) total = sums();  // limit drift of the running sums
  }
  total = sums();
  if (!std::isfinite(total.value)) {
    throw QuadratureError("quadrature produced a non-finite value", total.error);
  }
  if (total.error > std::max(abs_tol, rel_tol * std::abs(total.value))) {
    throw QuadratureError("quadrature did not converge, error estimate " +
                              std::to_string(total.error),
                          total.error);
  }
  return total;
}

/// Single-interval form of integrate_pieces.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol = kAbsTol, double rel_tol = kRelTol) {
  if (!(b > a)) return {};
  const double breaks[2] = {a, b};
  return integrate_pieces(f, std::span<const double>(breaks), abs_tol, rel_tol);
}

}  // namespace nlrate::quad
