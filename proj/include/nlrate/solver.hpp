#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fftw3.h>

#include "nlrate/errors.hpp"
#include "nlrate/kernel.hpp"
#include "nlrate/ratefn.hpp"

namespace nlrate {

/// Uniform grid on [-R, R]; n odd so that x = 0 is a node.
struct Grid {
  double R = 1.0;
  std::size_t n = 3;
  double h = 1.0;

  static Grid make(double R, std::size_t n) {
    if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("grid: R must be positive");
    if (n < 3 || n % 2 == 0) throw ValidationError("grid: n must be odd and >= 3");
    return {R, n, 2.0 * R / static_cast<double>(n - 1)};
  }

  double x(std::size_t i) const { return -R + h * static_cast<double>(i); }
  std::size_t center() const { return n / 2; }
};

/// Finest grid with spacing <= h_max. For compact kernels the spacing is chosen
/// so the support radius falls on a node whenever R and the radius allow it.
inline Grid aligned_grid(const Kernel& k, double R, double h_max) {
  if (!(h_max > 0.0)) throw ValidationError("grid: h must be positive");
  if (k.compact()) {
    const double s = k.support_radius();
    const auto m0 = static_cast<long>(std::ceil(s / h_max - 1e-9));
    for (long m = std::max(1L, m0); m <= 4 * std::max(1L, m0); ++m) {
      const double cells = R * static_cast<double>(m) / s;
      if (std::abs(cells - std::round(cells)) < 1e-9 * std::max(1.0, cells)) {
        return Grid::make(R, 2 * static_cast<std::size_t>(std::llround(cells)) + 1);
      }
    }
  }
  const auto half = static_cast<std::size_t>(std::ceil(R / h_max - 1e-9));
  return Grid::make(R, 2 * std::max<std::size_t>(half, 1) + 1);
}

/// h = min(eta/16, R/512) for compact kernels, R/1024 otherwise.
inline Grid default_grid(const Kernel& k, double R) {
  const double h = k.compact() ? std::min(k.support_radius() / 16.0, R / 512.0) : R / 1024.0;
  return aligned_grid(k, R, h);
}

/// Samples of a function on a grid, zero outside [-R, R].
struct Field {
  Grid grid;
  std::vector<double> values;
  double time = 0.0;

  static Field sample(const Grid& g, const std::function<double(double)>& f, double t = 0.0) {
    Field out{g, std::vector<double>(g.n), t};
    for (std::size_t i = 0; i < g.n; ++i) out.values[i] = f(g.x(i));
    return out;
  }
  static Field constant(const Grid& g, double v, double t = 0.0) {
    return {g, std::vector<double>(g.n, v), t};
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

enum class ConvolutionMethod { Direct, FastTransform };
enum class Integrator { RK4, DormandPrince };

struct SolveConfig {
  double T = 0.1;
  double dt = 0.0;  // 0 selects default_dt
  Integrator integrator = Integrator::RK4;
  double rtol = 1e-8;
  double atol = 1e-14;
  ConvolutionMethod convolution = ConvolutionMethod::Direct;
  // Rescale the sampled kernel so its discrete mass equals mass(J).
  bool mass_correction = true;
};

/// The generator is bounded by 2 mass(J) independently of h, so the step only
/// depends on the kernel and the horizon; at least 200 steps resolve the
/// high-order jump terms that carry tiny deviations.
inline double default_dt(const Kernel& k, double T) {
  const double dt = std::min(0.05 / k.mass(), T / 200.0);
  return T / std::ceil(T / dt - 1e-9);
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct FftwPlanDeleter {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDeleter>;

}  // namespace detail

/// Trapezoidal discretization of f -> \int_{-R}^{R} J(x_i - y) f(y) dy.
///
/// Weight for node j is c_{|i-j|} w_j with c_k = h J(k h), halved at an
/// aligned support edge, and w_j = 1/2 at the domain ends. The zero data
/// outside [-R, R] never enters the sum.
class ConvolutionOperator {
 public:
  ConvolutionOperator(const Kernel& k, const Grid& g,
                      ConvolutionMethod method = ConvolutionMethod::Direct,
                      bool mass_correction = false)
      : grid_(g), method_(method) {
    if (k.singular()) {
      throw UnsupportedKernel("kernels singular at the origin are not supported by the solver");
    }
    const double h = g.h;
    std::size_t last = 0;
    if (k.compact()) {
      const double s = k.support_radius();
      if (h > s / 8.0 * (1.0 + 1e-12)) {
        throw ResolutionError("grid spacing " + std::to_string(h) +
                              " does not resolve kernel support " + std::to_string(s) +
                              " (need h <= support/8)");
      }
      const double ratio = s / h;
      aligned_ = std::abs(ratio - std::round(ratio)) < 1e-9 * ratio;
      last = aligned_ ? static_cast<std::size_t>(std::llround(ratio))
                      : static_cast<std::size_t>(std::floor(ratio));
      weights_.resize(last + 1);
      for (std::size_t i = 0; i < last; ++i) weights_[i] = h * k.eval(h * static_cast<double>(i));
      const double y_last = h * static_cast<double>(last);
      if (aligned_) {
        weights_[last] = 0.5 * h * k.edge_value();
      } else {
        // Trapezoid on the partial cell [last h, s], lumped onto node `last`.
        const double j_last = k.eval(y_last);
        weights_[last] = 0.5 * h * j_last + 0.5 * (s - y_last) * (j_last + k.edge_value());
      }
    } else {
      // Sample until J has fallen 700 e-folds below J(0).
      const double floor = k.log_eval(0.0) - 700.0;
      double y = 1.0;
      while (k.log_eval(y) > floor) y *= 2.0;
      double lo = 0.5 * y;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + y);
        (k.log_eval(mid) > floor ? lo : y) = mid;
      }
      last = static_cast<std::size_t>(std::ceil(y / h));
      weights_.resize(last + 1);
      for (std::size_t i = 0; i <= last; ++i) {
        weights_[i] = h * std::exp(k.log_eval(h * static_cast<double>(i)));
      }
    }

    // Suffix sums accumulate from the far tail so small tails keep relative accuracy.
    suffix_.assign(weights_.size() + 1, 0.0);
    for (std::size_t i = weights_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + weights_[i];
    total_ = weights_[0] + 2.0 * suffix_[1];
    if (mass_correction && std::isfinite(k.mass())) {
      const double scale = k.mass() / total_;
      for (double& w : weights_) w *= scale;
      for (double& w : suffix_) w *= scale;
      total_ = k.mass();
    }

    band_ = std::min(weights_.size() - 1, g.n - 1);
    stencil_.resize(2 * band_ + 1);
    for (std::size_t d = 0; d <= band_; ++d) {
      stencil_[band_ + d] = weights_[d];
      stencil_[band_ - d] = weights_[d];
    }
    coincident_edge_ = aligned_ && weights_.size() - 1 <= g.n - 1;

    build_leakage();
    if (method_ == ConvolutionMethod::FastTransform) build_fft();
  }

  const Grid& grid() const noexcept { return grid_; }
  ConvolutionMethod method() const noexcept { return method_; }
  std::size_t bandwidth() const noexcept { return band_; }
  /// Sum of the kernel weights over the whole line.
  double total_weight() const noexcept { return total_; }
  /// Kernel weight that falls outside [-R, R] (or is lost to the end halving) per node.
  const std::vector<double>& leakage() const noexcept { return leakage_; }
  std::span<const double> kernel_weights() const noexcept { return weights_; }

  void apply(std::span<const double> f, std::span<double> out) const {
    const std::size_t n = grid_.n;
    if (f.size() != n || out.size() != n) throw ValidationError("convolution: size mismatch");
    scaled_.assign(f.begin(), f.end());
    scaled_.front() *= 0.5;
    scaled_.back() *= 0.5;
    if (method_ == ConvolutionMethod::Direct) {
      const double* g = scaled_.data();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > band_ ? i - band_ : 0;
        const std::size_t hi = std::min(n - 1, i + band_);
        const double* st = stencil_.data() + band_ - i;
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += st[j] * g[j];
        out[i] = acc;
      }
    } else {
      apply_fft(out);
    }
    if (coincident_edge_) {
      // Domain end and support edge on the same node: one trapezoid endpoint, one halving.
      const std::size_t kk = weights_.size() - 1;
      out[kk] += 0.5 * weights_[kk] * f[0];
      out[n - 1 - kk] += 0.5 * weights_[kk] * f[n - 1];
    }
  }

  std::vector<double> apply(std::span<const double> f) const {
    std::vector<double> out(f.size());
    apply(f, out);
    return out;
  }

 private:
  double suffix(std::size_t k) const { return k < suffix_.size() ? suffix_[k] : 0.0; }
  double weight(std::size_t k) const { return k < weights_.size() ? weights_[k] : 0.0; }

  void build_leakage() {
    const std::size_t n = grid_.n;
    const std::size_t kk = weights_.size() - 1;
    leakage_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t to_right = n - 1 - i;
      double tau = suffix(i + 1) + suffix(to_right + 1);
      if (!(coincident_edge_ && i == kk)) tau += 0.5 * weight(i);
      if (!(coincident_edge_ && to_right == kk)) tau += 0.5 * weight(to_right);
      leakage_[i] = tau;
    }
  }

  void build_fft() {
    const std::size_t n = grid_.n;
    std::size_t size = 1;
    while (size < 2 * n - 1) size <<= 1;
    fft_size_ = size;
    const std::size_t bins = size / 2 + 1;
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * size)));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
    kernel_spec_.assign(bins, {});
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      forward_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(size), real_.get(), spec_.get(),
                                          FFTW_ESTIMATE));
      backward_.reset(fftw_plan_dft_c2r_1d(static_cast<int>(size), spec_.get(), real_.get(),
                                           FFTW_ESTIMATE));
    }
    std::fill(real_.get(), real_.get() + size, 0.0);
    for (std::size_t d = 0; d <= band_; ++d) {
      real_.get()[d] = weights_[d];
      if (d > 0) real_.get()[size - d] = weights_[d];
    }
    fftw_execute(forward_.get());
    for (std::size_t b = 0; b < bins; ++b) kernel_spec_[b] = {spec_.get()[b][0], spec_.get()[b][1]};
  }

  void apply_fft(std::span<double> out) const {
    const std::size_t n = grid_.n;
    double* r = real_.get();
    std::copy(scaled_.begin(), scaled_.end(), r);
    std::fill(r + n, r + fft_size_, 0.0);
    fftw_execute(forward_.get());
    const std::size_t bins = fft_size_ / 2 + 1;
    for (std::size_t b = 0; b < bins; ++b) {
      const std::complex<double> z(spec_.get()[b][0], spec_.get()[b][1]);
      const auto prod = z * kernel_spec_[b];
      spec_.get()[b][0] = prod.real();
      spec_.get()[b][1] = prod.imag();
    }
    fftw_execute(backward_.get());
    const double inv = 1.0 / static_cast<double>(fft_size_);
    for (std::size_t i = 0; i < n; ++i) out[i] = r[i] * inv;
  }

  Grid grid_;
  ConvolutionMethod method_;
  bool aligned_ = false;
  bool coincident_edge_ = false;
  std::vector<double> weights_;
  std::vector<double> suffix_;
  std::vector<double> stencil_;
  std::vector<double> leakage_;
  std::size_t band_ = 0;
  double total_ = 0.0;
  mutable std::vector<double> scaled_;

  std::size_t fft_size_ = 0;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  std::vector<std::complex<double>> kernel_spec_;
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
};

/// Plain trapezoidal convolution of a field with the kernel.
inline Field convolve(const Kernel& k, const Field& f,
                      ConvolutionMethod method = ConvolutionMethod::Direct) {
  ConvolutionOperator op(k, f.grid, method);
  return {f.grid, op.apply(f.values), f.time};
}

using StepObserver = std::function<void(const Field&)>;

namespace detail {

// du/dt = W u - u + e^{growth t} source
class LinearRhs {
 public:
  LinearRhs(const ConvolutionOperator& op, std::span<const double> source, double growth)
      : op_(op), source_(source), growth_(growth) {}

  void operator()(double t, std::span<const double> u, std::span<double> out) const {
    op_.apply(u, out);
    const double g = source_.empty() ? 0.0 : std::exp(growth_ * t);
    for (std::size_t i = 0; i < u.size(); ++i) {
      out[i] -= u[i];
      if (g != 0.0) out[i] += g * source_[i];
    }
  }

 private:
  const ConvolutionOperator& op_;
  std::span<const double> source_;
  double growth_;
};

inline void validate(const Kernel& k, const SolveConfig& cfg) {
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ValidationError("solve: T must be positive");
  if (!(cfg.dt >= 0.0)) throw ValidationError("solve: dt must be positive");
  const double mass = k.mass();
  // Stability bound 2/lambda_max with lambda_max <= 2 mass.
  if (cfg.dt > 0.9 / mass) {
    throw ValidationError("solve: dt exceeds 0.9 of the explicit stability bound 1/mass");
  }
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) {
    throw ValidationError("solve: rtol and atol must be positive");
  }
}

inline void check_growth(const Field& u, double scale) {
  for (double v : u.values) {
    if (!std::isfinite(v) || std::abs(v) > 10.0 * scale) {
      throw InstabilityError("solution norm grew beyond 10x its bound at t = " +
                             std::to_string(u.time));
    }
  }
}

inline void run_rk4(const LinearRhs& rhs, Field& u, double T, double dt, double scale,
                    const StepObserver& observe) {
  const std::size_t n = u.values.size();
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = u.time;
    auto& y = u.values;
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    u.time = (s + 1 == steps) ? T : t + dt;
    check_growth(u, scale);
    if (observe) observe(u);
  }
}

// Dormand-Prince 5(4) with the usual PI-free step controller.
inline void run_dopri(const LinearRhs& rhs, Field& u, double T, double dt0, double dt_max,
                      double rtol, double atol, double scale, const StepObserver& observe) {
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                          b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

  const std::size_t n = u.values.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), next(n);
  double dt = std::min(dt0, dt_max);
  auto& y = u.values;
  rhs(u.time, y, k1);
  int rejected = 0;
  while (u.time < T) {
    const double t = u.time;
    const bool last = t + dt >= T * (1.0 - 1e-14);
    if (last) dt = T - t;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * a21 * k1[i];
    rhs(t + c2 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    }
    rhs(t + c4 * dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    rhs(t + c5 * dt, tmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    rhs(t + dt, tmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = y[i] + dt * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    rhs(t + dt, next, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(next[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      y.swap(next);
      k1.swap(k7);
      u.time = last ? T : t + dt;
      check_growth(u, scale);
      if (observe) observe(u);
      rejected = 0;
    } else if (++rejected > 50) {
      throw InstabilityError("adaptive step size collapsed");
    }
    dt = std::min(dt * factor, dt_max);
  }
}

inline void run(const Kernel& k, const LinearRhs& rhs, Field& u, const SolveConfig& cfg,
                double scale, const StepObserver& observe) {
  const double dt = cfg.dt > 0.0 ? cfg.T / std::ceil(cfg.T / cfg.dt - 1e-9) : default_dt(k, cfg.T);
  if (cfg.integrator == Integrator::RK4) {
    run_rk4(rhs, u, cfg.T, dt, scale, observe);
  } else {
    run_dopri(rhs, u, cfg.T, dt, 0.9 / k.mass(), cfg.rtol, cfg.atol, scale, observe);
  }
}

}  // namespace detail

/// Time step that integrate() will use for this configuration (RK4).
inline double effective_dt(const Kernel& k, const SolveConfig& cfg) {
  return cfg.dt > 0.0 ? cfg.T / std::ceil(cfg.T / cfg.dt - 1e-9) : default_dt(k, cfg.T);
}

/// Advances du/dt = \int_{-R}^{R} J(x - y) u(y) dy - u from u0 to time u0.time + T.
inline Field integrate(const Kernel& k, const Field& u0, const SolveConfig& cfg,
                       const StepObserver& observe = {}) {
  detail::validate(k, cfg);
  for (double v : u0.values) {
    if (!std::isfinite(v)) throw ValidationError("solve: initial data must be finite");
  }
  ConvolutionOperator op(k, u0.grid, cfg.convolution, cfg.mass_correction);
  const detail::LinearRhs rhs(op, {}, 0.0);
  const double growth = std::max(0.0, op.total_weight() - 1.0);
  const double scale = std::max(u0.max_abs() * std::exp(growth * cfg.T), 1e-300);
  Field u = u0;
  u.time = 0.0;
  detail::run(k, rhs, u, cfg, scale, observe);
  u.time = u0.time + cfg.T;
  return u;
}

/// Deviation v_R = U - u_R for u0 = 1, where U(t) = e^{(m-1)t} is the
/// whole-line solution (U = 1 for normalized kernels). Solved directly as
///   dv/dt = W v - v + U(t) tau,  v(0) = 0,
/// with tau the leaked kernel weight, so deviations far below machine epsilon
/// relative to 1 keep full relative accuracy.
inline Field integrate_deviation(const Kernel& k, const Grid& g, const SolveConfig& cfg,
                                 const StepObserver& observe = {}) {
  detail::validate(k, cfg);
  ConvolutionOperator op(k, g, cfg.convolution, cfg.mass_correction);
  const double growth = op.total_weight() - 1.0;
  const detail::LinearRhs rhs(op, op.leakage(), growth);
  Field v = Field::constant(g, 0.0);
  const double scale = std::exp(std::max(0.0, growth) * cfg.T);
  detail::run(k, rhs, v, cfg, scale, observe);
  return v;
}

/// Initial datum for reference solves.
struct InitialDatum {
  std::function<double(double)> f;
  bool constant_one = false;
  std::string label;

  static InitialDatum one() {
    return {[](double) { return 1.0; }, true, "one"};
  }
  /// exp(-x^2 / (2 w^2)).
  static InitialDatum bump(double width) {
    if (!(width > 0.0)) throw ValidationError("bump: width must be positive");
    char buf[48];
    std::snprintf(buf, sizeof buf, "bump:%.10g", width);
    return {[width](double x) { return std::exp(-0.5 * x * x / (width * width)); }, false, buf};
  }
};

struct ReferenceSolution {
  Field field;
  bool exact = false;
  // Predicted |u - u_{R+margin}| on [-R, R] at T; 0 when exact.
  double proxy_error_bound = 0.0;
};

/// Whole-line solution restricted to the grid. Exact for u0 = 1; otherwise the
/// Dirichlet problem on [-(R+margin), R+margin] restricted back to [-R, R].
inline ReferenceSolution reference_solution(const Kernel& k, const Grid& g,
                                            const InitialDatum& u0, double T, double margin,
                                            SolveConfig cfg = {}) {
  if (!(margin > 0.0)) throw ValidationError("reference: margin must be positive");
  if (!(T > 0.0)) throw ValidationError("reference: T must be positive");
  if (u0.constant_one) {
    return {Field::constant(g, std::exp((k.mass() - 1.0) * T), T), true, 0.0};
  }
  const auto extra = static_cast<std::size_t>(std::llround(margin / g.h));
  if (extra == 0) throw ValidationError("reference: margin below one grid cell");
  const Grid big{g.R + g.h * static_cast<double>(extra), g.n + 2 * extra, g.h};
  cfg.T = T;
  const Field solved = integrate(k, Field::sample(big, u0.f), cfg);
  Field out{g, std::vector<double>(solved.values.begin() + static_cast<std::ptrdiff_t>(extra),
                                   solved.values.begin() + static_cast<std::ptrdiff_t>(extra + g.n)),
            T};
  return {std::move(out), false, bound(k, big.R, g.R / big.R, T).bound};
}

/// Field snapshot as CSV: comment header, then "x,u" rows at full precision.
inline void write_field_csv(std::ostream& os, const Field& f, std::string_view kernel, double dt,
                            std::string_view value_name = "u") {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# R=%.17g t=%.17g h=%.17g dt=%.17g", f.grid.R, f.time, f.grid.h,
                dt);
  os << buf << " kernel=" << kernel << "\n";
  os << "x," << value_name << "\n";
  for (std::size_t i = 0; i < f.grid.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid.x(i), f.values[i]);
    os << buf;
  }
}

}  // namespace nlrate
