#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace nlrate {

/// Bad input or configuration: the caller asked for something outside a contract.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Root of every failure that comes out of the numerics rather than the input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |p| outside the finiteness domain of the Hamiltonian.
class DomainError : public NumericalError {
 public:
  DomainError(const std::string& what, double p_max)
      : NumericalError(what), p_max_(p_max) {}
  double p_max() const noexcept { return p_max_; }

 private:
  double p_max_;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double error_estimate)
      : NumericalError(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class ConjugateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The grid does not resolve the kernel support.
class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The kernel cannot be used on this path (singular kernels in the time solver).
class UnsupportedKernel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace nlrate
