#include <cmath>

#include <gtest/gtest.h>

#include "nlrate/hamiltonian.hpp"

using namespace nlrate;

TEST(Hamiltonian, ZeroAtOrigin) {
  for (const auto& k : {Kernel::uniform(), Kernel::gaussian(), Kernel::critical_exp(),
                        Kernel::polynomial(), Kernel::stretched_exp(2.0)}) {
    const auto h = h_value(k, 0.0);
    EXPECT_NEAR(h.value, 0.0, 1e-15);
    EXPECT_NEAR(h.deriv, 0.0, 1e-15);
  }
}

TEST(Hamiltonian, UniformClosedForm) {
  const auto h = h_value(Kernel::uniform(1.0), 2.0);
  EXPECT_NEAR(h.value, std::sinh(2.0) / 2.0 - 1.0, 1e-14);
  EXPECT_NEAR(h.value, 0.813430, 1e-6);
  // d/dp sinh(p)/p = (p cosh p - sinh p)/p^2
  EXPECT_NEAR(h.deriv, (2.0 * std::cosh(2.0) - std::sinh(2.0)) / 4.0, 1e-14);
  EXPECT_EQ(h.method, HamiltonianMethod::ClosedForm);
}

TEST(Hamiltonian, SmallArgumentSeriesIsContinuous) {
  const auto k = Kernel::uniform(1.0);
  const auto below = h_value(k, 0.4999999);
  const auto above = h_value(k, 0.5000001);
  EXPECT_NEAR(below.value, above.value, 1e-7);
  // x^2/6 + x^4/120
  EXPECT_NEAR(h_value(k, 1e-4).value, 1e-8 / 6.0 + 1e-16 / 120.0, 1e-22);
}

TEST(Hamiltonian, CriticalClosedFormAndDomain) {
  const auto k = Kernel::critical_exp();
  EXPECT_NEAR(h_value(k, 0.5).value, 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(domain(k).p_max, 1.0);
  EXPECT_THROW(h_value(k, 1.0), DomainError);
  try {
    h_value(k, -1.2);
  } catch (const DomainError& e) {
    EXPECT_DOUBLE_EQ(e.p_max(), 1.0);
  }
}

TEST(Hamiltonian, QuadratureMatchesClosedForms) {
  for (const auto& k : {Kernel::uniform(1.0), Kernel::uniform(2.5), Kernel::gaussian(),
                        Kernel::critical_exp()}) {
    for (double p : {-2.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
      if (!domain(k).contains(p)) continue;
      const auto a = h_value(k, p);
      const auto b = h_value(k, p, EvalMode::ForceQuadrature);
      EXPECT_EQ(b.method, HamiltonianMethod::Quadrature);
      EXPECT_NEAR(b.value, a.value, 1e-8 * std::abs(a.value)) << k.describe() << " p=" << p;
      EXPECT_NEAR(b.deriv, a.deriv, 1e-8 * std::abs(a.deriv)) << k.describe() << " p=" << p;
      EXPECT_NEAR(b.second, a.second, 1e-8 * std::abs(a.second)) << k.describe() << " p=" << p;
    }
  }
}

// Composite Simpson oracle for \int (e^{py} - 1) J over y in [-Y, Y].
double simpson_h(const Kernel& k, double p, double Y, int n) {
  const double h = 2.0 * Y / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = -Y + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::expm1(p * y) * k.eval(y);
  }
  return s * h / 3.0;
}

TEST(Hamiltonian, StretchedAndPolynomialAgainstSimpson) {
  const auto s = Kernel::stretched_exp(2.0);
  EXPECT_NEAR(h_value(s, 3.0).value, simpson_h(s, 3.0, 20.0, 40000), 1e-9);
  // Closed form for exp(-y^2): sqrt(pi) (e^{p^2/4} - 1)
  EXPECT_NEAR(h_value(s, 3.0).value, std::sqrt(M_PI) * std::expm1(2.25), 1e-9);
  const auto poly = Kernel::polynomial();
  EXPECT_NEAR(h_value(poly, 1.5).value, simpson_h(poly, 1.5, 2.0, 20000), 1e-10);
}

TEST(Hamiltonian, StretchedLargeMomentum) {
  // exp(-y^2) with p = 40: sqrt(pi) (e^{400} - 1).
  const auto h = h_value(Kernel::stretched_exp(2.0), 40.0);
  EXPECT_NEAR(h.value / (std::sqrt(M_PI) * std::exp(400.0)), 1.0, 1e-9);
}

TEST(Hamiltonian, LevyCorrectedMatchesHighResolutionOracle) {
  const double alpha = 0.5;
  const auto k = Kernel::singular_compact(alpha);
  // Symmetrized integrand 2(cosh(py) - 1) y^{-1-alpha} on (0, 1], integrated in u = ln y.
  auto oracle = [&](double p) {
    const double lo = std::log(1e-12), n = 200000;
    const double h = -lo / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double y = std::exp(lo + i * h);
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * 2.0 * (std::cosh(p * y) - 1.0) * std::pow(y, -alpha);
    }
    // Leading term below 1e-12: p^2 y^{1-alpha}.
    return s * h / 3.0 + p * p * std::pow(1e-12, 2.0 - alpha) / (2.0 - alpha);
  };
  for (double p : {0.3, 1.0, 4.0}) {
    EXPECT_NEAR(h_value(k, p).value, oracle(p), 1e-9 * oracle(p)) << "p=" << p;
  }
}

TEST(Hamiltonian, LevySymmetryAndConvexity) {
  const auto k = Kernel::singular_compact(1.5);
  EXPECT_DOUBLE_EQ(h_value(k, 2.0).value, h_value(k, -2.0).value);
  EXPECT_DOUBLE_EQ(h_value(k, 2.0).deriv, -h_value(k, -2.0).deriv);
  EXPECT_GT(h_value(k, 2.0).second, 0.0);
  EXPECT_DOUBLE_EQ(h_value(k, 0.0).deriv, 0.0);
}

TEST(Hamiltonian, ExpCorrectedSeriesBranch) {
  EXPECT_NEAR(exp_corrected(1e-5), 0.5e-10 + 1e-15 / 6.0 + 1e-20 / 24.0, 1e-25);
  EXPECT_NEAR(exp_corrected(1.0), std::exp(1.0) - 2.0, 1e-15);
}

TEST(Hamiltonian, RejectsNonFiniteMomentum) {
  EXPECT_THROW(h_value(Kernel::gaussian(), NAN), ValidationError);
}
