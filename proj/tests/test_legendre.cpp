#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "nlrate/legendre.hpp"

using namespace nlrate;

namespace {

// Golden-section maximization of p q - H(p) on [a, b].
double golden_conjugate(const Kernel& k, double q, double a, double b) {
  auto f = [&](double p) { return p * q - h_value(k, p).value; };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) > f(d)) b = d; else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return f(0.5 * (a + b));
}

}  // namespace

TEST(Legendre, GaussianExactPoint) {
  const auto lp = conjugate(Kernel::gaussian(), std::exp(0.5));
  EXPECT_NEAR(lp.p0, 1.0, 1e-8);
  EXPECT_NEAR(lp.value, 1.0, 1e-8);
  EXPECT_FALSE(lp.saturated);
}

TEST(Legendre, ZeroAndEvenness) {
  const auto k = Kernel::uniform();
  EXPECT_EQ(conjugate(k, 0.0).value, 0.0);
  EXPECT_EQ(conjugate(k, 0.0).p0, 0.0);
  const auto a = conjugate(k, 7.5), b = conjugate(k, -7.5);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.p0, -b.p0);
}

TEST(Legendre, UniformAgainstGoldenSection) {
  const auto k = Kernel::uniform(1.0);
  const double q = h_value(k, 3.0).deriv;
  const auto lp = conjugate(k, q);
  EXPECT_NEAR(lp.p0, 3.0, 1e-9);
  EXPECT_NEAR(lp.value, golden_conjugate(k, q, 0.0, 50.0), 1e-10);
  EXPECT_NEAR(lp.value, 3.0 * q - (std::sinh(3.0) / 3.0 - 1.0), 1e-12);
}

TEST(Legendre, CriticalAgainstBisection) {
  const auto k = Kernel::critical_exp();
  const double q = 1e6;
  // q = 2p / (1 - p^2)^2 on (0, 1)
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double d = 1.0 - mid * mid;
    (2.0 * mid / (d * d) < q ? lo : hi) = mid;
  }
  const double p = 0.5 * (lo + hi);
  const double want = p * q - p * p / (1.0 - p * p);
  const auto lp = conjugate(k, q);
  EXPECT_NEAR(lp.value, want, 1e-9 * want);
  EXPECT_GE(lp.value / q, 0.99);
  EXPECT_LE(lp.value / q, 1.01);
}

TEST(Legendre, StretchedAgainstClosedForm) {
  // exp(-y^2): H = sqrt(pi)(e^{p^2/4} - 1), H' = sqrt(pi) p/2 e^{p^2/4}.
  const auto k = Kernel::stretched_exp(2.0);
  const double p = 4.0;
  const double q = std::sqrt(std::numbers::pi) * 0.5 * p * std::exp(0.25 * p * p);
  const auto lp = conjugate(k, q);
  EXPECT_NEAR(lp.p0, p, 1e-8);
  EXPECT_NEAR(lp.value, p * q - std::sqrt(std::numbers::pi) * std::expm1(0.25 * p * p), 1e-8 * q);
}

TEST(Legendre, UniformLawApproachesOne) {
  const std::vector<double> qs{1e6, 1e7, 1e8, 1e9};
  const auto law = asymptotic_ratio(Kernel::uniform(1.0), qs);
  EXPECT_EQ(law.form, LawForm::QLogQOverEta);
  ASSERT_EQ(law.samples.size(), 4u);
  for (std::size_t i = 1; i < law.samples.size(); ++i) {
    EXPECT_LT(std::abs(law.samples[i].ratio - 1.0), std::abs(law.samples[i - 1].ratio - 1.0));
  }
  EXPECT_NEAR(law.samples[2].ratio, 1.1517, 1e-3);
}

TEST(Legendre, LawConstants) {
  const std::vector<double> qs{1e4};
  EXPECT_NEAR(asymptotic_ratio(Kernel::stretched_exp(2.0), qs).expected_limit, 2.0, 1e-14);
  EXPECT_NEAR(asymptotic_ratio(Kernel::gaussian(), qs).expected_limit, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(asymptotic_ratio(Kernel::critical_exp(), qs).form, LawForm::Linear);
  EXPECT_TRUE(std::isnan(asymptotic_ratio(Kernel::singular_compact(0.5), qs).expected_limit));
}

TEST(Legendre, ProbeListValidation) {
  const std::vector<double> low{2.0, 10.0};
  const std::vector<double> unsorted{10.0, 5.0};
  const std::vector<double> empty;
  EXPECT_THROW(asymptotic_ratio(Kernel::uniform(), low), ValidationError);
  EXPECT_THROW(asymptotic_ratio(Kernel::uniform(), unsorted), ValidationError);
  EXPECT_THROW(asymptotic_ratio(Kernel::uniform(), empty), ValidationError);
  const std::vector<double> at_e{std::numbers::e, 10.0};
  EXPECT_NO_THROW(asymptotic_ratio(Kernel::uniform(), at_e));
}

TEST(Legendre, SingularSandwich) {
  const std::vector<double> qs{1e3, 1e5, 1e7, 1e9};
  for (double alpha : {0.5, 1.5}) {
    const auto s = sandwich_check(alpha, qs);
    EXPECT_GT(s.c_lo, 0.0);
    EXPECT_LT(s.c_hi / s.c_lo, 20.0);
    EXPECT_EQ(s.samples.size(), qs.size());
  }
}

TEST(Legendre, RejectsNonFinite) {
  EXPECT_THROW(conjugate(Kernel::uniform(), INFINITY), ValidationError);
}

TEST(Legendre, UniformWidthScaling) {
  // H_eta(p) = H_1(eta p), hence L_eta(q) = L_1(q / eta).
  const auto k1 = Kernel::uniform(1.0), k2 = Kernel::uniform(2.0);
  for (double q : {1e3, 1e6, 1e8}) {
    const double l1 = conjugate(k1, q).value, l2 = conjugate(k2, q).value;
    EXPECT_NEAR(l2, conjugate(k1, q / 2.0).value, 1e-9 * l2);
    const double f = q * std::log(q);
    EXPECT_NEAR((l2 / f) / (l1 / f), 0.5, 0.06) << "q=" << q;
  }
  const std::vector<double> qs{1e8};
  EXPECT_NEAR(asymptotic_ratio(k2, qs).samples[0].law, 1e8 * std::log(1e8) / 2.0, 1e-6);
}

TEST(Legendre, PointInvariants) {
  for (const auto& k : {Kernel::uniform(), Kernel::gaussian(), Kernel::critical_exp(),
                        Kernel::polynomial(), Kernel::stretched_exp(3.0)}) {
    for (double q : {-300.0, -2.0, -0.01, 0.01, 0.7, 40.0, 1e5}) {
      const auto lp = conjugate(k, q);
      EXPECT_GE(lp.p0 * q, 0.0);
      EXPECT_GT(lp.value, 0.0);
      EXPECT_NEAR(lp.value, lp.p0 * q - h_value(k, lp.p0).value, 1e-12 * std::max(1.0, lp.value));
      EXPECT_LE(lp.residual, 1e-10 * std::max(1.0, std::abs(q)));
    }
  }
}
