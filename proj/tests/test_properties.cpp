#include <gtest/gtest.h>

#include "nlrate/properties.hpp"

using namespace nlrate;

class Suite : public ::testing::TestWithParam<std::string> {};

TEST_P(Suite, AllChecksPass) {
  const auto results = run_property_suites({GetParam()});
  EXPECT_FALSE(results.empty());
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

INSTANTIATE_TEST_SUITE_P(Invariants, Suite,
                         ::testing::Values("kernel", "hamiltonian", "legendre", "ratefn", "solver"));

TEST(Suites, UnknownNameRejected) {
  EXPECT_THROW(run_property_suites({"nope"}), ValidationError);
}
