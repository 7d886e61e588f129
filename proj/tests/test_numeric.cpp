#include "specsub/error.hpp"
#include "specsub/numeric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace specsub;

TEST(CompensatedSum, RecoversSmallAddendsLostByNaiveSum) {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i)
    s += 1e-16;
  s += -1.0;
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}

TEST(DeriveSeed, DeterministicAndTagSensitive) {
  EXPECT_EQ(derive_seed(7, "chain"), derive_seed(7, "chain"));
  EXPECT_NE(derive_seed(7, "chain"), derive_seed(7, "proposal"));
  EXPECT_NE(derive_seed(7, "chain"), derive_seed(8, "chain"));
  EXPECT_NE(derive_seed(7, "projection", 0), derive_seed(7, "projection", 1));
}

TEST(LogAddExp, MatchesDirectEvaluationAndHandlesExtremes) {
  EXPECT_NEAR(log_add_exp(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
  EXPECT_NEAR(log_add_exp(1000.0, 1000.0), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(log_add_exp(-std::numeric_limits<double>::infinity(), 2.0), 2.0);
}

TEST(Error, CarriesCategory) {
  try {
    fail(ErrorCategory::parse, "bad");
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::parse);
    EXPECT_STREQ(category_name(e.category()), "parse");
    EXPECT_STREQ(e.what(), "bad");
  }
}
