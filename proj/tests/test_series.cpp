#include "specsub/error.hpp"
#include "specsub/series.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace specsub;

namespace {

std::string write_temp(const std::string &name, const std::string &content) {
  const auto p = std::filesystem::temp_directory_path() / ("specsub_series_" + name);
  std::ofstream(p) << content;
  return p.string();
}

double lag_autocov(std::span<const double> x, std::size_t lag) {
  double mean = 0.0;
  for (double v : x)
    mean += v;
  mean /= static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t t = lag; t < x.size(); ++t)
    s += (x[t] - mean) * (x[t - lag] - mean);
  return s / static_cast<double>(x.size());
}

} // namespace

TEST(LoadSeries, ParsesOneValuePerLine) {
  const auto s = load_series(write_temp("basic.txt", "1.0\n2.0\n3.0"));
  ASSERT_EQ(s.n_time(), 3u);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[2], 3.0);
  EXPECT_FALSE(s.demeaned());
}

TEST(LoadSeries, SkipsCommentsAndSelectsColumn) {
  const auto s = load_series(write_temp("cols.csv", "# t,x\n1,10\n2,20\n\n3;30\n"), 1);
  ASSERT_EQ(s.n_time(), 3u);
  EXPECT_EQ(s[1], 20.0);
}

TEST(LoadSeries, ReportsLineOfBadEntry) {
  const auto path = write_temp("bad.txt", "1.0\nabc\n3.0\n");
  try {
    load_series(path);
    FAIL() << "expected a parse error";
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(LoadSeries, RejectsNonFiniteShortAndMissing) {
  EXPECT_THROW(load_series(write_temp("inf.txt", "1\ninf\n")), Error);
  EXPECT_THROW(load_series(write_temp("one.txt", "1\n")), Error);
  try {
    load_series("/nonexistent/specsub/file.txt");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::io);
  }
}

TEST(LoadSeries, ReadsLongFile) {
  std::string content;
  for (int i = 0; i < 44001; ++i)
    content += std::to_string(i % 7) + "\n";
  EXPECT_EQ(load_series(write_temp("long.txt", content)).n_time(), 44001u);
}

TEST(Demean, Examples) {
  const auto d = demean(TimeSeries({1, 2, 3}));
  EXPECT_TRUE(d.demeaned());
  EXPECT_NEAR(d[0], -1.0, 1e-15);
  EXPECT_NEAR(d[1], 0.0, 1e-15);
  EXPECT_NEAR(d[2], 1.0, 1e-15);
  const auto z = demean(TimeSeries({5, 5, 5, 5}));
  for (double v : z.values())
    EXPECT_EQ(v, 0.0);
  const auto again = demean(TimeSeries({-1, 0, 1}));
  EXPECT_EQ(again[0], -1.0);
  EXPECT_EQ(again[2], 1.0);
}

TEST(Demean, IdempotentAndMeetsTolerance) {
  const auto s = simulate_arma(std::vector<double>{0.5}, {}, 1.0, 1000, 11);
  const auto d1 = demean(s);
  const auto d2 = demean(d1);
  for (std::size_t t = 0; t < d1.n_time(); ++t)
    EXPECT_NEAR(d1[t], d2[t], 1e-14);
  EXPECT_LT(std::abs(d1.mean()), 1e-10 * d1.stddev());
}

TEST(LogSquare, Examples) {
  const auto a = log_square_transform(TimeSeries({1.0, -1.0}));
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], 0.0);
  const auto b = log_square_transform(TimeSeries({std::exp(1.0), 1.0}));
  EXPECT_NEAR(b[0], 1.0, 1e-15);
  EXPECT_NEAR(b[1], -1.0, 1e-15);
  const auto c = log_square_transform(TimeSeries({0.0, 1.0}), 1e-12);
  EXPECT_NEAR(c[0] - c[1], std::log(1e-12), 1e-12);
  EXPECT_TRUE(c.demeaned());
}

TEST(SimulateArma, WhiteNoiseVarianceAndLagOneCorrelation) {
  const auto s = simulate_arma({}, {}, 1.0, 10000, 5);
  const double v = s.stddev() * s.stddev();
  EXPECT_GE(v, 0.94);
  EXPECT_LE(v, 1.06);
  const auto w = simulate_arma({}, {}, 1.0, 100000, 6);
  const double rho1 = lag_autocov(w.values(), 1) / lag_autocov(w.values(), 0);
  EXPECT_LT(std::abs(rho1), 0.01);
}

TEST(SimulateArma, Arma21VarianceMatchesLongRunOracle) {
  const std::vector<double> phi{0.22, -0.1}, theta{0.5};
  const auto oracle = simulate_arma(phi, theta, 1.0, 1000000, 101);
  const auto s = simulate_arma(phi, theta, 1.0, 100000, 202);
  const double g0 = lag_autocov(oracle.values(), 0);
  EXPECT_NEAR(lag_autocov(s.values(), 0) / g0, 1.0, 0.05);
}

TEST(SimulateArma, DeterministicGivenSeed) {
  const std::vector<double> phi{0.22, -0.1}, theta{0.5};
  const auto a = simulate_arma(phi, theta, 1.0, 500, 9);
  const auto b = simulate_arma(phi, theta, 1.0, 500, 9);
  for (std::size_t t = 0; t < a.n_time(); ++t)
    ASSERT_EQ(a[t], b[t]);
}

TEST(SimulateArma, RejectsInvalidInputs) {
  EXPECT_THROW(simulate_arma(std::vector<double>{1.1}, {}, 1.0, 100, 1), Error);
  EXPECT_THROW(simulate_arma({}, {}, 0.0, 100, 1), Error);
}

TEST(DefaultBurnIn, FormulaAndCap) {
  EXPECT_EQ(default_burn_in({}, {}), 10u);
  const std::vector<double> phi{0.5};
  EXPECT_EQ(default_burn_in(phi, {}), 40u);
  const std::vector<double> near_unit{0.99999};
  EXPECT_EQ(default_burn_in(near_unit, {}), 10000u);
}

TEST(SynthesizeGaussian, WhiteNoiseVariance) {
  const auto s = synthesize_gaussian([](double) { return 1.0 / (2.0 * std::numbers::pi); },
                                     1 << 15, 4);
  EXPECT_NEAR(s.stddev() * s.stddev(), 1.0, 0.05);
}
