#include "specsub/error.hpp"
#include "specsub/series.hpp"
#include "specsub/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace specsub;

namespace {

// Independent O(n^2) evaluation with plain double accumulation.
double direct_ordinate(const TimeSeries &s, double omega) {
  double re = 0.0, im = 0.0;
  for (std::size_t t = 1; t <= s.n_time(); ++t) {
    re += s[t - 1] * std::cos(omega * static_cast<double>(t));
    im -= s[t - 1] * std::sin(omega * static_cast<double>(t));
  }
  return (re * re + im * im) / (2.0 * std::numbers::pi) / static_cast<double>(s.n_time());
}

TimeSeries random_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  for (auto &v : x)
    v = z(rng);
  return demean(TimeSeries(std::move(x)));
}

} // namespace

TEST(FourierFrequencies, SmallGrid) {
  const auto g = fourier_frequencies(8);
  ASSERT_EQ(g.n_freq(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 2 * std::numbers::pi / 8);
  EXPECT_DOUBLE_EQ(g[2], 6 * std::numbers::pi / 8);
}

TEST(FourierFrequencies, PaperScaleCounts) {
  EXPECT_EQ(fourier_frequencies(44001).n_freq(), 22000u);
  EXPECT_EQ(fourier_frequencies(1000001).n_freq(), 500000u);
  EXPECT_EQ(fourier_frequencies(5).n_freq(), 2u);
  EXPECT_THROW(fourier_frequencies(3), Error);
}

TEST(Dft, ConstantSeriesIsOrthogonal) {
  const TimeSeries c(std::vector<double>(64, 3.0));
  EXPECT_LT(std::abs(dft(c, 2 * std::numbers::pi / 64)), 1e-10 * 3.0 * 64);
}

TEST(Dft, SingleTermSum) {
  const TimeSeries x({1.0, 0.0, 0.0, 0.0});
  const auto j = dft(x, std::numbers::pi / 2);
  const auto expect = std::polar(1.0 / std::sqrt(2 * std::numbers::pi), -std::numbers::pi / 2);
  EXPECT_NEAR(j.real(), expect.real(), 1e-15);
  EXPECT_NEAR(j.imag(), expect.imag(), 1e-15);
}

TEST(Dft, CosineAtGridFrequency) {
  const std::size_t n = 100;
  const double w = 2 * std::numbers::pi * 7 / static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t t = 1; t <= n; ++t)
    x[t - 1] = std::cos(w * static_cast<double>(t));
  const TimeSeries s(x);
  EXPECT_NEAR(std::norm(dft(s, w)) / static_cast<double>(n), direct_ordinate(s, w), 1e-8);
}

TEST(Periodogram, MatchesDirectDft) {
  for (std::size_t n : {5u, 16u, 127u, 128u, 512u}) {
    const auto s = random_series(n, n);
    const auto p = periodogram(s);
    for (std::size_t k = 0; k < p.size(); ++k) {
      EXPECT_NEAR(p[k], direct_ordinate(s, p.omega(k)), 1e-8);
      EXPECT_NEAR(p[k], std::norm(dft(s, p.omega(k))) / static_cast<double>(n), 1e-12);
    }
  }
}

TEST(Periodogram, WhiteNoiseMeanLevel) {
  const auto s = demean(simulate_arma({}, {}, 1.0, 1 << 14, 77));
  const auto p = periodogram(s);
  double mean = 0.0;
  for (double v : p.ordinates())
    mean += v;
  mean /= static_cast<double>(p.size());
  const double f = 1.0 / (2 * std::numbers::pi);
  EXPECT_GE(mean, 0.9 * f);
  EXPECT_LE(mean, 1.1 * f);
}

TEST(Periodogram, ScalesQuadratically) {
  const auto s = random_series(200, 1);
  std::vector<double> y(s.values().begin(), s.values().end());
  for (auto &v : y)
    v *= 3.0;
  const auto p = periodogram(s);
  const auto q = periodogram(TimeSeries(y, true));
  for (std::size_t k = 0; k < p.size(); ++k)
    EXPECT_NEAR(q[k], 9.0 * p[k], 1e-12 * (1.0 + q[k]));
}

TEST(Periodogram, ParsevalOverFullGrid) {
  const std::size_t n = 256;
  const auto s = random_series(n, 8);
  double energy = 0.0;
  for (double v : s.values())
    energy += v * v;
  double spectral = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    spectral += std::norm(dft(s, 2 * std::numbers::pi * static_cast<double>(k) / n));
  EXPECT_NEAR(spectral * 2 * std::numbers::pi / static_cast<double>(n), energy, 1e-6 * energy);
}

TEST(Periodogram, RejectsNonDemeanedInput) {
  EXPECT_THROW(periodogram(TimeSeries({1, 2, 3, 4, 5})), Error);
}

TEST(Periodogram, CsvHasHeaderAndRows) {
  const auto p = periodogram(random_series(11, 2));
  const auto path = std::filesystem::temp_directory_path() / "specsub_pg.csv";
  write_periodogram_csv(p, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "omega,ordinate");
  int rows = 0;
  while (std::getline(in, line))
    ++rows;
  EXPECT_EQ(rows, 5);
}
