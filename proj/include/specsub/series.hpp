#ifndef SPECSUB_SERIES_HPP
#define SPECSUB_SERIES_HPP

/** @file
 * Time-series ingestion, demeaning, the stochastic-volatility log-square
 * transform, and Gaussian simulation of ARMA / spectrally specified series.
 *
 * Input data is expected to be stationary already: trend and seasonal
 * components must be removed before loading.
 */

#include "specsub/error.hpp"
#include "specsub/fft.hpp"
#include "specsub/numeric.hpp"
#include "specsub/pacf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace specsub {

/// Real-valued observations. Immutable once built.
class TimeSeries {
public:
  explicit TimeSeries(std::vector<double> values, bool demeaned = false)
      : values_(std::move(values)), demeaned_(demeaned) {
    if (values_.size() < 2)
      fail(ErrorCategory::domain, "time series needs at least 2 values");
  }

  std::span<const double> values() const { return values_; }
  std::size_t n_time() const { return values_.size(); }
  bool demeaned() const { return demeaned_; }
  double operator[](std::size_t t) const { return values_[t]; }

  double mean() const {
    CompensatedSum s;
    for (double x : values_)
      s += x;
    return s.value() / static_cast<double>(values_.size());
  }

  double stddev() const {
    const double mu = mean();
    CompensatedSum s;
    for (double x : values_)
      s += (x - mu) * (x - mu);
    return std::sqrt(s.value() / static_cast<double>(values_.size() - 1));
  }

private:
  std::vector<double> values_;
  bool demeaned_;
};

namespace detail {

inline bool is_delimiter(char c) {
  return c == ',' || c == ';' || c == ' ' || c == '\t' || c == '\r';
}

// Splits on runs of delimiters so "1.0, 2.0" and "1.0\t2.0" both work.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_delimiter(line[i]))
      ++i;
    if (i == line.size())
      break;
    std::size_t j = i;
    while (j < line.size() && !is_delimiter(line[j]))
      ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(std::string_view s, double &out) {
  const auto *first = s.data();
  const auto *last = s.data() + s.size();
  if (first != last && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

} // namespace detail

/// Reads one value per record from `column` (0-based) of a plain or
/// delimited text file. Blank lines and lines starting with '#' are skipped.
/// Errors name the 1-based file line.
inline TimeSeries load_series(const std::string &path, std::size_t column = 0) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCategory::io, "cannot open series file '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    const auto first = sv.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || sv[first] == '#')
      continue;
    const auto fields = detail::split_fields(sv);
    const std::string where = path + ":" + std::to_string(lineno);
    if (column >= fields.size())
      fail(ErrorCategory::parse,
           where + ": line " + std::to_string(lineno) + " has no column " +
               std::to_string(column));
    double x = 0.0;
    if (!detail::parse_double(fields[column], x))
      fail(ErrorCategory::parse, where + ": line " + std::to_string(lineno) +
                                     ": '" + std::string(fields[column]) +
                                     "' is not a number");
    if (!std::isfinite(x))
      fail(ErrorCategory::parse, where + ": line " + std::to_string(lineno) +
                                     ": non-finite value");
    values.push_back(x);
  }
  if (values.size() < 2)
    fail(ErrorCategory::parse,
         path + ": need at least 2 values, found " +
             std::to_string(values.size()));
  return TimeSeries(std::move(values));
}

inline TimeSeries demean(const TimeSeries &s) {
  const double mu = s.mean();
  std::vector<double> out(s.values().begin(), s.values().end());
  for (double &x : out)
    x -= mu;
  return TimeSeries(std::move(out), true);
}

inline constexpr double kDefaultLogSquareFloor = 1e-300;

/// log(max(y_t^2, epsilon)), demeaned. The constant of the log-square
/// representation is absorbed by the demeaning.
inline TimeSeries log_square_transform(const TimeSeries &s,
                                       double epsilon = kDefaultLogSquareFloor) {
  std::vector<double> out;
  out.reserve(s.n_time());
  for (double y : s.values())
    out.push_back(std::log(std::max(y * y, epsilon)));
  return demean(TimeSeries(std::move(out)));
}

/// Largest modulus among the inverse roots of 1 - phi_1 z - ... - phi_q z^q,
/// i.e. the spectral radius of the AR companion matrix.
inline double ar_max_inverse_root(std::span<const double> phi) {
  const auto q = static_cast<Eigen::Index>(phi.size());
  if (q == 0)
    return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index j = 0; j < q; ++j)
    companion(0, j) = phi[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < q; ++i)
    companion(i, i - 1) = 1.0;
  return companion.eigenvalues().cwiseAbs().maxCoeff();
}

/// 10 (p + q + 1) ceil(1 / (1 - max inverse root)), capped at 1e4.
inline std::size_t default_burn_in(std::span<const double> phi,
                                   std::span<const double> theta) {
  const double root = ar_max_inverse_root(phi);
  const double decay = std::ceil(1.0 / std::max(1.0 - root, 1e-12));
  const double b = 10.0 * static_cast<double>(phi.size() + theta.size() + 1) *
                   decay;
  return static_cast<std::size_t>(std::min(b, 1e4));
}

/// X_t = sum phi_i X_{t-i} + e_t + sum theta_j e_{t-j}, e_t ~ N(0, sigma2).
/// The recursion starts from zeros and the first `burn_in` values are
/// dropped. Bit-reproducible for a given seed.
inline TimeSeries simulate_arma(std::span<const double> phi,
                                std::span<const double> theta, double sigma2,
                                std::size_t n, std::uint64_t seed,
                                std::size_t burn_in) {
  if (!(sigma2 > 0.0))
    fail(ErrorCategory::domain, "innovation variance must be positive");
  if (!is_stationary(phi))
    fail(ErrorCategory::domain, "AR coefficients are not stationary");
  const std::size_t q = phi.size();
  const std::size_t p = theta.size();
  const std::size_t total = n + burn_in;
  const double sd = std::sqrt(sigma2);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(total, 0.0);
  std::vector<double> e(total, 0.0);
  for (std::size_t t = 0; t < total; ++t) {
    e[t] = sd * normal(rng);
    double v = e[t];
    for (std::size_t i = 1; i <= q && i <= t; ++i)
      v += phi[i - 1] * x[t - i];
    for (std::size_t j = 1; j <= p && j <= t; ++j)
      v += theta[j - 1] * e[t - j];
    x[t] = v;
  }
  return TimeSeries(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(burn_in), x.end()));
}

inline TimeSeries simulate_arma(std::span<const double> phi,
                                std::span<const double> theta, double sigma2,
                                std::size_t n, std::uint64_t seed) {
  return simulate_arma(phi, theta, sigma2, n, seed,
                       default_burn_in(phi, theta));
}

/// Zero-mean Gaussian series of length n whose DFT ordinates at the Fourier
/// frequencies are independent with E|J(w_k)|^2 / n = f(w_k), i.e. the
/// circulant approximation of a stationary process with spectral density f.
/// Used for models (ARFIMA/ARTFIMA) without a finite recursion.
inline TimeSeries
synthesize_gaussian(const std::function<double(double)> &density,
                    std::size_t n, std::uint64_t seed) {
  if (n < 4)
    fail(ErrorCategory::domain, "synthesis needs n >= 4");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t nc = n / 2 + 1;
  std::vector<std::complex<double>> y(nc);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 1; k < nc; ++k) {
    const double omega = kTwoPi * static_cast<double>(k) / nn;
    const double f = density(omega);
    if (!(f > 0.0) || !std::isfinite(f))
      fail(ErrorCategory::numeric, "spectral density not positive and finite");
    if (2 * k == n) {
      y[k] = {std::sqrt(kTwoPi * nn * f) * normal(rng), 0.0};
    } else {
      const double scale = std::sqrt(kTwoPi * nn * f / 2.0);
      const double re = normal(rng);
      const double im = normal(rng);
      y[k] = {scale * re, scale * im};
    }
  }
  std::vector<double> x = fft::inverse(y, n);
  for (double &v : x)
    v /= nn;
  return TimeSeries(std::move(x));
}

} // namespace specsub

#endif
