#ifndef SPECSUB_SPECTRAL_HPP
#define SPECSUB_SPECTRAL_HPP

/** @file
 * Fourier frequencies, the DFT and the periodogram.
 *
 * With the time index running t = 1..n,
 *   J(w) = (2 pi)^{-1/2} sum_t X_t exp(-i w t),   I(w_k) = |J(w_k)|^2 / n.
 * Only the frequencies 2 pi k / n for k = 1..floor((n-1)/2) are kept: the
 * zero frequency carries no information for demeaned data and w = pi (even
 * n) is left out of the likelihood.
 */

#include "specsub/error.hpp"
#include "specsub/fft.hpp"
#include "specsub/numeric.hpp"
#include "specsub/series.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

namespace specsub {

class FrequencyGrid {
public:
  explicit FrequencyGrid(std::size_t n_time) : n_time_(n_time) {
    if (n_time < 4)
      fail(ErrorCategory::domain,
           "Fourier grid needs n_time >= 4, got " + std::to_string(n_time));
    const std::size_t n_freq = (n_time - 1) / 2;
    omegas_.reserve(n_freq);
    for (std::size_t k = 1; k <= n_freq; ++k)
      omegas_.push_back(kTwoPi * static_cast<double>(k) /
                        static_cast<double>(n_time));
  }

  const std::vector<double> &omegas() const { return omegas_; }
  double operator[](std::size_t k) const { return omegas_[k]; }
  std::size_t n_freq() const { return omegas_.size(); }
  std::size_t n_time() const { return n_time_; }

private:
  std::size_t n_time_;
  std::vector<double> omegas_;
};

inline FrequencyGrid fourier_frequencies(std::size_t n_time) {
  return FrequencyGrid(n_time);
}

/// Direct O(n) evaluation of J(omega) with t = 1..n.
inline std::complex<double> dft(const TimeSeries &s, double omega) {
  CompensatedSum re, im;
  const auto x = s.values();
  for (std::size_t t = 1; t <= x.size(); ++t) {
    const double a = omega * static_cast<double>(t);
    re += x[t - 1] * std::cos(a);
    im += -x[t - 1] * std::sin(a);
  }
  return std::complex<double>(re.value(), im.value()) /
         std::sqrt(kTwoPi);
}

class Periodogram {
public:
  Periodogram(FrequencyGrid grid, std::vector<double> ordinates)
      : grid_(std::move(grid)), ordinates_(std::move(ordinates)) {
    if (ordinates_.size() != grid_.n_freq())
      fail(ErrorCategory::domain, "periodogram length does not match grid");
    for (double v : ordinates_)
      if (!(v >= 0.0) || !std::isfinite(v))
        fail(ErrorCategory::numeric, "periodogram ordinate negative or non-finite");
  }

  const FrequencyGrid &grid() const { return grid_; }
  const std::vector<double> &ordinates() const { return ordinates_; }
  std::size_t size() const { return ordinates_.size(); }
  double omega(std::size_t k) const { return grid_[k]; }
  double operator[](std::size_t k) const { return ordinates_[k]; }

private:
  FrequencyGrid grid_;
  std::vector<double> ordinates_;
};

/// FFT of length n_time (no padding), so the output sits exactly on the
/// Fourier grid. Input must be demeaned.
inline Periodogram periodogram(const TimeSeries &s) {
  if (!s.demeaned())
    fail(ErrorCategory::domain, "periodogram requires a demeaned series");
  FrequencyGrid grid(s.n_time());
  const auto y = fft::forward(s.values());
  const double scale = 1.0 / (kTwoPi * static_cast<double>(s.n_time()));
  std::vector<double> ord(grid.n_freq());
  for (std::size_t k = 0; k < ord.size(); ++k)
    ord[k] = std::norm(y[k + 1]) * scale;
  return Periodogram(std::move(grid), std::move(ord));
}

/// Two-column CSV: omega,ordinate.
inline void write_periodogram_csv(const Periodogram &p, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorCategory::io, "cannot write '" + path + "'");
  out << "omega,ordinate\n" << std::setprecision(17);
  for (std::size_t k = 0; k < p.size(); ++k)
    out << p.omega(k) << ',' << p[k] << '\n';
  if (!out)
    fail(ErrorCategory::io, "write to '" + path + "' failed");
}

} // namespace specsub

#endif
