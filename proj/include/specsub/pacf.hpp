#ifndef SPECSUB_PACF_HPP
#define SPECSUB_PACF_HPP

// Durbin-Levinson maps between partial autocorrelations and lag-polynomial
// coefficients. A box |pacf_k| < 1 maps onto exactly the stationary region
// of 1 - phi_1 z - ... - phi_q z^q.

#include "specsub/error.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace specsub {

/// phi_j^(k) = phi_j^(k-1) - pacf_k * phi_{k-j}^(k-1), phi_k^(k) = pacf_k.
inline std::vector<double> pacf_to_ar(std::span<const double> pacf) {
  std::vector<double> phi;
  phi.reserve(pacf.size());
  std::vector<double> prev;
  for (std::size_t k = 0; k < pacf.size(); ++k) {
    const double r = pacf[k];
    if (!(std::abs(r) < 1.0))
      fail(ErrorCategory::domain, "partial autocorrelation " +
                                      std::to_string(k + 1) +
                                      " outside (-1, 1)");
    prev = phi;
    for (std::size_t j = 0; j < k; ++j)
      phi[j] = prev[j] - r * prev[k - 1 - j];
    phi.push_back(r);
  }
  return phi;
}

/// Step-down inverse of pacf_to_ar. Throws if the coefficients are not
/// stationary (some partial autocorrelation has modulus >= 1).
inline std::vector<double> ar_to_pacf(std::span<const double> phi) {
  std::vector<double> cur(phi.begin(), phi.end());
  std::vector<double> pacf(cur.size());
  for (std::size_t k = cur.size(); k-- > 0;) {
    const double r = cur[k];
    if (!(std::abs(r) < 1.0))
      fail(ErrorCategory::domain, "lag polynomial has a root on or inside the unit circle");
    pacf[k] = r;
    const double denom = 1.0 - r * r;
    std::vector<double> next(k);
    for (std::size_t j = 0; j < k; ++j)
      next[j] = (cur[j] + r * cur[k - 1 - j]) / denom;
    cur = std::move(next);
  }
  return pacf;
}

inline bool is_stationary(std::span<const double> phi) {
  try {
    (void)ar_to_pacf(phi);
    return true;
  } catch (const Error &) {
    return false;
  }
}

// MA polynomials are written 1 + theta_1 z + ... + theta_p z^p, the opposite
// sign convention from AR. theta = -pacf_to_ar(-r) keeps the order-1 map the
// identity while making |r_k| < 1 equivalent to invertibility.

inline std::vector<double> pacf_to_ma(std::span<const double> pacf) {
  std::vector<double> neg(pacf.begin(), pacf.end());
  for (double &x : neg)
    x = -x;
  std::vector<double> theta = pacf_to_ar(neg);
  for (double &x : theta)
    x = -x;
  return theta;
}

inline std::vector<double> ma_to_pacf(std::span<const double> theta) {
  std::vector<double> neg(theta.begin(), theta.end());
  for (double &x : neg)
    x = -x;
  std::vector<double> pacf = ar_to_pacf(neg);
  for (double &x : pacf)
    x = -x;
  return pacf;
}

} // namespace specsub

#endif
