#ifndef SPECSUB_MODELS_HPP
#define SPECSUB_MODELS_HPP

/** @file
 * Parametric spectral densities for the ARMA / ARFIMA / ARTFIMA family and an
 * optional stochastic-volatility noise floor, together with the unconstrained
 * parameterization used by the samplers and the matching log-prior.
 *
 * Unconstrained vector layout, in order:
 *   atanh of the AR partial autocorrelations     (ar_order entries)
 *   atanh of the MA partial autocorrelations     (ma_order entries)
 *   atanh(2d) for ARFIMA, or d for ARTFIMA       (1 entry if fractional)
 *   log lambda                                   (ARTFIMA only)
 *   log sigma^2
 *   log sigma_eps^2                              (SV wrapper only)
 *
 * The spectral density is
 *   f(w) = sigma^2 / (2 pi) |1 - exp(-(lambda + i w))|^{-2d}
 *          |theta(e^{-iw})|^2 / |phi(e^{-iw})|^2  [+ sigma_eps^2 / (2 pi)]
 * with phi(z) = 1 - sum phi_j z^j and theta(z) = 1 + sum theta_j z^j.
 */

#include "specsub/error.hpp"
#include "specsub/numeric.hpp"
#include "specsub/pacf.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace specsub {

using ParamVector = Eigen::VectorXd;

enum class Fractional { none, arfima, artfima };

inline const char *fractional_name(Fractional f) {
  switch (f) {
  case Fractional::none:
    return "none";
  case Fractional::arfima:
    return "arfima";
  case Fractional::artfima:
    return "artfima";
  }
  return "none";
}

struct GaussianPrior {
  double mean = 0.0;
  double variance = 1.0;

  double log_density(double x) const {
    const double z = x - mean;
    return -0.5 * (kLogTwoPi + std::log(variance)) - 0.5 * z * z / variance;
  }
  bool operator==(const GaussianPrior &) const = default;
};

/// Gaussian priors on the transformed coordinates. The partial
/// autocorrelations are always Uniform(-1, 1).
struct PriorSpec {
  GaussianPrior d{0.0, 1.0};
  GaussianPrior log_lambda{0.0, 1.0};
  GaussianPrior log_sigma2{0.0, 1.0};
  GaussianPrior log_sigma2_eps{0.0, 0.01};
  bool operator==(const PriorSpec &) const = default;
};

struct ModelSpec {
  std::size_t ar_order = 0;
  std::size_t ma_order = 0;
  Fractional fractional = Fractional::none;
  bool sv_wrapper = false;
  PriorSpec prior{};

  bool operator==(const ModelSpec &) const = default;

  std::size_t d_index() const { return ar_order + ma_order; }
  std::size_t lambda_index() const {
    return d_index() + (fractional != Fractional::none ? 1 : 0);
  }
  std::size_t sigma2_index() const {
    return lambda_index() + (fractional == Fractional::artfima ? 1 : 0);
  }
  std::size_t sigma2_eps_index() const { return sigma2_index() + 1; }
  std::size_t dim() const { return sigma2_index() + 1 + (sv_wrapper ? 1 : 0); }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= ar_order; ++j)
      names.push_back("phi_tilde" + std::to_string(j));
    for (std::size_t j = 1; j <= ma_order; ++j)
      names.push_back("theta_tilde" + std::to_string(j));
    if (fractional == Fractional::arfima)
      names.emplace_back("d_tilde");
    if (fractional == Fractional::artfima) {
      names.emplace_back("d");
      names.emplace_back("log_lambda");
    }
    names.emplace_back("log_sigma2");
    if (sv_wrapper)
      names.emplace_back("log_sigma2_eps");
    return names;
  }

  std::vector<std::string> natural_names() const {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= ar_order; ++j)
      names.push_back("phi" + std::to_string(j));
    for (std::size_t j = 1; j <= ma_order; ++j)
      names.push_back("theta" + std::to_string(j));
    if (fractional != Fractional::none)
      names.emplace_back("d");
    if (fractional == Fractional::artfima)
      names.emplace_back("lambda");
    names.emplace_back("sigma2");
    if (sv_wrapper)
      names.emplace_back("sigma2_eps");
    return names;
  }
};

struct NaturalParams {
  std::vector<double> phi;
  std::vector<double> theta;
  double d = 0.0;
  std::optional<double> lambda;
  double sigma2 = 1.0;
  std::optional<double> sigma2_eps;

  /// Flat vector in the order of ModelSpec::natural_names.
  std::vector<double> flatten(const ModelSpec &spec) const {
    std::vector<double> out(phi.begin(), phi.end());
    out.insert(out.end(), theta.begin(), theta.end());
    if (spec.fractional != Fractional::none)
      out.push_back(d);
    if (spec.fractional == Fractional::artfima)
      out.push_back(lambda.value_or(0.0));
    out.push_back(sigma2);
    if (spec.sv_wrapper)
      out.push_back(sigma2_eps.value_or(0.0));
    return out;
  }
};

inline void check_length(const ModelSpec &spec, const ParamVector &v) {
  if (static_cast<std::size_t>(v.size()) != spec.dim())
    fail(ErrorCategory::domain,
         "parameter vector has length " + std::to_string(v.size()) +
             ", model expects " + std::to_string(spec.dim()));
}

inline NaturalParams to_natural(const ModelSpec &spec, const ParamVector &v) {
  check_length(spec, v);
  NaturalParams out;
  std::vector<double> r(spec.ar_order);
  for (std::size_t j = 0; j < spec.ar_order; ++j)
    r[j] = std::tanh(v[static_cast<Eigen::Index>(j)]);
  out.phi = pacf_to_ar(r);
  r.assign(spec.ma_order, 0.0);
  for (std::size_t j = 0; j < spec.ma_order; ++j)
    r[j] = std::tanh(v[static_cast<Eigen::Index>(spec.ar_order + j)]);
  out.theta = pacf_to_ma(r);
  const auto di = static_cast<Eigen::Index>(spec.d_index());
  if (spec.fractional == Fractional::arfima)
    out.d = 0.5 * std::tanh(v[di]);
  else if (spec.fractional == Fractional::artfima) {
    out.d = v[di];
    out.lambda = std::exp(v[static_cast<Eigen::Index>(spec.lambda_index())]);
  }
  out.sigma2 = std::exp(v[static_cast<Eigen::Index>(spec.sigma2_index())]);
  if (spec.sv_wrapper)
    out.sigma2_eps =
        std::exp(v[static_cast<Eigen::Index>(spec.sigma2_eps_index())]);
  return out;
}

inline ParamVector from_natural(const ModelSpec &spec, const NaturalParams &p) {
  if (p.phi.size() != spec.ar_order || p.theta.size() != spec.ma_order)
    fail(ErrorCategory::domain, "natural parameters do not match model orders");
  ParamVector v(static_cast<Eigen::Index>(spec.dim()));
  const auto rphi = ar_to_pacf(p.phi);
  const auto rtheta = ma_to_pacf(p.theta);
  for (std::size_t j = 0; j < spec.ar_order; ++j)
    v[static_cast<Eigen::Index>(j)] = std::atanh(rphi[j]);
  for (std::size_t j = 0; j < spec.ma_order; ++j)
    v[static_cast<Eigen::Index>(spec.ar_order + j)] = std::atanh(rtheta[j]);
  const auto di = static_cast<Eigen::Index>(spec.d_index());
  if (spec.fractional == Fractional::arfima) {
    if (!(std::abs(p.d) < 0.5))
      fail(ErrorCategory::domain, "ARFIMA d must lie in (-0.5, 0.5)");
    v[di] = std::atanh(2.0 * p.d);
  } else if (spec.fractional == Fractional::artfima) {
    if (!p.lambda || !(*p.lambda > 0.0))
      fail(ErrorCategory::domain, "ARTFIMA needs lambda > 0");
    v[di] = p.d;
    v[static_cast<Eigen::Index>(spec.lambda_index())] = std::log(*p.lambda);
  }
  if (!(p.sigma2 > 0.0))
    fail(ErrorCategory::domain, "sigma2 must be positive");
  v[static_cast<Eigen::Index>(spec.sigma2_index())] = std::log(p.sigma2);
  if (spec.sv_wrapper) {
    if (!p.sigma2_eps || !(*p.sigma2_eps > 0.0))
      fail(ErrorCategory::domain, "SV model needs sigma2_eps > 0");
    v[static_cast<Eigen::Index>(spec.sigma2_eps_index())] =
        std::log(*p.sigma2_eps);
  }
  return v;
}

/// A frequency with its trigonometric values cached. `half_sin_sq` is
/// sin^2(w/2), which keeps |1 - e^{-iw}|^2 accurate near w = 0.
struct FrequencyPoint {
  double omega = 0.0;
  double cos_omega = 1.0;
  double sin_omega = 0.0;
  double half_sin_sq = 0.0;

  static FrequencyPoint at(double omega) {
    const double h = std::sin(0.5 * omega);
    return {omega, std::cos(omega), std::sin(omega), h * h};
  }
};

/// Spectral density with all parameter-dependent constants precomputed;
/// evaluating at a FrequencyPoint is a handful of flops plus two logs.
class SpectralDensity {
public:
  SpectralDensity(const ModelSpec &spec, const NaturalParams &p)
      : phi_(p.phi), theta_(p.theta),
        fractional_(spec.fractional != Fractional::none), d_(p.d),
        log_scale_(std::log(p.sigma2) - kLogTwoPi) {
    if (!(p.sigma2 > 0.0))
      fail(ErrorCategory::domain, "sigma2 must be positive");
    if (spec.fractional == Fractional::artfima) {
      const double lambda = p.lambda.value_or(0.0);
      if (!(lambda > 0.0))
        fail(ErrorCategory::domain, "ARTFIMA needs lambda > 0");
      decay_ = std::exp(-lambda);
      one_minus_decay_ = -std::expm1(-lambda);
    }
    if (spec.sv_wrapper) {
      const double s2e = p.sigma2_eps.value_or(0.0);
      if (!(s2e > 0.0))
        fail(ErrorCategory::domain, "SV model needs sigma2_eps > 0");
      log_noise_floor_ = std::log(s2e) - kLogTwoPi;
    }
  }

  SpectralDensity(const ModelSpec &spec, const ParamVector &v)
      : SpectralDensity(spec, to_natural(spec, v)) {}

  double log_density(const FrequencyPoint &w) const {
    double lf = log_scale_;
    if (fractional_ && d_ != 0.0) {
      // |1 - a e^{-iw}|^2 = (1 - a)^2 + 4 a sin^2(w/2), a = e^{-lambda}
      const double base = one_minus_decay_ * one_minus_decay_ +
                          4.0 * decay_ * w.half_sin_sq;
      lf -= d_ * std::log(base);
    }
    if (!phi_.empty() || !theta_.empty()) {
      const std::complex<double> z(w.cos_omega, -w.sin_omega);
      const double num = theta_.empty() ? 1.0 : std::norm(horner(theta_, z, 1.0));
      const double den = phi_.empty() ? 1.0 : std::norm(horner(phi_, z, -1.0));
      lf += std::log(num / den);
    }
    if (log_noise_floor_)
      lf = log_add_exp(lf, *log_noise_floor_);
    return lf;
  }

  double log_density(double omega) const {
    check_omega(omega);
    return log_density(FrequencyPoint::at(omega));
  }

  double operator()(double omega) const { return std::exp(log_density(omega)); }

private:
  static void check_omega(double omega) {
    if (!(omega > 0.0 && omega < std::numbers::pi))
      fail(ErrorCategory::domain, "frequency must lie in (0, pi)");
  }

  // 1 + sign * sum c_j z^j
  static std::complex<double> horner(const std::vector<double> &c,
                                     std::complex<double> z, double sign) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;)
      acc = (acc + sign * c[j]) * z;
    return 1.0 + acc;
  }

  std::vector<double> phi_;
  std::vector<double> theta_;
  bool fractional_;
  double d_;
  double log_scale_;
  double decay_ = 1.0;           // e^{-lambda}; 1 for ARFIMA
  double one_minus_decay_ = 0.0; // 1 - e^{-lambda}
  std::optional<double> log_noise_floor_;
};

inline double spectral_density(const ModelSpec &spec, const NaturalParams &p,
                               double omega) {
  return SpectralDensity(spec, p)(omega);
}

namespace detail {
// log(1 - tanh(x)^2) = -2 log cosh x, stable for large |x|.
inline double log_tanh_jacobian(double x) {
  const double a = std::abs(x);
  return -2.0 * (a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2);
}
} // namespace detail

/// Log prior density in the unconstrained coordinates. Uniform(-1, 1) on each
/// partial autocorrelation picks up the tanh Jacobian; the Gaussian priors
/// are stated directly on the transformed coordinates.
inline double log_prior(const ModelSpec &spec, const ParamVector &v) {
  check_length(spec, v);
  double lp = 0.0;
  const std::size_t n_pacf = spec.ar_order + spec.ma_order;
  for (std::size_t j = 0; j < n_pacf; ++j)
    lp += -std::numbers::ln2 +
          detail::log_tanh_jacobian(v[static_cast<Eigen::Index>(j)]);
  const auto at = [&](std::size_t i) { return v[static_cast<Eigen::Index>(i)]; };
  if (spec.fractional != Fractional::none)
    lp += spec.prior.d.log_density(at(spec.d_index()));
  if (spec.fractional == Fractional::artfima)
    lp += spec.prior.log_lambda.log_density(at(spec.lambda_index()));
  lp += spec.prior.log_sigma2.log_density(at(spec.sigma2_index()));
  if (spec.sv_wrapper)
    lp += spec.prior.log_sigma2_eps.log_density(at(spec.sigma2_eps_index()));
  return lp;
}

} // namespace specsub

#endif
