#ifndef SPECSUB_DIAGNOSTICS_HPP
#define SPECSUB_DIAGNOSTICS_HPP

/** @file
 * Chain post-processing: inefficiency factors, computational time (CT =
 * IF x density evaluations per iteration) and its ratio against a baseline,
 * Gaussian KDE grids, and posterior-mean log spectra.
 */

#include "specsub/error.hpp"
#include "specsub/fft.hpp"
#include "specsub/models.hpp"
#include "specsub/numeric.hpp"
#include "specsub/sampler.hpp"
#include "specsub/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace specsub {

/// Sample autocorrelations rho_0..rho_{n-1} (biased normalization) via FFT.
inline std::vector<double> autocorrelation(std::span<const double> x) {
  const std::size_t n = x.size();
  CompensatedSum s;
  for (double v : x)
    s += v;
  const double mean = s.value() / static_cast<double>(n);
  std::size_t len = 1;
  while (len < 2 * n)
    len <<= 1;
  std::vector<double> padded(len, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    padded[t] = x[t] - mean;
  auto y = fft::forward(padded);
  for (auto &c : y)
    c = std::norm(c);
  const std::vector<double> acov = fft::inverse(y, len);
  std::vector<double> rho(n);
  const double c0 = acov[0];
  for (std::size_t k = 0; k < n; ++k)
    rho[k] = acov[k] / c0;
  return rho;
}

/// IF = 1 + 2 sum_k rho_k, truncated by Geyer's initial positive sequence:
/// pairs rho_{2m} + rho_{2m+1} are summed while they stay positive.
inline double inefficiency_factor(std::span<const double> chain) {
  if (chain.size() < 100)
    fail(ErrorCategory::domain, "inefficiency factor needs at least 100 draws");
  const auto [lo, hi] = std::minmax_element(chain.begin(), chain.end());
  if (*lo == *hi)
    fail(ErrorCategory::domain, "inefficiency factor of a constant chain");
  const std::vector<double> rho = autocorrelation(chain);
  double sum = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < rho.size(); ++m) {
    const double pair = rho[2 * m] + rho[2 * m + 1];
    if (!(pair > 0.0))
      break;
    sum += pair;
  }
  return -1.0 + 2.0 * sum;
}

struct EfficiencyReport {
  std::vector<std::string> parameters;
  std::vector<double> inefficiency;
  double density_evals = 0.0; // per iteration
  std::vector<double> computational_time;
};

inline EfficiencyReport efficiency_report(const std::vector<std::string> &names,
                                          const Eigen::MatrixXd &draws,
                                          double density_evals_per_iteration) {
  if (static_cast<std::size_t>(draws.cols()) != names.size())
    fail(ErrorCategory::domain, "parameter names do not match draw columns");
  EfficiencyReport r;
  r.parameters = names;
  r.density_evals = density_evals_per_iteration;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    const Eigen::VectorXd col = draws.col(j);
    const double f = inefficiency_factor(std::span<const double>(col.data(), col.size()));
    r.inefficiency.push_back(f);
    r.computational_time.push_back(f * density_evals_per_iteration);
  }
  return r;
}

inline EfficiencyReport efficiency_report(const std::vector<std::string> &names,
                                          const ChainOutput &chain) {
  return efficiency_report(names, chain.draws, chain.evals_per_iteration());
}

/// RCT_j = CT_baseline,j / CT_subsample,j; above 1 favours the subsampler.
inline std::vector<double> relative_ct(const EfficiencyReport &subsample,
                                       const EfficiencyReport &baseline) {
  if (subsample.parameters != baseline.parameters)
    fail(ErrorCategory::domain, "efficiency reports cover different parameters");
  std::vector<double> out;
  for (std::size_t j = 0; j < subsample.parameters.size(); ++j)
    out.push_back(baseline.computational_time[j] / subsample.computational_time[j]);
  return out;
}

struct KdeGrid {
  std::vector<double> x;
  std::vector<double> density;
};

/// Gaussian-kernel density on `grid_size` points spanning mean +- 4 sd, with
/// Silverman's bandwidth 1.06 sd N^{-1/5}.
inline KdeGrid kde_grid(std::span<const double> draws, std::size_t grid_size = 256) {
  const std::size_t n = draws.size();
  if (n < 100)
    fail(ErrorCategory::domain, "KDE needs at least 100 draws");
  if (grid_size < 2)
    fail(ErrorCategory::domain, "KDE grid needs at least 2 points");
  CompensatedSum s;
  for (double v : draws)
    s += v;
  const double mean = s.value() / static_cast<double>(n);
  CompensatedSum ss;
  for (double v : draws)
    ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss.value() / static_cast<double>(n - 1));
  if (!(sd > 0.0))
    fail(ErrorCategory::domain, "KDE of degenerate (constant) draws");
  const double bw = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);

  KdeGrid out;
  out.x.resize(grid_size);
  out.density.assign(grid_size, 0.0);
  const double lo = mean - 4.0 * sd;
  const double step = 8.0 * sd / static_cast<double>(grid_size - 1);
  for (std::size_t g = 0; g < grid_size; ++g)
    out.x[g] = lo + step * static_cast<double>(g);
  const double norm = 1.0 / (static_cast<double>(n) * bw * std::sqrt(kTwoPi));
  for (std::size_t g = 0; g < grid_size; ++g) {
    CompensatedSum acc;
    for (double v : draws) {
      const double z = (out.x[g] - v) / bw;
      acc += std::exp(-0.5 * z * z);
    }
    out.density[g] = acc.value() * norm;
  }
  return out;
}

/// Mean over draws (rows, unconstrained) of log f_theta(w_k) at each grid
/// frequency.
inline std::vector<double> posterior_mean_spectrum(const Eigen::MatrixXd &draws,
                                                   const ModelSpec &spec,
                                                   const FrequencyGrid &grid) {
  if (draws.rows() == 0)
    fail(ErrorCategory::domain, "no draws for the posterior-mean spectrum");
  std::vector<FrequencyPoint> pts;
  pts.reserve(grid.n_freq());
  for (double w : grid.omegas())
    pts.push_back(FrequencyPoint::at(w));
  std::vector<CompensatedSum> acc(pts.size());
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    const SpectralDensity f(spec, Eigen::VectorXd(draws.row(r).transpose()));
    for (std::size_t k = 0; k < pts.size(); ++k)
      acc[k] += f.log_density(pts[k]);
  }
  std::vector<double> out(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k)
    out[k] = acc[k].value() / static_cast<double>(draws.rows());
  return out;
}

inline std::vector<double> posterior_mean_spectrum(const ChainOutput &chain,
                                                   const ModelSpec &spec,
                                                   const FrequencyGrid &grid) {
  return posterior_mean_spectrum(chain.draws, spec, grid);
}

/// Column means and standard deviations of a draw matrix.
struct MarginalSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

inline MarginalSummary summarize(const Eigen::MatrixXd &draws) {
  MarginalSummary s;
  s.mean = draws.colwise().mean().transpose();
  const Eigen::MatrixXd centered = draws.rowwise() - s.mean.transpose();
  s.sd = (centered.colwise().squaredNorm() / static_cast<double>(draws.rows() - 1))
             .cwiseSqrt()
             .transpose();
  return s;
}

/// Draws mapped row-wise to natural parameters (order of natural_names()).
inline Eigen::MatrixXd natural_draws(const Eigen::MatrixXd &draws,
                                     const ModelSpec &spec) {
  Eigen::MatrixXd out(draws.rows(), draws.cols());
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    const auto flat = to_natural(spec, Eigen::VectorXd(draws.row(r).transpose())).flatten(spec);
    for (std::size_t j = 0; j < flat.size(); ++j)
      out(r, static_cast<Eigen::Index>(j)) = flat[j];
  }
  return out;
}

} // namespace specsub

#endif
