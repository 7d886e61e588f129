#ifndef SPECSUB_SAMPLER_HPP
#define SPECSUB_SAMPLER_HPP

/** @file
 * Posterior mode finding, the (grouped) difference estimator of the
 * log-likelihood, and the two random-walk Metropolis samplers: full-data and
 * block pseudo-marginal subsampling.
 *
 * Randomness: the proposal increments and the accept/reject uniforms come
 * from derive_seed(seed, "proposal"); the subsample indicators from
 * derive_seed(seed, "subsample"). A full-data chain and a subsampling chain
 * with the same seed therefore see identical proposals.
 */

#include "specsub/control_variates.hpp"
#include "specsub/error.hpp"
#include "specsub/numeric.hpp"
#include "specsub/target.hpp"
#include "specsub/whittle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace specsub {

using LogDensityFn = std::function<double(const Eigen::VectorXd &)>;

// ---------------------------------------------------------------------------
// Mode finding

struct ModeResult {
  Eigen::VectorXd mode;
  /// -Hessian of the log posterior at the mode (positive definite).
  Eigen::MatrixXd neg_hessian;
  double log_posterior = 0.0;
  std::size_t iterations = 0;

  Eigen::MatrixXd covariance() const {
    Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
    const Eigen::MatrixXd cov =
        llt.solve(Eigen::MatrixXd::Identity(mode.size(), mode.size()));
    return 0.5 * (cov + cov.transpose());
  }
};

struct ModeOptions {
  std::size_t max_iterations = 1000;
  double gradient_tolerance = 1e-5; // relative to 1 + |log posterior|
};

/// BFGS ascent with central-difference gradients, followed by Newton
/// polishing with a finite-difference Hessian. Exits when
/// |grad| < tol * (1 + |log posterior|).
inline ModeResult find_mode(const LogDensityFn &log_posterior,
                            const Eigen::VectorXd &v0,
                            const ModeOptions &opts = {}) {
  if (!v0.allFinite())
    fail(ErrorCategory::domain, "starting point must be finite");
  const auto objective = [&](const Eigen::VectorXd &x) {
    const double v = -log_posterior(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  const auto converged = [&](const Eigen::VectorXd &g, double f) {
    return g.norm() < opts.gradient_tolerance * (1.0 + std::abs(f));
  };

  const Eigen::Index d = v0.size();
  Eigen::VectorXd x = v0;
  double fx = objective(x);
  if (!std::isfinite(fx))
    fail(ErrorCategory::numeric, "log posterior is not finite at the start");
  Eigen::VectorXd g = fd_gradient(objective, x);

  ModeResult out;
  std::size_t it = 0;
  bool done = converged(g, fx);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(d, d);
  bool scaled = false;
  while (!done && it < opts.max_iterations) {
    ++it;
    Eigen::VectorXd p = -hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      scaled = false;
      p = -g;
      slope = g.dot(p);
    }
    if (!scaled) {
      // Unit-length first step; later steps take BFGS scaling.
      const double pn = p.norm();
      if (pn > 1.0) {
        p /= pn;
        slope /= pn;
      }
    }
    double t = 1.0;
    double fnew = objective(x + t * p);
    while (!(fnew <= fx + 1e-4 * t * slope) && t > 1e-14) {
      t *= 0.5;
      fnew = objective(x + t * p);
    }
    if (!(fnew <= fx))
      break; // no descent possible at finite-difference resolution
    const Eigen::VectorXd s = t * p;
    x += s;
    const Eigen::VectorXd gnew = fd_gradient(objective, x);
    const Eigen::VectorXd y = gnew - g;
    fx = fnew;
    g = gnew;
    const double ys = y.dot(s);
    if (ys > 1e-12 * y.norm() * s.norm()) {
      if (!scaled) {
        hinv = Eigen::MatrixXd::Identity(d, d) * (ys / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / ys;
      const Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(d, d) - rho * s * y.transpose();
      hinv = left * hinv * left.transpose() + rho * s * s.transpose();
    }
    done = converged(g, fx);
  }

  // Newton polishing; also yields the curvature.
  Expansion e = fd_expansion(objective, x);
  for (int k = 0; k < 5 && !converged(e.gradient, e.value); ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(e.hessian);
    if (llt.info() != Eigen::Success)
      break;
    const Eigen::VectorXd step = -llt.solve(e.gradient);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Eigen::VectorXd xn = x + t * step;
      if (objective(xn) <= e.value) {
        x = xn;
        moved = true;
        break;
      }
    }
    if (!moved)
      break;
    ++it;
    e = fd_expansion(objective, x);
  }
  if (!converged(e.gradient, e.value))
    fail(ErrorCategory::numeric,
         "mode search did not converge (gradient norm " +
             std::to_string(e.gradient.norm()) + " after " +
             std::to_string(it) + " iterations)");
  Eigen::LLT<Eigen::MatrixXd> llt(e.hessian);
  if (llt.info() != Eigen::Success)
    fail(ErrorCategory::numeric,
         "curvature at the mode is not positive definite");
  out.mode = x;
  out.neg_hessian = e.hessian;
  out.log_posterior = -e.value;
  out.iterations = it;
  return out;
}

/// Mode of the Whittle posterior (likelihood plus the model's prior).
inline ModeResult find_mode(const WhittleData &data, const Eigen::VectorXd &v0,
                            const ModeOptions &opts = {}) {
  return find_mode(
      [&](const Eigen::VectorXd &v) {
        return full_loglik(data, v) + data.log_prior(v);
      },
      v0, opts);
}

/// Starting point for mode search: every coordinate 0 except log sigma^2,
/// which matches the white-noise level of the periodogram.
inline Eigen::VectorXd default_start(const WhittleData &data) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.dim()));
  CompensatedSum s;
  for (double i : data.periodogram().ordinates())
    s += i;
  const double mean_i = s.value() / static_cast<double>(data.size());
  const auto &spec = data.spec();
  double level = kTwoPi * mean_i;
  if (spec.sv_wrapper)
    level *= 0.5; // split between signal and noise floor
  v[static_cast<Eigen::Index>(spec.sigma2_index())] = std::log(std::max(level, 1e-300));
  if (spec.sv_wrapper)
    v[static_cast<Eigen::Index>(spec.sigma2_eps_index())] =
        std::log(std::max(level, 1e-300));
  return v;
}

// ---------------------------------------------------------------------------
// Subsample indicators

/// m group indices u_1..u_m split into B contiguous blocks whose sizes
/// differ by at most one (blocks may be empty when m < B).
class SubsampleIndicators {
public:
  SubsampleIndicators(std::vector<std::uint32_t> entries, std::size_t group_count,
                      std::size_t blocks)
      : entries_(std::move(entries)), group_count_(group_count), blocks_(blocks) {
    if (blocks_ < 1)
      fail(ErrorCategory::domain, "need at least one block");
    if (entries_.empty())
      fail(ErrorCategory::domain, "subsample must be non-empty");
    for (auto u : entries_)
      if (u >= group_count_)
        fail(ErrorCategory::domain, "subsample indicator out of range");
  }

  template <class Rng>
  static SubsampleIndicators draw(std::size_t group_count, std::size_t m,
                                  std::size_t blocks, Rng &rng) {
    std::uniform_int_distribution<std::uint32_t> pick(
        0, static_cast<std::uint32_t>(group_count - 1));
    std::vector<std::uint32_t> u(m);
    for (auto &x : u)
      x = pick(rng);
    return SubsampleIndicators(std::move(u), group_count, blocks);
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t blocks() const { return blocks_; }
  std::size_t group_count() const { return group_count_; }
  const std::vector<std::uint32_t> &entries() const { return entries_; }
  std::uint32_t operator[](std::size_t i) const { return entries_[i]; }
  std::size_t block_begin(std::size_t b) const { return b * size() / blocks_; }
  std::size_t block_end(std::size_t b) const { return (b + 1) * size() / blocks_; }

  std::vector<std::uint32_t> &mutable_entries() { return entries_; }

  bool operator==(const SubsampleIndicators &) const = default;

private:
  std::vector<std::uint32_t> entries_;
  std::size_t group_count_;
  std::size_t blocks_;
};

/// Redraws block b iid uniform over the groups; other blocks untouched.
template <class Rng>
SubsampleIndicators block_refresh(const SubsampleIndicators &u, std::size_t b,
                                  Rng &rng) {
  if (b >= u.blocks())
    fail(ErrorCategory::domain, "block index out of range");
  SubsampleIndicators out = u;
  std::uniform_int_distribution<std::uint32_t> pick(
      0, static_cast<std::uint32_t>(u.group_count() - 1));
  auto &e = out.mutable_entries();
  for (std::size_t i = u.block_begin(b); i < u.block_end(b); ++i)
    e[i] = pick(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Difference estimator

struct LogLikEstimate {
  double ell_hat = 0.0;
  double sigma2_hat = 0.0;
  std::uint64_t density_evals = 0;
};

/// ell_hat = sum_k q_k(v) + (G/m) sum_i d_i with d_i = l_{G_{u_i}}(v) -
/// q_{G_{u_i}}(v); sigma2_hat = G^2 s_d^2 / m. With no control variate q = 0
/// (the naive estimator).
template <TermTarget T>
LogLikEstimate diff_estimator(const T &target, const GroupIndex &groups,
                              const ControlVariate &cv, const Eigen::VectorXd &v,
                              const SubsampleIndicators &u) {
  if (u.group_count() != groups.count())
    fail(ErrorCategory::domain, "indicators and grouping disagree on group count");
  const auto ev = target.bind(v);
  LogLikEstimate out;
  double q_total = 0.0;
  if (const auto *taylor = std::get_if<TaylorCV>(&cv)) {
    q_total = taylor->total(v);
  } else if (const auto *coreset = std::get_if<CoresetCV>(&cv)) {
    q_total = coreset->total(ev);
    out.density_evals += coreset->total_atoms();
  }

  const std::size_t m = u.size();
  std::vector<double> diffs(m);
  std::vector<double> cell_values;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = u[i];
    const auto &cell = groups.cells()[k];
    cell_values.resize(cell.size());
    CompensatedSum lg;
    for (std::size_t j = 0; j < cell.size(); ++j) {
      cell_values[j] = ev.term(cell[j]);
      lg += cell_values[j];
    }
    out.density_evals += cell.size();
    double q = 0.0;
    if (const auto *taylor = std::get_if<TaylorCV>(&cv))
      q = taylor->eval(v, k);
    else if (const auto *coreset = std::get_if<CoresetCV>(&cv))
      q = coreset->eval_from_cell_values(k, cell_values);
    diffs[i] = lg.value() - q;
  }

  CompensatedSum dsum;
  for (double x : diffs)
    dsum += x;
  const double mean_d = dsum.value() / static_cast<double>(m);
  const double g = static_cast<double>(groups.count());
  out.ell_hat = q_total + g * mean_d;
  if (m > 1) {
    CompensatedSum ss;
    for (double x : diffs)
      ss += (x - mean_d) * (x - mean_d);
    const double s2 = ss.value() / static_cast<double>(m - 1);
    out.sigma2_hat = g * g * s2 / static_cast<double>(m);
  }
  return out;
}

/// Log of the bias-corrected likelihood estimate, ell_hat - sigma2_hat / 2.
inline double debias(const LogLikEstimate &e) { return e.ell_hat - 0.5 * e.sigma2_hat; }

// ---------------------------------------------------------------------------
// Chains

struct ChainSettings {
  std::size_t iterations = 50000; // kept draws
  std::size_t burn_in = 5000;
  std::size_t blocks = 10;
  std::size_t m = 10;             // sampled groups per estimate
  std::optional<double> proposal_scale; // default 2.38^2 / dim
  std::uint64_t seed = 1;
  /// Keeps u fixed (no block refresh); used to pin the subsample in tests.
  std::optional<SubsampleIndicators> fixed_indicators;
};

struct ChainInit {
  Eigen::VectorXd mode;
  Eigen::MatrixXd covariance; // proposal covariance before scaling
};

inline ChainInit chain_init(const ModeResult &mode) {
  return {mode.mode, mode.covariance()};
}

struct ChainOutput {
  Eigen::MatrixXd draws;           // kept iterations x dim, unconstrained
  std::vector<double> ell_hat;     // log-likelihood estimate of the kept states
  std::vector<bool> accepted;      // one entry per iteration incl. burn-in
  double acceptance_rate = 0.0;
  std::uint64_t density_evals = 0; // sampling phase, incl. burn-in
  std::uint64_t setup_density_evals = 0;
  std::size_t total_iterations = 0;

  double evals_per_iteration() const {
    return total_iterations == 0
               ? 0.0
               : static_cast<double>(density_evals) /
                     static_cast<double>(total_iterations);
  }
};

namespace detail {

struct ProposalKernel {
  ProposalKernel(const ChainInit &init, const ChainSettings &settings)
      : rng(derive_seed(settings.seed, "proposal")) {
    const auto d = init.mode.size();
    if (init.covariance.rows() != d || init.covariance.cols() != d)
      fail(ErrorCategory::domain, "proposal covariance dimension mismatch");
    const double c = settings.proposal_scale.value_or(
        2.38 * 2.38 / static_cast<double>(d));
    if (!(c > 0.0))
      fail(ErrorCategory::domain, "proposal scale must be positive");
    Eigen::LLT<Eigen::MatrixXd> llt(c * init.covariance);
    if (llt.info() != Eigen::Success)
      fail(ErrorCategory::numeric, "proposal covariance not positive definite");
    chol = llt.matrixL();
  }

  Eigen::VectorXd propose(const Eigen::VectorXd &x) {
    Eigen::VectorXd z(x.size());
    for (Eigen::Index j = 0; j < z.size(); ++j)
      z[j] = normal(rng);
    return x + chol * z;
  }

  double log_uniform() { return std::log(uniform(rng)); }

  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uniform_real_distribution<double> uniform{0.0, 1.0};
  Eigen::MatrixXd chol;
};

inline void check_settings(const ChainSettings &s) {
  if (s.iterations == 0)
    fail(ErrorCategory::domain, "need at least one kept iteration");
}

} // namespace detail

/// Random-walk Metropolis on the exact (full-data) log-likelihood. Each
/// iteration costs target.size() term evaluations.
template <TermTarget T>
ChainOutput run_full_chain(const T &target, const LogDensityFn &log_prior,
                           const ChainSettings &settings, const ChainInit &init) {
  detail::check_settings(settings);
  detail::ProposalKernel kernel(init, settings);
  const std::size_t n = target.size();
  const std::size_t total = settings.burn_in + settings.iterations;
  const auto d = init.mode.size();

  ChainOutput out;
  out.draws.resize(static_cast<Eigen::Index>(settings.iterations), d);
  out.ell_hat.reserve(settings.iterations);
  out.accepted.reserve(total);

  Eigen::VectorXd theta = init.mode;
  double ell = full_loglik(target, theta);
  double current = ell + log_prior(theta);
  out.setup_density_evals = n;
  if (!std::isfinite(current))
    fail(ErrorCategory::numeric, "log posterior not finite at the chain start");

  std::size_t accepts = 0;
  for (std::size_t it = 0; it < total; ++it) {
    const Eigen::VectorXd prop = kernel.propose(theta);
    const double ell_prop = full_loglik(target, prop);
    out.density_evals += n;
    const double lp = ell_prop + log_prior(prop);
    const double log_u = kernel.log_uniform();
    const bool accept = std::isfinite(lp) && log_u < lp - current;
    if (accept) {
      theta = prop;
      ell = ell_prop;
      current = lp;
      ++accepts;
    }
    out.accepted.push_back(accept);
    if (it >= settings.burn_in) {
      out.draws.row(static_cast<Eigen::Index>(it - settings.burn_in)) = theta.transpose();
      out.ell_hat.push_back(ell);
    }
  }
  out.total_iterations = total;
  out.acceptance_rate = static_cast<double>(accepts) / static_cast<double>(total);
  return out;
}

inline ChainOutput run_full_chain(const WhittleData &data,
                                  const ChainSettings &settings,
                                  const ChainInit &init) {
  return run_full_chain(
      data, [&](const Eigen::VectorXd &v) { return data.log_prior(v); },
      settings, init);
}

/// Block pseudo-marginal random-walk Metropolis. Each iteration advances the
/// block index cyclically, proposes theta' and a refresh of that one block,
/// and accepts both jointly using the bias-corrected estimate; on rejection
/// both theta and u are kept.
template <TermTarget T>
ChainOutput run_pm_chain(const T &target, const GroupIndex &groups,
                         const ControlVariate &cv, const LogDensityFn &log_prior,
                         const ChainSettings &settings, const ChainInit &init) {
  detail::check_settings(settings);
  if (settings.m < 2 && !settings.fixed_indicators)
    fail(ErrorCategory::domain, "subsample size m must be at least 2");
  detail::ProposalKernel kernel(init, settings);
  std::mt19937_64 urng(derive_seed(settings.seed, "subsample"));
  const std::size_t total = settings.burn_in + settings.iterations;
  const auto d = init.mode.size();

  SubsampleIndicators u =
      settings.fixed_indicators
          ? *settings.fixed_indicators
          : SubsampleIndicators::draw(groups.count(), settings.m, settings.blocks, urng);

  ChainOutput out;
  out.draws.resize(static_cast<Eigen::Index>(settings.iterations), d);
  out.ell_hat.reserve(settings.iterations);
  out.accepted.reserve(total);
  if (std::holds_alternative<TaylorCV>(cv))
    out.setup_density_evals = target.size();

  Eigen::VectorXd theta = init.mode;
  LogLikEstimate est = diff_estimator(target, groups, cv, theta, u);
  double current = debias(est) + log_prior(theta);
  if (!std::isfinite(current))
    fail(ErrorCategory::numeric, "log posterior estimate not finite at the chain start");

  std::size_t block = u.blocks() - 1;
  std::size_t accepts = 0;
  for (std::size_t it = 0; it < total; ++it) {
    block = (block + 1) % u.blocks();
    const Eigen::VectorXd prop = kernel.propose(theta);
    SubsampleIndicators u_prop =
        settings.fixed_indicators ? u : block_refresh(u, block, urng);
    const LogLikEstimate est_prop = diff_estimator(target, groups, cv, prop, u_prop);
    out.density_evals += est_prop.density_evals;
    const double lp = debias(est_prop) + log_prior(prop);
    const double log_u = kernel.log_uniform();
    const bool accept = std::isfinite(lp) && log_u < lp - current;
    if (accept) {
      theta = prop;
      u = std::move(u_prop);
      est = est_prop;
      current = lp;
      ++accepts;
    }
    out.accepted.push_back(accept);
    if (it >= settings.burn_in) {
      out.draws.row(static_cast<Eigen::Index>(it - settings.burn_in)) = theta.transpose();
      out.ell_hat.push_back(est.ell_hat);
    }
  }
  out.total_iterations = total;
  out.acceptance_rate = static_cast<double>(accepts) / static_cast<double>(total);
  return out;
}

inline ChainOutput run_pm_chain(const WhittleData &data, const GroupIndex &groups,
                                const ControlVariate &cv,
                                const ChainSettings &settings,
                                const ChainInit &init) {
  return run_pm_chain(
      data, groups, cv, [&](const Eigen::VectorXd &v) { return data.log_prior(v); },
      settings, init);
}

} // namespace specsub

#endif
