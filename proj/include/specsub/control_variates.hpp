#ifndef SPECSUB_CONTROL_VARIATES_HPP
#define SPECSUB_CONTROL_VARIATES_HPP

/** @file
 * Control variates q_{G_k}(theta) for grouped log-likelihoods.
 *
 * Taylor: second-order expansion of each group sum around a common theta*.
 * Because the expansion is quadratic, sum_k q_{G_k} collapses to a single
 * quadratic form and costs O(dim^2) regardless of the number of groups.
 *
 * Coreset: per group, a sparse nonnegative reweighting of that group's own
 * terms, fitted by Greedy Iterative Geodesic Ascent (GIGA) on random
 * projections drawn from a weighting distribution (a Laplace approximation
 * of the posterior).
 */

#include "specsub/error.hpp"
#include "specsub/groups.hpp"
#include "specsub/numeric.hpp"
#include "specsub/target.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace specsub {

// ---------------------------------------------------------------------------
// Taylor control variates

class TaylorCV {
public:
  TaylorCV(Eigen::VectorXd theta_star, std::vector<Expansion> per_group)
      : theta_star_(std::move(theta_star)), per_group_(std::move(per_group)) {
    const Eigen::Index d = theta_star_.size();
    CompensatedSum a;
    b_ = Eigen::VectorXd::Zero(d);
    h_ = Eigen::MatrixXd::Zero(d, d);
    for (const auto &e : per_group_) {
      if (e.gradient.size() != d || e.hessian.rows() != d ||
          e.hessian.cols() != d)
        fail(ErrorCategory::domain, "expansion dimension mismatch");
      a += e.value;
      b_ += e.gradient;
      h_ += e.hessian;
    }
    a_ = a.value();
  }

  std::size_t group_count() const { return per_group_.size(); }
  const Eigen::VectorXd &theta_star() const { return theta_star_; }
  const Expansion &group(std::size_t k) const { return per_group_.at(k); }
  double aggregate_value() const { return a_; }
  const Eigen::VectorXd &aggregate_gradient() const { return b_; }
  const Eigen::MatrixXd &aggregate_hessian() const { return h_; }

  /// q_{G_k}(theta).
  double eval(const Eigen::VectorXd &theta, std::size_t k) const {
    check_dim(theta);
    const Expansion &e = per_group_.at(k);
    const Eigen::VectorXd delta = theta - theta_star_;
    return e.value + e.gradient.dot(delta) + 0.5 * delta.dot(e.hessian * delta);
  }

  /// sum_k q_{G_k}(theta) from the aggregated coefficients.
  double total(const Eigen::VectorXd &theta) const {
    check_dim(theta);
    const Eigen::VectorXd delta = theta - theta_star_;
    return a_ + b_.dot(delta) + 0.5 * delta.dot(h_ * delta);
  }

private:
  void check_dim(const Eigen::VectorXd &theta) const {
    if (theta.size() != theta_star_.size())
      fail(ErrorCategory::domain, "parameter dimension mismatch");
  }

  Eigen::VectorXd theta_star_;
  std::vector<Expansion> per_group_;
  double a_ = 0.0;
  Eigen::VectorXd b_;
  Eigen::MatrixXd h_;
};

template <TermTarget T>
TaylorCV build_taylor_cv(const T &target, const GroupIndex &groups,
                         const Eigen::VectorXd &theta_star) {
  return TaylorCV(theta_star, grad_hess(target, groups, theta_star));
}

inline double eval_taylor_cv(const TaylorCV &cv, const Eigen::VectorXd &theta,
                             std::size_t k) {
  return cv.eval(theta, k);
}

inline double eval_taylor_cv_total(const TaylorCV &cv,
                                   const Eigen::VectorXd &theta) {
  return cv.total(theta);
}

// ---------------------------------------------------------------------------
// Weighting distribution

/// Gaussian(mean, covariance) held through its Cholesky factor.
class WeightingDistribution {
public:
  WeightingDistribution(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
      : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size())
      fail(ErrorCategory::domain, "covariance dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() != Eigen::Success)
      fail(ErrorCategory::numeric, "weighting covariance is not positive definite");
    chol_ = llt.matrixL();
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
  }

  const Eigen::VectorXd &mean() const { return mean_; }
  const Eigen::MatrixXd &covariance() const { return covariance_; }
  const Eigen::MatrixXd &cholesky() const { return chol_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

  template <class Rng> Eigen::VectorXd sample(Rng &rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(mean_.size());
    for (Eigen::Index j = 0; j < z.size(); ++j)
      z[j] = normal(rng);
    return mean_ + chol_ * z;
  }

  double log_density(const Eigen::VectorXd &x) const {
    const Eigen::VectorXd z =
        chol_.triangularView<Eigen::Lower>().solve(x - mean_);
    return -0.5 * static_cast<double>(mean_.size()) * kLogTwoPi -
           0.5 * log_det_ - 0.5 * z.squaredNorm();
  }

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd chol_;
  double log_det_ = 0.0;
};

/// Laplace approximation N(mode, (-H)^{-1}) from the Hessian of the log
/// posterior at its mode. The parameterization is unconstrained, so every
/// draw is admissible and no truncation is needed.
inline WeightingDistribution
laplace_weighting(const Eigen::VectorXd &mode,
                  const Eigen::MatrixXd &hessian_of_log_posterior) {
  const Eigen::MatrixXd precision = -hessian_of_log_posterior;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    fail(ErrorCategory::numeric,
         "negative Hessian of the log posterior is not positive definite");
  const Eigen::MatrixXd cov =
      llt.solve(Eigen::MatrixXd::Identity(mode.size(), mode.size()));
  return WeightingDistribution(mode, 0.5 * (cov + cov.transpose()));
}

// ---------------------------------------------------------------------------
// Random projections

/// Row i of `vectors` is the centered, 1/sqrt(RP)-scaled vector of term i's
/// values over RP draws; `target` is their sum and `means` holds the
/// per-term averages removed by centering.
struct ProjectionSet {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd target;
  Eigen::VectorXd means;
};

inline constexpr int kProjectionRetryCap = 100;

template <TermTarget T>
ProjectionSet project_cell(const T &target, const std::vector<std::size_t> &cell,
                           const WeightingDistribution &wd,
                           std::size_t projections, std::uint64_t seed) {
  if (projections < 2)
    fail(ErrorCategory::domain, "need at least 2 random projections");
  const auto n = static_cast<Eigen::Index>(cell.size());
  const auto rp = static_cast<Eigen::Index>(projections);
  Eigen::MatrixXd values(n, rp);
  std::mt19937_64 rng(seed);
  for (Eigen::Index j = 0; j < rp; ++j) {
    bool ok = false;
    for (int attempt = 0; attempt < kProjectionRetryCap && !ok; ++attempt) {
      const Eigen::VectorXd theta = wd.sample(rng);
      const auto ev = target.bind(theta);
      ok = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = ev.term(cell[static_cast<std::size_t>(i)]);
        if (!std::isfinite(v)) {
          ok = false;
          break;
        }
        values(i, j) = v;
      }
    }
    if (!ok)
      fail(ErrorCategory::numeric,
           "log-likelihood term non-finite at every retried projection draw");
  }
  ProjectionSet out;
  out.means = values.rowwise().mean();
  out.vectors = (values.colwise() - out.means) / std::sqrt(static_cast<double>(rp));
  out.target = out.vectors.colwise().sum().transpose();
  return out;
}

template <TermTarget T>
ProjectionSet project_group(const T &target, const GroupIndex &groups,
                            std::size_t k, const WeightingDistribution &wd,
                            std::size_t projections, std::uint64_t seed) {
  return project_cell(target, groups.cell(k), wd, projections, seed);
}

// ---------------------------------------------------------------------------
// GIGA

struct GigaResult {
  /// One weight per input row; zero for unselected and zero-norm atoms.
  Eigen::VectorXd weights;
  /// <L/|L|, current direction> after each iteration.
  std::vector<double> alignment;
  /// |L - sum_i w_i v_i| after each iteration, with the optimal scaling.
  std::vector<double> residual;

  std::size_t nonzero() const {
    return static_cast<std::size_t>((weights.array() > 0.0).count());
  }
};

/// Greedy Iterative Geodesic Ascent on the unit sphere. Rows of `vectors` are
/// the atoms v_i, `target` is L. Runs at most `iterations` greedy steps, so
/// at most that many weights are non-zero. Rows with zero norm are skipped.
inline GigaResult giga(const Eigen::MatrixXd &vectors,
                       const Eigen::VectorXd &target, std::size_t iterations) {
  if (vectors.cols() != target.size())
    fail(ErrorCategory::domain, "atom and target dimensions differ");
  const double target_norm = target.norm();
  if (!(target_norm > 0.0))
    fail(ErrorCategory::domain, "GIGA target vector is zero");

  const Eigen::VectorXd norms = vectors.rowwise().norm();
  const double norm_floor = 1e-12 * norms.maxCoeff();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < vectors.rows(); ++i)
    if (norms[i] > norm_floor)
      active.push_back(i);

  GigaResult out;
  out.weights = Eigen::VectorXd::Zero(vectors.rows());
  if (active.empty() || iterations == 0)
    return out;

  const auto na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd unit(na, vectors.cols());
  for (Eigen::Index a = 0; a < na; ++a)
    unit.row(a) = vectors.row(active[static_cast<std::size_t>(a)]) /
                  norms[active[static_cast<std::size_t>(a)]];
  const Eigen::VectorXd target_unit = target / target_norm;
  const Eigen::VectorXd align_atoms = unit * target_unit;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(na);
  Eigen::VectorXd direction;
  Eigen::VectorXd atom_dots; // <unit_i, direction>
  double align = 0.0;

  const auto record = [&] {
    out.alignment.push_back(align);
    const double scale = std::max(align, 0.0);
    out.residual.push_back(target_norm * std::sqrt(std::max(0.0, 1.0 - scale * scale)));
  };

  // First step: the single best-aligned atom.
  Eigen::Index best = 0;
  align_atoms.maxCoeff(&best);
  direction = unit.row(best).transpose();
  w[best] = 1.0;
  atom_dots = unit * direction;
  align = align_atoms[best];
  record();

  constexpr double kTiny = 1e-12;
  for (std::size_t t = 1; t < iterations; ++t) {
    if (align <= -1.0 + kTiny)
      fail(ErrorCategory::numeric,
           "GIGA direction is antiparallel to the target; geometry degenerate");
    const double gap = std::sqrt(std::max(0.0, 1.0 - align * align));
    if (gap < kTiny)
      break;
    Eigen::Index pick = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < na; ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - atom_dots[i] * atom_dots[i]));
      if (s < kTiny)
        continue;
      const double score = (align_atoms[i] - align * atom_dots[i]) / (gap * s);
      if (score > best_score) {
        best_score = score;
        pick = i;
      }
    }
    if (pick < 0)
      break;
    const double z0 = align_atoms[pick];
    const double z1 = align;
    const double z2 = atom_dots[pick];
    const double num = z0 - z1 * z2;
    const double den = num + (z1 - z0 * z2);
    if (!(den > 0.0) || !(num > 0.0))
      break;
    const double gamma = std::min(1.0, num / den);
    const double step_norm = std::sqrt((1.0 - gamma) * (1.0 - gamma) +
                                       gamma * gamma +
                                       2.0 * gamma * (1.0 - gamma) * z2);
    direction = ((1.0 - gamma) * direction + gamma * unit.row(pick).transpose()) /
                step_norm;
    direction /= direction.norm();
    w *= (1.0 - gamma);
    w[pick] += gamma;
    w /= step_norm;
    atom_dots = unit * direction;
    align = std::min(1.0, target_unit.dot(direction));
    record();
  }

  const double scale = std::max(align, 0.0) * target_norm;
  for (Eigen::Index a = 0; a < na; ++a) {
    const Eigen::Index i = active[static_cast<std::size_t>(a)];
    out.weights[i] = std::max(0.0, w[a]) * scale / norms[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coreset control variates

struct CoresetAtom {
  std::size_t index;    // term index
  std::size_t position; // position within the group's cell
  double weight;
};

/// q_G(theta) = offset + sum_atoms weight * l_index(theta). The offset
/// restores the centering constants (and carries any constant terms).
struct CoresetGroup {
  std::vector<CoresetAtom> atoms;
  double offset = 0.0;
};

class CoresetCV {
public:
  explicit CoresetCV(std::vector<CoresetGroup> groups)
      : groups_(std::move(groups)) {
    for (const auto &g : groups_) {
      total_atoms_ += g.atoms.size();
      for (const auto &a : g.atoms)
        if (!(a.weight >= 0.0))
          fail(ErrorCategory::domain, "coreset weights must be nonnegative");
    }
  }

  std::size_t group_count() const { return groups_.size(); }
  const CoresetGroup &group(std::size_t k) const { return groups_.at(k); }
  std::size_t total_atoms() const { return total_atoms_; }
  double mean_atoms() const {
    return static_cast<double>(total_atoms_) / static_cast<double>(groups_.size());
  }

  /// q_G from term values already computed for the group's cell.
  double eval_from_cell_values(std::size_t k, const std::vector<double> &cell_values) const {
    const CoresetGroup &g = groups_.at(k);
    double q = g.offset;
    for (const auto &a : g.atoms)
      q += a.weight * cell_values[a.position];
    return q;
  }

  template <class Evaluator> double eval(const Evaluator &ev, std::size_t k) const {
    const CoresetGroup &g = groups_.at(k);
    CompensatedSum q;
    q += g.offset;
    for (const auto &a : g.atoms)
      q += a.weight * ev.term(a.index);
    return q.value();
  }

  template <class Evaluator> double total(const Evaluator &ev) const {
    CompensatedSum s;
    for (std::size_t k = 0; k < groups_.size(); ++k)
      s += eval(ev, k);
    return s.value();
  }

private:
  std::vector<CoresetGroup> groups_;
  std::size_t total_atoms_ = 0;
};

/// Fits one group's coreset: projections, GIGA, then offset bookkeeping.
template <TermTarget T>
CoresetGroup build_coreset_group(const T &target, const GroupIndex &groups,
                                 std::size_t k, const WeightingDistribution &wd,
                                 std::size_t iterations, std::size_t projections,
                                 std::uint64_t seed) {
  const auto &cell = groups.cell(k);
  const ProjectionSet proj = project_cell(target, cell, wd, projections,
                                          derive_seed(seed, "projection", k));
  CoresetGroup g;
  CompensatedSum offset;
  for (Eigen::Index i = 0; i < proj.means.size(); ++i)
    offset += proj.means[i];
  if (proj.target.norm() > 0.0 && proj.vectors.rowwise().norm().maxCoeff() > 0.0) {
    const GigaResult fit = giga(proj.vectors, proj.target, iterations);
    for (Eigen::Index i = 0; i < fit.weights.size(); ++i) {
      const double w = fit.weights[i];
      if (w > 0.0) {
        const auto pos = static_cast<std::size_t>(i);
        g.atoms.push_back({cell[pos], pos, w});
        offset += -w * proj.means[i];
      }
    }
  }
  g.offset = offset.value();
  return g;
}

/// Independent per-group fits; each group's randomness comes from
/// derive_seed(seed, "projection", k), so the result does not depend on the
/// order or concurrency of group processing.
template <TermTarget T>
CoresetCV build_coreset_cv(const T &target, const GroupIndex &groups,
                           const WeightingDistribution &wd,
                           std::size_t iterations, std::size_t projections,
                           std::uint64_t seed) {
  if (wd.dim() != target.dim())
    fail(ErrorCategory::domain, "weighting distribution dimension mismatch");
  std::vector<CoresetGroup> out;
  out.reserve(groups.count());
  for (std::size_t k = 0; k < groups.count(); ++k)
    out.push_back(build_coreset_group(target, groups, k, wd, iterations,
                                      projections, seed));
  return CoresetCV(std::move(out));
}

// ---------------------------------------------------------------------------

struct NoControlVariate {};

using ControlVariate = std::variant<NoControlVariate, TaylorCV, CoresetCV>;

} // namespace specsub

#endif
