#ifndef SPECSUB_TARGET_HPP
#define SPECSUB_TARGET_HPP

/** @file
 * Generic machinery for log-likelihoods that are sums of terms,
 * l(theta) = sum_i l_i(theta). Anything modelling `TermTarget` can be fed to
 * the control-variate builders and the samplers; the Whittle likelihood is
 * the production instance, tests also use synthetic quadratic targets.
 *
 * A target exposes `bind(theta)`, which does the per-parameter setup once and
 * returns a cheap evaluator of individual terms.
 */

#include "specsub/error.hpp"
#include "specsub/groups.hpp"
#include "specsub/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <string>
#include <vector>

namespace specsub {

template <class T>
concept TermTarget = requires(const T &t, const Eigen::VectorXd &v,
                              std::size_t i) {
  { t.size() } -> std::convertible_to<std::size_t>;
  { t.dim() } -> std::convertible_to<std::size_t>;
  { t.bind(v).term(i) } -> std::convertible_to<double>;
};

template <TermTarget T>
double term(const T &target, const Eigen::VectorXd &v, std::size_t k) {
  if (k >= target.size())
    fail(ErrorCategory::domain, "term index " + std::to_string(k) +
                                    " out of range");
  return target.bind(v).term(k);
}

/// Sum over all terms in ascending index order.
template <TermTarget T>
double full_loglik(const T &target, const Eigen::VectorXd &v) {
  const auto ev = target.bind(v);
  CompensatedSum s;
  for (std::size_t i = 0, n = target.size(); i < n; ++i)
    s += ev.term(i);
  return s.value();
}

template <class Evaluator>
double cell_sum(const Evaluator &ev, const std::vector<std::size_t> &cell) {
  CompensatedSum s;
  for (std::size_t i : cell)
    s += ev.term(i);
  return s.value();
}

template <TermTarget T>
double group_loglik(const T &target, const GroupIndex &groups,
                    const Eigen::VectorXd &v, std::size_t k) {
  return cell_sum(target.bind(v), groups.cell(k));
}

/// All group sums from a single bind.
template <TermTarget T>
Eigen::VectorXd group_logliks(const T &target, const GroupIndex &groups,
                              const Eigen::VectorXd &v) {
  const auto ev = target.bind(v);
  Eigen::VectorXd out(static_cast<Eigen::Index>(groups.count()));
  for (std::size_t k = 0; k < groups.count(); ++k)
    out[static_cast<Eigen::Index>(k)] = cell_sum(ev, groups.cells()[k]);
  return out;
}

/// Value, gradient and Hessian of a function at an expansion point.
struct Expansion {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Per-coordinate central-difference step.
inline double fd_step(double x) { return std::max(1e-5, 1e-7 * std::abs(x)); }

/// Central finite-difference value/gradient/Hessian of a vector-valued
/// function F: R^d -> R^G, returned per output component. The Hessian uses
/// the four-point mixed stencil and is symmetrized. `step_scale` multiplies
/// the default steps (for convergence checks).
inline std::vector<Expansion>
fd_expansions(const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &f,
              const Eigen::VectorXd &x, double step_scale = 1.0) {
  const Eigen::Index d = x.size();
  const auto eval = [&](const Eigen::VectorXd &p) {
    Eigen::VectorXd y = f(p);
    if (!y.allFinite())
      fail(ErrorCategory::numeric,
           "non-finite log-likelihood at a finite-difference point; the "
           "expansion point is too close to a singular configuration");
    return y;
  };

  Eigen::VectorXd h(d);
  for (Eigen::Index j = 0; j < d; ++j)
    h[j] = step_scale * fd_step(x[j]);

  const Eigen::VectorXd f0 = eval(x);
  const Eigen::Index g = f0.size();
  std::vector<Expansion> out(static_cast<std::size_t>(g));
  for (Eigen::Index k = 0; k < g; ++k) {
    auto &e = out[static_cast<std::size_t>(k)];
    e.value = f0[k];
    e.gradient = Eigen::VectorXd::Zero(d);
    e.hessian = Eigen::MatrixXd::Zero(d, d);
  }

  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h[j];
    xm[j] -= h[j];
    const Eigen::VectorXd fp = eval(xp);
    const Eigen::VectorXd fm = eval(xm);
    for (Eigen::Index k = 0; k < g; ++k) {
      auto &e = out[static_cast<std::size_t>(k)];
      e.gradient[j] = (fp[k] - fm[k]) / (2.0 * h[j]);
      e.hessian(j, j) = (fp[k] - 2.0 * f0[k] + fm[k]) / (h[j] * h[j]);
    }
  }

  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Eigen::VectorXd p = x;
      p[i] += h[i];
      p[j] += h[j];
      const Eigen::VectorXd fpp = eval(p);
      p[j] -= 2.0 * h[j];
      const Eigen::VectorXd fpm = eval(p);
      p[i] -= 2.0 * h[i];
      const Eigen::VectorXd fmm = eval(p);
      p[j] += 2.0 * h[j];
      const Eigen::VectorXd fmp = eval(p);
      for (Eigen::Index k = 0; k < g; ++k) {
        const double v =
            (fpp[k] - fpm[k] - fmp[k] + fmm[k]) / (4.0 * h[i] * h[j]);
        auto &e = out[static_cast<std::size_t>(k)];
        e.hessian(i, j) = v;
        e.hessian(j, i) = v;
      }
    }
  }
  for (auto &e : out)
    e.hessian = 0.5 * (e.hessian + e.hessian.transpose()).eval();
  return out;
}

inline Expansion
fd_expansion(const std::function<double(const Eigen::VectorXd &)> &f,
             const Eigen::VectorXd &x, double step_scale = 1.0) {
  auto all = fd_expansions(
      [&](const Eigen::VectorXd &p) {
        return Eigen::VectorXd::Constant(1, f(p));
      },
      x, step_scale);
  return std::move(all.front());
}

/// Central-difference gradient only (2d evaluations).
inline Eigen::VectorXd
fd_gradient(const std::function<double(const Eigen::VectorXd &)> &f,
            const Eigen::VectorXd &x, double step_scale = 1.0) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = step_scale * fd_step(x[j]);
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Per-group l_{G_k}(v*), gradient and Hessian in the unconstrained
/// coordinates, by central differences. Every group is evaluated in one pass
/// per stencil point.
template <TermTarget T>
std::vector<Expansion> grad_hess(const T &target, const GroupIndex &groups,
                                 const Eigen::VectorXd &v_star,
                                 double step_scale = 1.0) {
  if (!v_star.allFinite())
    fail(ErrorCategory::domain, "expansion point must be finite");
  return fd_expansions(
      [&](const Eigen::VectorXd &p) { return group_logliks(target, groups, p); },
      v_star, step_scale);
}

} // namespace specsub

#endif
