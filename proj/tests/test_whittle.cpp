#include "specsub/error.hpp"
#include "specsub/groups.hpp"
#include "specsub/sampler.hpp"
#include "specsub/series.hpp"
#include "specsub/spectral.hpp"
#include "specsub/whittle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace specsub;

namespace {

constexpr double kPi = std::numbers::pi;

ModelSpec arma(std::size_t q, std::size_t p) {
  ModelSpec s;
  s.ar_order = q;
  s.ma_order = p;
  return s;
}

Periodogram pg_of(const TimeSeries &s) { return periodogram(demean(s)); }

} // namespace

TEST(Groups, StrideDefinition) {
  const auto g = make_groups(6, 2);
  EXPECT_EQ(g.cell(0), (std::vector<std::size_t>{0, 2, 4}));
  EXPECT_EQ(g.cell(1), (std::vector<std::size_t>{1, 3, 5}));
}

TEST(Groups, TableScaleGroupSize) {
  const auto g = make_groups(22000, 1000);
  for (const auto &c : g.cells())
    EXPECT_EQ(c.size(), 22u);
}

TEST(Groups, SingletonsAndRemainders) {
  const auto s = make_groups(5, 5);
  for (std::size_t k = 0; k < 5; ++k)
    EXPECT_EQ(s.cell(k), std::vector<std::size_t>{k});
  const auto r = make_groups(10, 4);
  EXPECT_EQ(r.cell(0).size(), 3u);
  EXPECT_EQ(r.cell(1).size(), 3u);
  EXPECT_EQ(r.cell(2).size(), 2u);
  EXPECT_EQ(r.max_cell_size(), 3u);
}

TEST(Groups, RejectsInvalidPartitions) {
  EXPECT_THROW(make_groups(5, 0), Error);
  EXPECT_THROW(make_groups(5, 6), Error);
  EXPECT_THROW(GroupIndex({{0, 1}, {1, 2}}, 3), Error);
  EXPECT_THROW(GroupIndex({{0}, {2}}, 3), Error);
  EXPECT_THROW(make_groups(6, 2).cell(2), Error);
}

TEST(WhittleTerm, RatioOneAndUnitValues) {
  const double i = 0.37;
  EXPECT_NEAR(whittle_term(std::log(i), i), -(std::log(i) + 1.0), 1e-15);
  EXPECT_EQ(whittle_term(0.0, 1.0), -1.0);
}

TEST(WhittleTerm, IndexOutOfRange) {
  const WhittleData w(pg_of(simulate_arma({}, {}, 1.0, 64, 1)), arma(0, 0));
  EXPECT_THROW(term(w, Eigen::VectorXd::Zero(1), w.size()), Error);
}

TEST(FullLoglik, EqualsSumOfTermsAndDirectFormula) {
  const std::vector<double> phi{0.6};
  const auto pg = pg_of(simulate_arma(phi, {}, 1.0, 1001, 3));
  ASSERT_EQ(pg.size(), 500u);
  const WhittleData w(pg, arma(1, 0));
  Eigen::VectorXd v(2);
  v << 0.4, 0.2;
  double by_terms = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    by_terms += term(w, v, k);
  // second implementation straight from the definition
  const double ph = std::tanh(0.4), s2 = std::exp(0.2);
  long double direct = 0.0L;
  for (std::size_t k = 0; k < pg.size(); ++k) {
    const double om = pg.omega(k);
    const double den = 1.0 - 2.0 * ph * std::cos(om) + ph * ph;
    const double f = s2 / (2 * kPi) / den;
    direct += -(std::log(f) + pg[k] / f);
  }
  const double full = full_loglik(w, v);
  EXPECT_NEAR(full, by_terms, 1e-10 * std::abs(full));
  EXPECT_NEAR(full, static_cast<double>(direct), 1e-10 * std::abs(full));
}

TEST(FullLoglik, LinearInOrdinates) {
  const auto pg = pg_of(simulate_arma({}, {}, 1.0, 301, 4));
  std::vector<double> doubled(pg.ordinates());
  for (auto &x : doubled)
    x *= 2.0;
  const WhittleData a(pg, arma(0, 0));
  const WhittleData b(Periodogram(pg.grid(), doubled), arma(0, 0));
  Eigen::VectorXd v(1);
  v << 0.3;
  const double f = std::exp(0.3) / (2 * kPi);
  double sum_i_over_f = 0.0;
  for (double x : pg.ordinates())
    sum_i_over_f += x / f;
  EXPECT_NEAR(full_loglik(b, v) - full_loglik(a, v), -sum_i_over_f, 1e-9 * sum_i_over_f);
}

TEST(FullLoglik, WhiteNoiseClosedFormMaximizer) {
  const auto pg = pg_of(simulate_arma({}, {}, 2.0, 2001, 5));
  const WhittleData w(pg, arma(0, 0));
  double sum = 0.0;
  for (double x : pg.ordinates())
    sum += x;
  const double sigma2_hat = 2 * kPi / static_cast<double>(pg.size()) * sum;
  // gradient of the log-likelihood in log sigma2 vanishes at the maximizer
  const auto g = fd_gradient([&](const Eigen::VectorXd &v) { return full_loglik(w, v); },
                             Eigen::VectorXd::Constant(1, std::log(sigma2_hat)));
  EXPECT_NEAR(g[0], 0.0, 1e-8 * static_cast<double>(pg.size()));
  const auto mode = find_mode(
      [&](const Eigen::VectorXd &v) { return full_loglik(w, v); },
      Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(std::exp(mode.mode[0]), sigma2_hat, 1e-8 * sigma2_hat);
}

TEST(GroupLoglik, AdditivityForEveryPartitionKind) {
  const auto pg = pg_of(simulate_arma(std::vector<double>{0.3}, std::vector<double>{0.2},
                                      1.0, 201, 6));
  const WhittleData w(pg, arma(1, 1));
  Eigen::VectorXd v(3);
  v << 0.2, -0.1, 0.05;
  const double full = full_loglik(w, v);

  EXPECT_NEAR(group_loglik(w, make_groups(w.size(), 1), v, 0), full, 1e-12 * std::abs(full));
  const auto singles = make_groups(w.size(), w.size());
  for (std::size_t k = 0; k < w.size(); k += 17)
    EXPECT_EQ(group_loglik(w, singles, v, k), term(w, v, k));

  std::vector<std::size_t> perm(w.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    perm[i] = i;
  std::mt19937_64 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> cells(7);
  for (std::size_t i = 0; i < perm.size(); ++i)
    cells[i % 7].push_back(perm[i]);
  const GroupIndex random_groups(cells, w.size());
  const auto sums = group_logliks(w, random_groups, v);
  EXPECT_NEAR(sums.sum(), full, 1e-10 * std::abs(full));
  EXPECT_THROW(group_loglik(w, random_groups, v, 7), Error);
}

TEST(GradHess, WhiteNoiseAnalyticGradient) {
  const auto pg = pg_of(simulate_arma({}, {}, 1.0, 41, 7));
  const WhittleData w(pg, arma(0, 0));
  const auto groups = make_groups(w.size(), w.size());
  const double ls = 0.3;
  const auto ex = grad_hess(w, groups, Eigen::VectorXd::Constant(1, ls));
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double analytic = -1.0 + pg[k] * 2 * kPi * std::exp(-ls);
    EXPECT_NEAR(ex[k].gradient[0], analytic, 1e-6);
    EXPECT_NEAR(ex[k].hessian(0, 0), -pg[k] * 2 * kPi * std::exp(-ls), 1e-4);
  }
}

TEST(GradHess, GroupGradientsSumToFullGradient) {
  const auto pg = pg_of(simulate_arma(std::vector<double>{0.5}, {}, 1.0, 401, 8));
  const WhittleData w(pg, arma(1, 0));
  Eigen::VectorXd v(2);
  v << 0.5, 0.1;
  const auto ex = grad_hess(w, make_groups(w.size(), 10), v);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(2);
  for (const auto &e : ex) {
    total += e.gradient;
    EXPECT_TRUE(e.hessian.isApprox(e.hessian.transpose()));
  }
  const auto g = fd_gradient([&](const Eigen::VectorXd &p) { return full_loglik(w, p); }, v);
  EXPECT_NEAR((total - g).norm(), 0.0, 1e-6 * g.norm() + 1e-6);
}

TEST(GradHess, CentralDifferencesConvergeAtSecondOrder) {
  const auto pg = pg_of(simulate_arma(std::vector<double>{0.5}, std::vector<double>{0.3},
                                      1.0, 301, 9));
  const WhittleData w(pg, arma(1, 1));
  const auto f = [&](const Eigen::VectorXd &p) { return full_loglik(w, p); };
  std::mt19937_64 rng(10);
  std::normal_distribution<double> z(0.0, 0.3);
  for (int rep = 0; rep < 3; ++rep) {
    Eigen::VectorXd v(3);
    for (Eigen::Index j = 0; j < 3; ++j)
      v[j] = z(rng);
    // large steps so truncation error dominates rounding
    const auto g_ref = fd_gradient(f, v, 10.0);
    const auto g1 = fd_gradient(f, v, 4000.0);
    const auto g2 = fd_gradient(f, v, 2000.0);
    const double e1 = (g1 - g_ref).norm();
    const double e2 = (g2 - g_ref).norm();
    EXPECT_NEAR(e1 / e2, 4.0, 0.4);
  }
}

TEST(GradHess, NonFiniteStencilIsAnError) {
  const auto pg = pg_of(simulate_arma({}, {}, 1.0, 41, 7));
  const WhittleData w(pg, arma(0, 0));
  EXPECT_THROW(grad_hess(w, make_groups(w.size(), 2), Eigen::VectorXd::Constant(1, 1e308)),
               Error);
}
