// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "dpg/errors.h"
#include "dpg/lq.h"
#include "dpg/numerics.h"
#include "dpg/scenarios.h"
#include "test_support.h"

namespace dpg {
namespace {

// beta = 0.9, A = 0.5, B = 1, Q = -1, R~ = -1.
LqProblem scalar_problem() {
  LqProblem p;
  p.state_dim = 1;
  p.action_dims = {1};
  p.A = Mat::Constant(1, 1, 0.5);
  p.B = Mat::Constant(1, 1, 1.0);
  p.R_tilde = Mat::Constant(1, 1, -1.0);
  p.Q_block = Mat::Constant(1, 1, -1.0);
  p.discount = 0.9;
  p.x0_aug = Vec::Ones(1);
  p.D = {Mat::Zero(1, 1)};
  return p;
}

// Fixed point of p <- -1 + 0.225 p - 0.2025 p^2 / (-1 + 0.9 p), iterated from
// 0 to machine precision by a separate scalar script.
constexpr double kScalarP = -1.125822048322579;
constexpr double kScalarK = 0.25164409664515774;

LqGameParams one_by_one() {
  LqGameParams lp;
  lp.num_players = 1;
  lp.state_dim = 1;
  lp.action_dims = {1};
  lp.C = Mat::Zero(1, 1);
  lp.B = {Mat::Ones(1, 1)};
  lp.D = {Mat::Ones(1, 1)};
  lp.Qc = {Mat::Constant(1, 1, -1.0)};
  lp.R = Mat::Zero(1, 1);
  lp.x0 = Vec::Ones(1);
  return lp;
}

TEST(AugmentLq, ScalarBlocks) {
  auto prob = augment_lq(one_by_one());
  Mat A(2, 2);
  A << 1, 0, 1, 0;
  EXPECT_EQ(prob.A, A);
  EXPECT_EQ(prob.B, (Mat(2, 1) << 1, 0).finished());
  EXPECT_EQ(prob.R_tilde, Mat::Zero(2, 2));
  EXPECT_EQ(prob.x0_aug, Vec::Ones(2));
}

TEST(AugmentLq, FullScaleShapes) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  const auto& p = *b.lq;
  EXPECT_EQ(p.A.rows(), 8);
  EXPECT_EQ(p.A.cols(), 8);
  EXPECT_EQ(p.B.rows(), 8);
  EXPECT_EQ(p.B.cols(), 48);
  EXPECT_EQ(p.Q_block.rows(), 48);
}

TEST(AugmentLq, RTildeAnnihilatesRepeatedBlocks) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  const Mat& R = b.lq->R_tilde;
  EXPECT_LE((R - R.transpose()).cwiseAbs().maxCoeff(), 0.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(R);
  EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-10 * R.cwiseAbs().maxCoeff());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(4);
  for (int k = 0; k < 4; ++k) v[k] = n(rng);
  Vec vv(8);
  vv << v, v;
  EXPECT_LE((R * vv).cwiseAbs().maxCoeff(), 1e-12 * R.cwiseAbs().maxCoeff());
}

TEST(AugmentLq, RejectsIndefiniteDemandCost) {
  auto lp = one_by_one();
  lp.Qc[0](0, 0) = 0.5;
  EXPECT_THROW(augment_lq(lp), ValidationError);
  lp = one_by_one();
  lp.B[0] = Mat::Ones(2, 1);
  EXPECT_THROW(augment_lq(lp), SpecificationError);
}

TEST(Riccati, ZeroDynamicsStopsAtRTilde) {
  auto p = scalar_problem();
  p.A.setZero();
  EXPECT_EQ(riccati_step(p, Mat::Zero(1, 1)), p.R_tilde);
  auto sol = riccati_fixed_point(p);
  EXPECT_EQ(sol.P, p.R_tilde);
  EXPECT_LE(sol.iterations, 2);
}

TEST(Riccati, ScalarOracle) {
  auto sol = riccati_fixed_point(scalar_problem(), 1e-14);
  EXPECT_NEAR(sol.P(0, 0), kScalarP, 1e-10);
  EXPECT_LE(sol.residual, 1e-14);
  EXPECT_FALSE(sol.spectral_warning);
}

TEST(Riccati, ScalarResidualEventuallyDecreases) {
  auto sol = riccati_fixed_point(scalar_problem(), 1e-14);
  const auto& h = sol.residual_history;
  ASSERT_GE(h.size(), 4u);
  for (size_t k = 2; k < h.size(); ++k) EXPECT_LE(h[k], h[k - 1]);
}

TEST(Riccati, FullScaleConvergesWithSmallDareResidual) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  const double tol = 1e-10;
  auto sol = riccati_fixed_point(*b.lq, tol, 5000);
  EXPECT_LT(sol.residual, 1e-8);
  EXPECT_LE(sol.iterations, 5000);
  EXPECT_LE(dare_residual(*b.lq, sol.P), 10 * tol * std::max(1.0, inf_norm(sol.P)));
  EXPECT_LE((sol.P - sol.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(sol.K.rows(), 48);
  EXPECT_EQ(sol.K.cols(), 8);
}

TEST(Riccati, IteratesStayNegativeSemidefinite) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  Mat P = Mat::Zero(8, 8);
  for (int n = 0; n < 40; ++n) {
    P = riccati_step(*b.lq, P);
    EXPECT_EQ(P, P.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(P);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-9 * std::max(1.0, inf_norm(P))) << n;
  }
}

TEST(Riccati, BudgetExhaustionCarriesResidual) {
  try {
    riccati_fixed_point(scalar_problem(), 1e-14, 3);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 3);
    EXPECT_GT(e.last_residual(), 1e-14);
  }
}

TEST(Gain, ZeroValueGivesZeroGain) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  EXPECT_EQ(lq_optimal_gain(*b.lq, Mat::Zero(8, 8)), Mat::Zero(48, 8));
}

TEST(Gain, ScalarOracle) {
  Mat K = lq_optimal_gain(scalar_problem(), Mat::Constant(1, 1, kScalarP));
  EXPECT_NEAR(K(0, 0), kScalarK, 1e-12);
}

TEST(Gain, FirstOrderConditionOnRandomStates) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  auto sol = riccati_fixed_point(*b.lq);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    Vec x(8);
    for (int j = 0; j < 8; ++j) x[j] = n(rng);
    EXPECT_LE(lq_first_order_residual(*b.lq, sol.P, sol.K, x), 1e-8 * x.norm());
  }
}

TEST(Simulate, OriginStaysPut) {
  auto p = scalar_problem();
  p.x0_aug.setZero();
  auto sim = lq_simulate(p, Mat::Constant(1, 1, kScalarK), 10);
  for (const auto& x : sim.traj.states) EXPECT_EQ(x[0], 0.0);
  for (double v : sim.stage_utility) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, ScalarGeometricDecay) {
  auto p = scalar_problem();
  auto sim = lq_simulate(p, Mat::Constant(1, 1, kScalarK), 25);
  double x = 1.0;
  for (int t = 0; t <= 25; ++t) {
    EXPECT_NEAR(sim.traj.states[t][0], x, 1e-15 * std::max(1.0, x));
    x *= 0.5 - kScalarK;
  }
  EXPECT_NEAR(sim.closed_loop_radius, 0.5 - kScalarK, 1e-12);
}

TEST(Simulate, UnstableOpenLoopDiverges) {
  auto p = scalar_problem();
  p.A(0, 0) = 3.0;
  EXPECT_THROW(lq_simulate(p, Mat::Zero(1, 1), 100), InstabilityError);
}

TEST(Simulate, FullScaleInstanceDecays) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  auto sol = riccati_fixed_point(*b.lq);
  auto sim = lq_simulate(*b.lq, sol.K, b.horizon);
  EXPECT_LT(sim.closed_loop_radius, 1.0);
  for (double v : sim.stage_utility) EXPECT_LE(v, 0.0);
  EXPECT_LT(std::abs(sim.stage_utility.back()), 1e-3 * std::abs(sim.stage_utility.front()));
  EXPECT_LT(sim.traj.actions.back().norm(), 1e-3 * sim.traj.actions.front().norm());
}

// The discounted closed-loop sum reproduces the quadratic value x0' P x0.
TEST(Simulate, ValueFunctionConsistency) {
  auto b = build_smart_grid(testing::config("smart-grid"));
  auto sol = riccati_fixed_point(*b.lq, 1e-12);
  const int T = 400;
  auto sim = lq_simulate(*b.lq, sol.K, T);
  const Vec& x0 = b.lq->x0_aug;
  const Vec& xT = sim.traj.states.back();
  const double tail = std::pow(b.lq->discount, T) * std::abs(xT.dot(sol.P * xT));
  const double v0 = x0.dot(sol.P * x0);
  EXPECT_NEAR(*sim.traj.potential_return, v0, tail + 1e-8 * std::abs(v0));
}

TEST(SmartGridBuilder, ScalarOverrideAndDiscountPlumbing) {
  auto b = build_smart_grid(testing::config(
      "smart-grid", 3,
      {{"num_players", std::int64_t{1}}, {"num_resources", std::int64_t{1}},
       {"num_activities", std::int64_t{1}}, {"discount", 0.5}}));
  EXPECT_EQ(b.lq->A.rows(), 2);
  EXPECT_EQ(b.lq->B.cols(), 1);
  EXPECT_EQ(b.lq->discount, 0.5);
  EXPECT_EQ(b.game.system.discount, 0.5);
}

TEST(SmartGridBuilder, SeedPinsMatrices) {
  auto a = build_smart_grid(testing::config("smart-grid", 5));
  auto b = build_smart_grid(testing::config("smart-grid", 5));
  auto c = build_smart_grid(testing::config("smart-grid", 6));
  EXPECT_EQ(a.lq->A, b.lq->A);
  EXPECT_EQ(a.lq->Q_block, b.lq->Q_block);
  EXPECT_NE(a.lq->A, c.lq->A);
}

TEST(LqBestResponse, RiccatiPathIsEquilibriumAndPerturbationIsNot) {
  auto b = build_smart_grid(testing::config(
      "smart-grid", 2,
      {{"num_players", std::int64_t{3}}, {"num_resources", std::int64_t{2}},
       {"num_activities", std::int64_t{2}}, {"horizon", std::int64_t{40}}}));
  auto sol = riccati_fixed_point(*b.lq);
  auto sim = lq_simulate(*b.lq, sol.K, b.horizon);
  auto tr = rollout(b.game, sim.traj.actions, b.horizon);
  // The stationary policy ignores the horizon end, so a finite-horizon
  // deviation gains a little near T (relative ~ 1e-6 here).
  for (int i = 0; i < 3; ++i) {
    auto br = lq_best_response(*b.lq, tr, i, b.action_limit);
    EXPECT_GE(br.best_return - br.current_return, -1e-10 * std::abs(br.current_return));
    EXPECT_LE(br.best_return - br.current_return, 1e-4 * std::abs(br.current_return)) << i;
    EXPECT_NEAR(br.current_return, tr.per_player_returns[i],
                1e-10 * std::abs(br.current_return));
  }
  auto u = sim.traj.actions;
  u[0][2] += 0.1 * 2.0 * b.action_limit;  // player 2, first entry at t = 0
  auto bumped = rollout(b.game, u, b.horizon);
  auto br = lq_best_response(*b.lq, bumped, 1, b.action_limit);
  EXPECT_GT(br.best_return - br.current_return, 0.0);
}

}  // namespace
}  // namespace dpg
