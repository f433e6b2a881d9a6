// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dpg/errors.h"
#include "dpg/scenarios.h"
#include "test_support.h"

namespace dpg {
namespace {

using testing::config;

TEST(Registry, ListsAllScenarios) {
  const auto& reg = scenario_registry();
  ASSERT_EQ(reg.size(), 5u);
  EXPECT_EQ(find_scenario("smart-grid").route, SolverRoute::kLq);
  EXPECT_EQ(find_scenario("mac").route, SolverRoute::kTrajOpt);
  EXPECT_EQ(find_scenario("equal-rate").route, SolverRoute::kValueIteration);
  EXPECT_THROW(find_scenario("nope"), SpecificationError);
  for (const auto& id : testing::scenario_ids()) EXPECT_EQ(build_scenario(config(id)).id, id);
}

TEST(Dimensions, MatchTheModels) {
  struct Want {
    const char* id;
    int players, n, m;
  };
  for (Want w : {Want{"smart-grid", 8, 8, 48}, Want{"network-flow", 2, 4, 8},
                 Want{"mac", 4, 4, 4}, Want{"prop-fair", 2, 2, 2},
                 Want{"equal-rate", 2, 2, 2}}) {
    auto b = build_scenario(config(w.id));
    SCOPED_TRACE(w.id);
    EXPECT_EQ(b.game.num_players(), w.players);
    EXPECT_EQ(b.game.system.state_dim, w.n);
    EXPECT_EQ(b.game.system.action_dim, w.m);
    EXPECT_NO_THROW(b.game.validate());
    EXPECT_EQ(b.mocp.system.state_dim, w.n);
    ASSERT_TRUE(b.problem.has_value());
  }
}

TEST(Schema, RejectsUnknownAndMistypedValues) {
  EXPECT_THROW(build_mac(config("mac", 7, {{"users", std::int64_t{3}}})), ValidationError);
  EXPECT_THROW(build_mac(config("mac", 7, {{"num_users", 2.5}})), ValidationError);
  EXPECT_THROW(build_mac(config("mac", 7, {{"alpha", true}})), ValidationError);
  EXPECT_THROW(build_mac(config("mac", 7, {{"num_users", std::int64_t{3}}})), ValidationError);
  EXPECT_THROW(build_network_flow(config("network-flow", 7, {{"c_max", 1.0}})),
               ValidationError);
  EXPECT_THROW(build_prop_fair(config("prop-fair", 7, {{"channel_offset", 0.5}})),
               ValidationError);
  EXPECT_THROW(build_equal_rate(config("equal-rate", 7, {{"alpha", 1.5}})), ValidationError);
  EXPECT_THROW(build_smart_grid(config("smart-grid", 7, {{"action_limit", 0.0}})),
               ValidationError);
  // Integers widen to reals and integral reals narrow to integers.
  auto b = build_mac(config("mac", 7, {{"battery_max", std::int64_t{10}}, {"horizon", 12.0}}));
  EXPECT_EQ(b.params.get_double("battery_max"), 10.0);
  EXPECT_EQ(b.horizon, 12);
}

TEST(Builders, ArePureFunctionsOfConfigAndSeed) {
  std::mt19937_64 rng(5);
  for (const auto& id : testing::scenario_ids()) {
    auto a = build_scenario(config(id));
    auto b = build_scenario(config(id));
    const auto& box = a.sample_plan;
    for (int k = 0; k < 5; ++k) {
      Vec x = testing::random_action(box.state_box, rng);
      Vec u = testing::random_action(box.action_box, rng);
      EXPECT_EQ(a.mocp.potential(x, u, 1), b.mocp.potential(x, u, 1)) << id;
      for (int i = 0; i < a.game.num_players(); ++i)
        EXPECT_EQ(a.game.utility(i, x, u, 1), b.game.utility(i, x, u, 1)) << id;
    }
  }
  auto s7 = build_smart_grid(config("smart-grid", 7));
  auto s8 = build_smart_grid(config("smart-grid", 8));
  EXPECT_EQ(s7.lq->A, build_smart_grid(config("smart-grid", 7)).lq->A);
  EXPECT_NE(s7.lq->A, s8.lq->A);
}

TEST(SmartGrid, CostMatricesAreNegativeSemidefinite) {
  auto b = build_smart_grid(config("smart-grid"));
  for (const auto& q : b.lq_params->Qc) {
    Eigen::SelfAdjointEigenSolver<Mat> es(q);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-9);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(b.lq_params->R);
  EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-9);
  EXPECT_FALSE(b.infinite_horizon);
}

TEST(NetworkFlow, TopologyAndHorizon) {
  Mat M = network_flow_connectivity();
  ASSERT_EQ(M.rows(), 6);
  ASSERT_EQ(M.cols(), 8);
  for (int c = 0; c < 8; ++c) EXPECT_EQ(M.col(c).sum(), 3.0);
  EXPECT_EQ(M.row(4).sum(), 4.0);
  EXPECT_EQ(M.row(4).head(4).sum(), 4.0);
  EXPECT_EQ(M.row(5).tail(4).sum(), 4.0);
  EXPECT_EQ(M.topRows(4).sum(), 16.0);
  // 1.25 * 1 / (0.05 * 0.15), rounded up
  auto b = build_network_flow(config("network-flow"));
  EXPECT_EQ(b.horizon, 167);
  EXPECT_FALSE(b.infinite_horizon);
  auto d0 = build_network_flow(config("network-flow", 7, {{"delta", 0.0}}));
  EXPECT_TRUE(d0.infinite_horizon);
  EXPECT_EQ(d0.horizon, 120);
  auto fixed = build_network_flow(config("network-flow", 7, {{"horizon", std::int64_t{30}}}));
  EXPECT_EQ(fixed.horizon, 30);
}

TEST(NetworkFlow, ActionBoxFollowsCapacities) {
  auto b = build_network_flow(config("network-flow"));
  // Path a of source i is capped by its two relay links and its source link.
  const double c[6] = {0.5, 0.15, 0.5, 0.15, 0.4, 0.4};
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 4; ++a) {
      double want = std::min({c[a / 2], c[2 + a % 2], c[4 + i]});
      EXPECT_EQ(b.game.system.action_bounds[i * 4 + a].hi, want);
    }
}

TEST(NetworkFlow, TableColumns) {
  auto b = build_network_flow(config("network-flow", 7, {{"horizon", std::int64_t{3}}}));
  Vec u = Vec::Zero(8);
  u[0] = 0.1;
  auto tr = rollout(b.game, std::vector<Vec>(3, u), 3);
  Table tab = b.trajectory_table(tr);
  ASSERT_EQ(tab.header.size(), 1u + 8 + 6 + 4);
  EXPECT_EQ(tab.header[9], "L1");
  EXPECT_EQ(tab.header[14], "L6");
  EXPECT_EQ(tab.header[15], "x_N1");
  ASSERT_EQ(tab.rows.size(), 3u);
  EXPECT_EQ(tab.rows[0][9], 0.1);   // L1 carries path 1 of source 1
  EXPECT_EQ(tab.rows[0][13], 0.1);  // as does L5
  EXPECT_EQ(tab.rows[0][14], 0.0);
  EXPECT_NEAR(tab.rows[2][15], 1.0 - 2 * 0.05 * 0.1, 1e-15);
}

TEST(Mac, ZeroAlphaDropsTheBatteryTerm) {
  auto b = build_mac(config("mac", 7, {{"alpha", 0.0}}));
  Vec u = Vec::Constant(4, 1.0);
  EXPECT_EQ(b.game.utility(0, Vec::Constant(4, 1.0), u, 0),
            b.game.utility(0, Vec::Constant(4, 30.0), u, 0));
  auto d0 = build_mac(config("mac", 7, {{"delta", 0.0}}));
  EXPECT_EQ(d0.game.system.step(d0.game.system.initial_state, u, 0),
            d0.game.system.initial_state);
}

TEST(Mac, EqualGainsGiveASymmetricGame) {
  auto b = build_mac(config("mac", 7, {{"gains", std::vector<double>{1.0, 1.0, 1.0, 1.0}}}));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    Vec x = testing::random_action(b.sample_plan.state_box, rng);
    Vec u = testing::random_action(b.sample_plan.action_box, rng);
    Vec xs = x, us = u;
    std::swap(xs[0], xs[2]);
    std::swap(us[0], us[2]);
    EXPECT_NEAR(b.game.utility(0, x, u, 0), b.game.utility(2, xs, us, 0), 1e-14);
  }
}

TEST(Mac, PotentialMatchesOwnActionGradients) {
  auto b = build_mac(config("mac"));
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    Vec x = testing::random_action(b.sample_plan.state_box, rng);
    Vec u = testing::random_action(b.sample_plan.action_box, rng);
    Vec px, pu;
    b.mocp.potential.gradient(x, u, 0, &px, &pu);
    for (int i = 0; i < 4; ++i) {
      Vec gx, gu;
      b.game.utilities[i].gradient(x.segment(i, 1), u, 0, &gx, &gu);
      EXPECT_NEAR(pu[i], gu[i], 1e-13);
      EXPECT_NEAR(px[i], gx[0], 1e-15);
    }
    // closed form log(1 + sum g^2 u) + alpha sum x
    const double g[4] = {2.019, 1.002, 0.514, 0.308};
    double s = 1.0;
    for (int i = 0; i < 4; ++i) s += g[i] * g[i] * u[i];
    EXPECT_NEAR(b.mocp.potential(x, u, 0), std::log(s) + 0.001 * x.sum(), 1e-13);
  }
}

TEST(Mac, TableHasRates) {
  auto b = build_mac(config("mac", 7, {{"horizon", std::int64_t{2}}}));
  Vec u = Vec::Zero(4);
  u[1] = 2.0;
  auto tab = b.trajectory_table(rollout(b.game, std::vector<Vec>(2, u), 2));
  ASSERT_EQ(tab.header.size(), 13u);
  EXPECT_EQ(tab.header[1], "u_1");
  EXPECT_EQ(tab.header[5], "x_1");
  EXPECT_EQ(tab.header[9], "R_1");
  EXPECT_NEAR(tab.rows[0][10], std::log1p(1.002 * 1.002 * 2.0), 1e-14);
  EXPECT_EQ(tab.rows[1][6], 31.0);
}

TEST(Scheduling, ChannelModel) {
  auto b = build_prop_fair(config("prop-fair"));
  EXPECT_NEAR(scheduling_channel(b.params, 0, 5), 4.5, 1e-14);
  EXPECT_NEAR(scheduling_channel(b.params, 1, 0), 1.5, 1e-14);
  EXPECT_NEAR(scheduling_channel(b.params, 1, 25), scheduling_channel(b.params, 1, 5), 1e-14);
  EXPECT_THROW(single_user_reference(build_mac(config("mac"))), SpecificationError);
}

TEST(PropFair, AverageRestartsEveryPeriod) {
  auto b = build_prop_fair(config("prop-fair"));
  const auto& sys = b.game.system;
  Vec u(2);
  u << 3.0, 1.0;
  Vec x = sys.initial_state;
  Vec acc = Vec::Zero(2);
  for (int t = 0; t < 20; ++t) {
    const double g1 = scheduling_channel(b.params, 0, t), g2 = scheduling_channel(b.params, 1, t);
    Vec r(2);
    r << std::log1p(g1 * 3.0 / (1.0 + g2)), std::log1p(g2 * 1.0 / (1.0 + 3.0 * g1));
    x = sys.step(x, u, t);
    if (t == 0) {
      EXPECT_NEAR((x - r).norm(), 0.0, 1e-14);
      continue;
    }
    // Slot tau >= 1 averages the rates of slots 1..tau.
    acc += r;
    EXPECT_NEAR((x - acc / t).norm(), 0.0, 1e-12) << t;
  }
  Vec r0 = sys.step(Vec::Constant(2, 9.0), u, 20);
  EXPECT_NEAR((sys.step(Vec::Zero(2), u, 0) - r0).norm(), 0.0, 1e-14);
  // Utility of a user is its own running average.
  Vec xx(2);
  xx << 0.3, 0.8;
  EXPECT_EQ(b.game.utility(1, xx, u, 4), 0.8);
  EXPECT_EQ(b.mocp.potential(xx, u, 4), 1.1);
}

TEST(EqualRate, SymmetricUsersAndCumulativeState) {
  auto b = build_equal_rate(config(
      "equal-rate", 7,
      {{"channel_offset", std::vector<double>{2.0, 2.0}},
       {"channel_amplitude", std::vector<double>{1.0, 1.0}},
       {"channel_period", std::vector<double>{20.0, 20.0}}}));
  Vec x(2), u(2), xs(2), us(2);
  x << 1.0, 3.0;
  u << 4.0, 0.5;
  xs << 3.0, 1.0;
  us << 0.5, 4.0;
  EXPECT_NEAR(b.game.utility(0, x, u, 3), b.game.utility(1, xs, us, 3), 1e-14);
  EXPECT_NEAR(b.mocp.potential(x, u, 3), b.mocp.potential(xs, us, 3), 1e-14);
  // alpha = 0.9: the rate gap costs 0.9 * 4 = 3.6 at zero power.
  EXPECT_NEAR(b.mocp.potential(x, Vec::Zero(2), 0), -3.6, 1e-14);
  Vec step = b.game.system.step(x, u, 3) - x;
  const double g = scheduling_channel(b.params, 0, 3);
  EXPECT_NEAR(step[0], std::log1p(4.0 * g / (1.0 + 0.5 * g)), 1e-14);
}

TEST(Scheduling, GridCoversTheSingleUserRange) {
  auto pf = build_prop_fair(config("prop-fair"));
  auto er = build_equal_rate(config("equal-rate"));
  for (int i = 0; i < 2; ++i) {
    double best = 0.0, total = 0.0;
    for (int t = 0; t < 20; ++t) {
      double r = std::log1p(scheduling_channel(pf.params, i, t) * 5.0);
      best = std::max(best, r);
      total += r;
    }
    EXPECT_NEAR(pf.grid->state_axes[i].hi, best, 1e-14);
    EXPECT_NEAR(er.grid->state_axes[i].hi, total, 1e-12);
    EXPECT_NEAR(single_user_reference(er)[i], total, 1e-12);
  }
  EXPECT_EQ(pf.grid->time_slots, 20);
  EXPECT_EQ(pf.grid->action_axes[0].points, 20);
}

}  // namespace
}  // namespace dpg
