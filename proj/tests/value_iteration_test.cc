// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dpg/errors.h"
#include "dpg/scenarios.h"
#include "dpg/value_iteration.h"
#include "test_support.h"
#include "vi_oracle.h"

namespace dpg {
namespace {

using testing::brute_force_values;
using testing::random_mdp;

void expect_matches_oracle(const GridSpec& spec, const MocpSpec& mocp, double tol) {
  Grid grid(spec);
  ViOptions o;
  o.epsilon = 1e-13;
  auto vi = value_iterate(grid, mocp, o);
  ASSERT_TRUE(vi.converged);
  auto ref = brute_force_values(spec, mocp);
  ASSERT_EQ(ref.size(), vi.value.V.size());
  for (size_t s = 0; s < ref.size(); ++s) EXPECT_NEAR(vi.value.V[s], ref[s], tol) << s;
}

TEST(Grid, FullScaleStateCount) {
  GridSpec spec;
  spec.state_axes.assign(2, {0.0, 1.0, 30});
  spec.action_axes.assign(2, {0.0, 5.0, 20});
  spec.time_slots = 20;
  EXPECT_EQ(build_grid(spec).num_states(), 18000);
  auto b = build_prop_fair(testing::config("prop-fair"));
  EXPECT_EQ(Grid(*b.grid).num_states(), 18000);
}

TEST(Grid, DegenerateAxes) {
  GridSpec spec;
  spec.state_axes = {{0.5, 0.5, 1}, {2.0, 2.0, 1}};
  spec.action_axes = {{0.0, 0.0, 1}};
  Grid g(spec);
  EXPECT_EQ(g.num_spatial(), 1);
  EXPECT_EQ(g.snap(Vec::Constant(2, 9.0)), 0);
  spec.state_axes[0].points = 0;
  EXPECT_THROW(build_grid(spec), SpecificationError);
}

TEST(Grid, SnapIsIdempotentWithLowerTies) {
  GridAxis a{0.0, 1.0, 5};
  for (int k = 0; k < 5; ++k) EXPECT_EQ(a.snap(a.value(k)), k);
  EXPECT_EQ(a.snap(0.125), 0);  // halfway between 0 and 0.25
  EXPECT_EQ(a.snap(0.125 + 1e-15), 0);
  EXPECT_EQ(a.snap(0.375 - 1e-15), 1);
  EXPECT_EQ(a.snap(0.3751), 2);
  bool c = false;
  EXPECT_EQ(a.snap(1.4, &c), 4);
  EXPECT_TRUE(c);
  GridSpec spec;
  spec.state_axes = {{0.0, 1.0, 5}, {-1.0, 1.0, 3}};
  spec.action_axes = {{0.0, 1.0, 2}};
  Grid g(spec);
  for (int s = 0; s < g.num_spatial(); ++s) EXPECT_EQ(g.snap(g.point(s)), s);
}

TEST(AugmentTime, WrapsAtLastSlot) {
  Transition f{"id", [](const Vec& x, const Vec&, int) -> Vec { return x; }};
  const int T = 7;
  auto ft = augment_time(f, T);
  EXPECT_EQ(ft(Vec::Zero(1), T, Vec::Zero(1)).second, 0);
  EXPECT_EQ(ft(Vec::Zero(1), 3, Vec::Zero(1)).second, 4);
  int t = 2;
  for (int k = 0; k < T + 1; ++k) t = ft(Vec::Zero(1), t, Vec::Zero(1)).second;
  EXPECT_EQ(t, 2);
}

MocpSpec constant_mocp(double value, double beta) {
  MocpSpec m;
  m.system.state_dim = 1;
  m.system.action_dim = 1;
  m.system.discount = beta;
  m.system.initial_state = Vec::Zero(1);
  m.system.action_bounds = {{0.0, 1.0}};
  m.system.transition = {"id", [](const Vec& x, const Vec&, int) -> Vec { return x; }};
  m.potential = {"c", [value](const Vec&, const Vec&, int) { return value; }};
  return m;
}

TEST(ValueIterate, GeometricSeries) {
  GridSpec spec;
  spec.state_axes = {{0.0, 0.0, 1}};
  spec.action_axes = {{0.0, 0.0, 1}};
  ViOptions o;
  o.epsilon = 1e-10;
  auto vi = value_iterate(Grid(spec), constant_mocp(1.0, 0.95), o);
  EXPECT_NEAR(vi.value.V[0], 20.0, 1e-8);
}

TEST(ValueIterate, ZeroUtilityIsZero) {
  GridSpec spec;
  spec.state_axes = {{0.0, 1.0, 4}};
  spec.action_axes = {{0.0, 1.0, 3}};
  spec.time_slots = 2;
  Grid g(spec);
  auto m = constant_mocp(0.0, 0.9);
  auto vi = value_iterate(g, m);
  for (double v : vi.value.V) EXPECT_EQ(v, 0.0);
  for (int a : vi.policy.action) EXPECT_EQ(a, 0);
  auto ro = greedy_policy_rollout(vi.policy, g, m, Vec::Constant(1, 1.0 / 3.0), 5);
  for (const auto& u : ro.traj.actions) EXPECT_EQ(u[0], 0.0);
}

// a = 0, b = 1 (absorbing); action 0 = go to b, action 1 = stay.
TEST(ValueIterate, TwoStateChain) {
  MocpSpec m;
  m.system.state_dim = 1;
  m.system.action_dim = 1;
  m.system.discount = 0.5;
  m.system.initial_state = Vec::Zero(1);
  m.system.action_bounds = {{0.0, 1.0}};
  m.system.transition = {"chain", [](const Vec& x, const Vec& u, int) -> Vec {
                           return Vec::Constant(1, x[0] == 1.0 || u[0] == 0.0 ? 1.0 : 0.0);
                         }};
  m.potential = {"chain", [](const Vec& x, const Vec& u, int) {
                   if (x[0] == 1.0) return 0.0;
                   return u[0] == 0.0 ? 2.0 : 1.0;
                 }};
  GridSpec spec;
  spec.state_axes = {{0.0, 1.0, 2}};
  spec.action_axes = {{0.0, 1.0, 2}};
  auto vi = value_iterate(Grid(spec), m);
  EXPECT_EQ(vi.value.V[0], 2.0);
  EXPECT_EQ(vi.value.V[1], 0.0);
  EXPECT_EQ(vi.policy.action[0], 0);
}

TEST(ValueIterate, RandomInstancesMatchBruteForce) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 20; ++k) {
    auto m = random_mdp(rng);
    SCOPED_TRACE(k);
    expect_matches_oracle(m.spec, m.mocp, 1e-9);
  }
}

TEST(ValueIterate, ConstantChannelSchedulingMatchesBruteForce) {
  auto b = build_prop_fair(testing::config(
      "prop-fair", 7,
      {{"channel_amplitude", std::vector<double>{0.0, 0.0}}, {"grid_points", std::int64_t{5}},
       {"power_levels", std::int64_t{3}}, {"period", std::int64_t{4}}}));
  ASSERT_LE(Grid(*b.grid).num_states(), 100);
  expect_matches_oracle(*b.grid, b.mocp, 1e-9);
}

TEST(ValueIterate, ContractionAndExitResidual) {
  auto b = build_equal_rate(testing::config(
      "equal-rate", 7, {{"grid_points", std::int64_t{8}}, {"power_levels", std::int64_t{5}}}));
  ViOptions o;
  o.epsilon = 1e-6;
  auto vi = value_iterate(Grid(*b.grid), b.mocp, o);
  ASSERT_TRUE(vi.converged);
  const auto& h = vi.value.delta_history;
  const double beta = b.mocp.system.discount;
  double vmax = 0.0;
  for (double v : vi.value.V) vmax = std::max(vmax, std::abs(v));
  const double roundoff = 1e-13 * vmax;
  for (size_t k = 1; k < h.size(); ++k) EXPECT_LE(h[k], beta * h[k - 1] + roundoff) << k;
  EXPECT_LE(vi.value.delta, o.epsilon);
  EXPECT_LE(vi.value.bellman_residual, o.epsilon * (1.0 + beta));
}

TEST(ValueIterate, DeterministicAcrossThreadCounts) {
  auto b = build_prop_fair(testing::config(
      "prop-fair", 7, {{"grid_points", std::int64_t{10}}, {"power_levels", std::int64_t{6}}}));
  ViOptions one, four;
  one.epsilon = four.epsilon = 1e-5;
  four.threads = 4;
  auto a = value_iterate(Grid(*b.grid), b.mocp, one);
  auto c = value_iterate(Grid(*b.grid), b.mocp, one);
  auto d = value_iterate(Grid(*b.grid), b.mocp, four);
  EXPECT_EQ(a.value.V, c.value.V);
  EXPECT_EQ(a.value.V, d.value.V);
  EXPECT_EQ(a.policy.action, d.policy.action);
}

TEST(ValueIterate, NonFinitePotentialNamesState) {
  auto m = constant_mocp(std::numeric_limits<double>::quiet_NaN(), 0.9);
  GridSpec spec;
  spec.state_axes = {{0.0, 1.0, 3}};
  spec.action_axes = {{0.0, 1.0, 2}};
  EXPECT_THROW(value_iterate(Grid(spec), m), NumericalDomainError);
}

TEST(PolicyRollout, ClampsOutsideTheBox) {
  MocpSpec m = constant_mocp(0.0, 0.9);
  m.system.transition.value = [](const Vec& x, const Vec&, int) -> Vec { return x.array() + 0.6; };
  GridSpec spec;
  spec.state_axes = {{0.0, 1.0, 3}};
  spec.action_axes = {{0.0, 1.0, 2}};
  Grid g(spec);
  auto vi = value_iterate(g, m);
  auto ro = greedy_policy_rollout(vi.policy, g, m, Vec::Zero(1), 4);
  EXPECT_EQ(ro.clamped, 2);  // x = 1.2 and 1.8 lie above the box
  EXPECT_NEAR(ro.traj.states.back()[0], 2.4, 1e-15);
  EXPECT_EQ(ro.snapped, (std::vector<int>{0, 1, 2, 2}));
}

TEST(GridBestResponse, FindsConstantLevelAgainstSilence) {
  auto b = build_prop_fair(testing::config("prop-fair"));
  const int T = b.horizon;
  auto tr = rollout(b.game, std::vector<Vec>(T, Vec::Zero(2)), T);
  auto br = grid_best_response(b.game, Grid(*b.grid), tr, 0);
  EXPECT_GT(br.improvement, 0.0);
  EXPECT_EQ(br.current_return, 0.0);
  auto again = rollout(b.game,
                       [&] {
                         std::vector<Vec> u(T, Vec::Zero(2));
                         for (int t = 0; t < T; ++t) u[t][0] = br.deviation[t][0];
                         return u;
                       }(),
                       T);
  EXPECT_NEAR(again.per_player_returns[0], br.best_return, 1e-12);
}

}  // namespace
}  // namespace dpg
