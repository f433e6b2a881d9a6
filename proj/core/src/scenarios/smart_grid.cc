// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <string>

#include "dpg/errors.h"
#include "dpg/scenarios.h"

namespace dpg {

std::vector<ParamSpec> smart_grid_schema() {
  return {
      {"num_players", ParamType::kInt, std::int64_t{8}, "Q"},
      {"num_resources", ParamType::kInt, std::int64_t{4}, "S"},
      {"num_activities", ParamType::kInt, std::int64_t{6}, "A^i, same for all"},
      {"discount", ParamType::kDouble, 0.9, "beta"},
      {"initial_level", ParamType::kDouble, 1.0, "every entry of x_0"},
      {"demand_cost_scale", ParamType::kDouble, 10.0,
       "Q_i = -M'M with M ~ U[0, scale]"},
      {"balance_cost_scale", ParamType::kDouble, 5.0,
       "R = -M'M with M ~ U[0, scale]"},
      {"action_limit", ParamType::kDouble, 100.0, "box on every u~ entry"},
      {"horizon", ParamType::kInt, std::int64_t{200}, "simulation length"},
      {"sample_half_width", ParamType::kDouble, 0.1,
       "half width of the potential-check sampling box"},
  };
}

ScenarioBundle build_smart_grid(const ScenarioConfig& cfg) {
  ScenarioBundle b;
  b.id = "smart-grid";
  b.route = SolverRoute::kLq;
  b.seed = cfg.seed;
  b.params = resolve_parameters(smart_grid_schema(), cfg.overrides);
  const auto& p = b.params;
  const int q = static_cast<int>(p.get_int("num_players"));
  const int s = static_cast<int>(p.get_int("num_resources"));
  const int a = static_cast<int>(p.get_int("num_activities"));
  if (q < 1 || s < 1 || a < 1)
    throw ValidationError("smart-grid dimensions must be positive");
  b.horizon = static_cast<int>(p.get_int("horizon"));
  if (b.horizon < 1) throw ValidationError("horizon must be >= 1");
  b.action_limit = p.get_double("action_limit");
  if (!(b.action_limit > 0.0)) throw ValidationError("action_limit must be > 0");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uq(0.0, p.get_double("demand_cost_scale"));
  std::uniform_real_distribution<double> ur(0.0, p.get_double("balance_cost_scale"));
  auto fill = [&](int r, int c, auto& dist) {
    Mat m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = dist(rng);
    return m;
  };

  LqGameParams lp;
  lp.num_players = q;
  lp.state_dim = s;
  lp.action_dims.assign(q, a);
  lp.discount = p.get_double("discount");
  lp.x0 = Vec::Constant(s, p.get_double("initial_level"));
  lp.C = fill(s, s, normal);
  for (int i = 0; i < q; ++i) {
    lp.B.push_back(fill(s, a, normal));
    lp.D.push_back(fill(a, s, normal));
    Mat m = fill(a, a, uq);
    lp.Qc.push_back(-m.transpose() * m);
  }
  Mat m = fill(s, s, ur);
  lp.R = -m.transpose() * m;

  b.lq_params = lp;
  b.lq = augment_lq(lp);
  b.game = lq_game_spec(*b.lq, b.action_limit);
  b.mocp = lq_mocp_spec(*b.lq, b.action_limit);

  FiniteHorizonProblem fp;
  fp.mocp = b.mocp;
  fp.horizon = b.horizon;
  fp.linear_dynamics = true;
  b.problem = fp;

  const double hw = p.get_double("sample_half_width");
  b.sample_plan.state_box.assign(2 * s, {-hw, hw});
  b.sample_plan.action_box.assign(q * a, {-hw, hw});

  const ActionLayout lay = b.lq->layout();
  b.trajectory_table = [q, s, lay, lq = *b.lq](const Trajectory& tr) {
    Table tab;
    tab.header.push_back("t");
    tab.header.push_back("utility");
    for (int k = 0; k < s; ++k) tab.header.push_back("x_" + std::to_string(k + 1));
    for (int i = 0; i < q; ++i) tab.header.push_back("mismatch_" + std::to_string(i + 1));
    for (int t = 0; t < tr.horizon; ++t) {
      const Vec& x = tr.states[t];
      const Vec& u = tr.actions[t];
      std::vector<double> row = {static_cast<double>(t),
                                 u.dot(lq.Q_block * u) + x.dot(lq.R_tilde * x)};
      for (int k = 0; k < s; ++k) row.push_back(x[k]);
      for (int i = 0; i < q; ++i) row.push_back(lay.segment(u, i).norm());
      tab.rows.push_back(std::move(row));
    }
    return tab;
  };
  return b;
}

}  // namespace dpg
