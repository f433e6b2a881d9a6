// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "dpg/errors.h"
#include "dpg/scenarios.h"

namespace dpg {

std::vector<ParamSpec> mac_schema() {
  return {
      {"num_users", ParamType::kInt, std::int64_t{4}, "Q"},
      {"battery_max", ParamType::kDouble, 33.0, "B_max of every user"},
      {"power_max", ParamType::kDouble, 5.0, "P_max of every user"},
      {"alpha", ParamType::kDouble, 0.001, "weight of the battery term"},
      {"delta", ParamType::kDouble, 1.0, "battery drain per unit power"},
      {"discount", ParamType::kDouble, 0.95, "beta"},
      {"gains", ParamType::kDoubleList,
       std::vector<double>{2.019, 1.002, 0.514, 0.308}, "|h^i|, one per user"},
      {"horizon", ParamType::kInt, std::int64_t{80}, "finite horizon T"},
  };
}

ScenarioBundle build_mac(const ScenarioConfig& cfg) {
  ScenarioBundle b;
  b.id = "mac";
  b.route = SolverRoute::kTrajOpt;
  b.seed = cfg.seed;
  b.params = resolve_parameters(mac_schema(), cfg.overrides);
  const auto& p = b.params;
  const int q = static_cast<int>(p.get_int("num_users"));
  const double bmax = p.get_double("battery_max");
  const double pmax = p.get_double("power_max");
  const double alpha = p.get_double("alpha");
  const double delta = p.get_double("delta");
  const auto& gl = p.get_list("gains");
  if (q < 1) throw ValidationError("num_users must be >= 1");
  if (static_cast<int>(gl.size()) != q)
    throw ValidationError("gains needs one entry per user");
  if (!(bmax > 0.0) || !(pmax > 0.0) || delta < 0.0)
    throw ValidationError("mac parameters out of range");
  b.horizon = static_cast<int>(p.get_int("horizon"));
  if (b.horizon < 1) throw ValidationError("horizon must be >= 1");
  Vec g2(q);
  for (int i = 0; i < q; ++i) g2[i] = gl[i] * gl[i];

  ControlSystem sys;
  sys.state_dim = q;
  sys.action_dim = q;
  sys.discount = p.get_double("discount");
  sys.initial_state = Vec::Constant(q, bmax);
  sys.transition = {"mac-battery",
                    [delta](const Vec& x, const Vec& u, int) -> Vec { return x - delta * u; },
                    [q, delta](const Vec&, const Vec&, int, Mat* fx, Mat* fu) {
                      if (fx) *fx = Mat::Identity(q, q);
                      if (fu) *fu = -delta * Mat::Identity(q, q);
                    }};
  sys.action_bounds.assign(q, {0.0, pmax});
  sys.constraints = {"mac-battery-range", 2 * q,
                     [q, bmax](const Vec& x, const Vec&, int) {
                       Vec g(2 * q);
                       g << -x, x.array() - bmax;
                       return g;
                     }};

  DynamicGameSpec& g = b.game;
  g.system = sys;
  g.action_dims.assign(q, 1);
  for (int i = 0; i < q; ++i) {
    g.player_state_indices.push_back({i});
    g.utilities.push_back(
        {"mac-user-" + std::to_string(i + 1),
         [=](const Vec& x, const Vec& u, int) {
           double others = 1.0 + g2.dot(u) - g2[i] * u[i];
           return std::log1p(g2[i] * u[i] / others) + alpha * x[0];
         },
         [=](const Vec& x, const Vec& u, int, Vec* gx, Vec* gu) {
           double all = 1.0 + g2.dot(u);
           double others = all - g2[i] * u[i];
           *gx = Vec::Constant(x.size(), alpha);
           *gu = g2 / all - g2 / others;
           (*gu)[i] = g2[i] / all;
         }});
  }

  b.mocp.system = sys;
  b.mocp.potential = {"mac-potential",
                      [=](const Vec& x, const Vec& u, int) {
                        return std::log(1.0 + g2.dot(u)) + alpha * x.sum();
                      },
                      [=](const Vec& x, const Vec& u, int, Vec* gx, Vec* gu) {
                        *gx = Vec::Constant(x.size(), alpha);
                        *gu = g2 / (1.0 + g2.dot(u));
                      }};

  FiniteHorizonProblem fp;
  fp.mocp = b.mocp;
  fp.horizon = b.horizon;
  fp.linear_dynamics = true;
  fp.constraints.state_bounds.assign(q, {0.0, bmax});
  b.problem = fp;

  b.sample_plan.state_box.assign(q, {0.0, bmax});
  b.sample_plan.action_box.assign(q, {0.0, pmax});

  b.trajectory_table = [q, g2](const Trajectory& tr) {
    Table tab;
    tab.header.push_back("t");
    for (const char* c : {"u_", "x_", "R_"})
      for (int i = 0; i < q; ++i) tab.header.push_back(c + std::to_string(i + 1));
    for (int t = 0; t < tr.horizon; ++t) {
      const Vec& u = tr.actions[t];
      std::vector<double> row = {static_cast<double>(t)};
      for (int i = 0; i < q; ++i) row.push_back(u[i]);
      for (int i = 0; i < q; ++i) row.push_back(tr.states[t][i]);
      const double all = 1.0 + g2.dot(u);
      for (int i = 0; i < q; ++i)
        row.push_back(std::log1p(g2[i] * u[i] / (all - g2[i] * u[i])));
      tab.rows.push_back(std::move(row));
    }
    return tab;
  };
  return b;
}

}  // namespace dpg
