// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpg/errors.h"
#include "dpg/scenarios.h"

namespace dpg {
namespace {

constexpr int kPlayers = 2;
constexpr int kNodes = 4;
constexpr int kPaths = 4;  // per player
constexpr int kRows = 6;

// Path a of either source visits first-layer node a / 2 and second-layer
// node 2 + a % 2.
bool path_visits(int a, int node) {
  return node == a / 2 || node == 2 + a % 2;
}

}  // namespace

Mat network_flow_connectivity() {
  Mat M = Mat::Zero(kRows, kPlayers * kPaths);
  for (int i = 0; i < kPlayers; ++i) {
    for (int a = 0; a < kPaths; ++a) {
      const int col = i * kPaths + a;
      for (int k = 0; k < kNodes; ++k)
        if (path_visits(a, k)) M(k, col) = 1.0;
      M(kNodes + i, col) = 1.0;  // L5 collects source 1, L6 source 2
    }
  }
  return M;
}

std::vector<ParamSpec> network_flow_schema() {
  return {
      {"battery_max", ParamType::kDouble, 1.0, "B_max of every relay"},
      {"delta", ParamType::kDouble, 0.05, "battery drain per unit flow"},
      {"discount", ParamType::kDouble, 0.9, "beta"},
      {"alpha", ParamType::kDouble, 1.0, "weight of the battery term"},
      {"epsilon", ParamType::kDouble, 0.001, "shift inside the square root"},
      {"c_max", ParamType::kDoubleList,
       std::vector<double>{0.5, 0.15, 0.5, 0.15, 0.4, 0.4},
       "capacities of L1..L6"},
      {"horizon", ParamType::kInt, std::int64_t{0},
       "0 selects the depletion heuristic"},
      {"depletion_margin", ParamType::kDouble, 1.25,
       "safety factor of the horizon heuristic"},
      {"fallback_horizon", ParamType::kInt, std::int64_t{120},
       "horizon used when delta = 0"},
  };
}

ScenarioBundle build_network_flow(const ScenarioConfig& cfg) {
  ScenarioBundle b;
  b.id = "network-flow";
  b.route = SolverRoute::kTrajOpt;
  b.seed = cfg.seed;
  b.params = resolve_parameters(network_flow_schema(), cfg.overrides);
  const auto& p = b.params;
  const double bmax = p.get_double("battery_max");
  const double delta = p.get_double("delta");
  const double alpha = p.get_double("alpha");
  const double eps = p.get_double("epsilon");
  const std::vector<double>& cl = p.get_list("c_max");
  if (cl.size() != kRows) throw ValidationError("c_max needs 6 entries");
  if (!(bmax > 0.0) || delta < 0.0 || alpha < 0.0 || !(eps > 0.0))
    throw ValidationError("network-flow parameters out of range");
  for (double c : cl)
    if (!(c > 0.0)) throw ValidationError("capacities must be positive");
  const Vec c = Eigen::Map<const Vec>(cl.data(), kRows);
  const Mat M = network_flow_connectivity();
  const Mat F = M.topRows(kNodes);  // node k drained by the flows through it
  const int m = kPlayers * kPaths;

  int horizon = static_cast<int>(p.get_int("horizon"));
  b.infinite_horizon = delta == 0.0;
  if (horizon <= 0) {
    if (b.infinite_horizon) {
      horizon = static_cast<int>(p.get_int("fallback_horizon"));
    } else {
      // Slowest node to empty when its inflow sits at capacity.
      double worst = 0.0;
      for (int k = 0; k < kNodes; ++k) worst = std::max(worst, bmax / (delta * c[k]));
      horizon = static_cast<int>(std::ceil(p.get_double("depletion_margin") * worst));
    }
  }
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  b.horizon = horizon;

  ControlSystem sys;
  sys.state_dim = kNodes;
  sys.action_dim = m;
  sys.discount = p.get_double("discount");
  sys.initial_state = Vec::Constant(kNodes, bmax);
  const Mat Fd = -delta * F;
  sys.transition = {"network-flow-battery",
                    [Fd](const Vec& x, const Vec& u, int) -> Vec { return x + Fd * u; },
                    [Fd](const Vec&, const Vec&, int, Mat* fx, Mat* fu) {
                      if (fx) *fx = Mat::Identity(kNodes, kNodes);
                      if (fu) *fu = Fd;
                    }};
  // The box is implied by M u <= c and u >= 0; it keeps the warm start
  // and sampling bounded.
  for (int col = 0; col < m; ++col) {
    double ub = std::numeric_limits<double>::infinity();
    for (int r = 0; r < kRows; ++r)
      if (M(r, col) != 0.0) ub = std::min(ub, c[r]);
    sys.action_bounds.push_back({0.0, ub});
  }
  sys.constraints = {"network-flow-capacity-battery", kRows + 2 * kNodes,
                     [M, c, bmax](const Vec& x, const Vec& u, int) {
                       Vec g(kRows + 2 * kNodes);
                       g << M * u - c, -x, x.array() - bmax;
                       return g;
                     }};

  auto gamma = [eps](double v) { return std::sqrt(eps + v); };
  auto dgamma = [eps](double v) { return 0.5 / std::sqrt(eps + v); };

  DynamicGameSpec& g = b.game;
  g.system = sys;
  g.action_dims.assign(kPlayers, kPaths);
  for (int i = 0; i < kPlayers; ++i) {
    g.player_state_indices.push_back({0, 1, 2, 3});
    const int off = i * kPaths;
    g.utilities.push_back(
        {"network-flow-player-" + std::to_string(i + 1),
         [=](const Vec& x, const Vec& u, int) {
           return gamma(u.segment(off, kPaths).sum()) + alpha * x.sum();
         },
         [=](const Vec& x, const Vec& u, int, Vec* gx, Vec* gu) {
           *gx = Vec::Constant(x.size(), alpha);
           gu->setZero(u.size());
           gu->segment(off, kPaths).setConstant(dgamma(u.segment(off, kPaths).sum()));
         }});
  }

  b.mocp.system = sys;
  b.mocp.potential = {
      "network-flow-potential",
      [=](const Vec& x, const Vec& u, int) {
        double v = alpha * x.sum();
        for (int i = 0; i < kPlayers; ++i) v += gamma(u.segment(i * kPaths, kPaths).sum());
        return v;
      },
      [=](const Vec& x, const Vec& u, int, Vec* gx, Vec* gu) {
        *gx = Vec::Constant(x.size(), alpha);
        gu->resize(u.size());
        for (int i = 0; i < kPlayers; ++i)
          gu->segment(i * kPaths, kPaths)
              .setConstant(dgamma(u.segment(i * kPaths, kPaths).sum()));
      }};

  FiniteHorizonProblem fp;
  fp.mocp = b.mocp;
  fp.horizon = horizon;
  fp.linear_dynamics = true;
  fp.constraints.coupled = {{M, c}};
  fp.constraints.state_bounds.assign(kNodes, {0.0, bmax});
  b.problem = fp;

  b.sample_plan.state_box.assign(kNodes, {0.0, bmax});
  b.sample_plan.action_box = sys.action_bounds;

  b.trajectory_table = [M, m](const Trajectory& tr) {
    Table tab;
    tab.header.push_back("t");
    for (int i = 0; i < kPlayers; ++i)
      for (int a = 0; a < kPaths; ++a)
        tab.header.push_back("u_" + std::to_string(i + 1) + std::to_string(a + 1));
    for (int r = 0; r < kRows; ++r) tab.header.push_back("L" + std::to_string(r + 1));
    for (int k = 0; k < kNodes; ++k) tab.header.push_back("x_N" + std::to_string(k + 1));
    for (int t = 0; t < tr.horizon; ++t) {
      std::vector<double> row = {static_cast<double>(t)};
      const Vec& u = tr.actions[t];
      for (int k = 0; k < m; ++k) row.push_back(u[k]);
      Vec l = M * u;
      for (int r = 0; r < kRows; ++r) row.push_back(l[r]);
      for (int k = 0; k < kNodes; ++k) row.push_back(tr.states[t][k]);
      tab.rows.push_back(std::move(row));
    }
    return tab;
  };
  return b;
}

}  // namespace dpg
