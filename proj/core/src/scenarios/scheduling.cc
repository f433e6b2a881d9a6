// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Proportional-fair and equal-rate scheduling share the channel model, the
// action grid and the time convention; only state dynamics and utilities
// differ.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dpg/errors.h"
#include "dpg/scenarios.h"

namespace dpg {
namespace {

std::vector<ParamSpec> common_schema() {
  return {
      {"power_max", ParamType::kDouble, 5.0, "P_max of both users"},
      {"power_levels", ParamType::kInt, std::int64_t{20}, "levels in [0, P_max]"},
      {"grid_points", ParamType::kInt, std::int64_t{30}, "grid points per user"},
      {"period", ParamType::kInt, std::int64_t{20},
       "time slots; tau = t mod period"},
      {"discount", ParamType::kDouble, 0.95, "beta"},
      {"channel_offset", ParamType::kDoubleList, std::vector<double>{2.5, 1.5},
       "|h^i|^2 = offset + amplitude sin(2 pi tau / channel_period)"},
      {"channel_amplitude", ParamType::kDoubleList, std::vector<double>{2.0, 1.0}, ""},
      {"channel_period", ParamType::kDoubleList, std::vector<double>{20.0, 10.0}, ""},
      {"horizon", ParamType::kInt, std::int64_t{20}, "rollout length"},
  };
}

struct Channels {
  int users = 0;
  int period = 1;
  std::vector<double> offset, amp, per;

  double gain(int i, int t) const {
    int tau = ((t % period) + period) % period;
    return offset[i] + amp[i] * std::sin(2.0 * std::numbers::pi * tau / per[i]);
  }
  Vec gains(int t) const {
    Vec g(users);
    for (int i = 0; i < users; ++i) g[i] = gain(i, t);
    return g;
  }
  int tau(int t) const { return ((t % period) + period) % period; }
};

Channels read_channels(const ParameterSet& p) {
  Channels ch;
  ch.offset = p.get_list("channel_offset");
  ch.amp = p.get_list("channel_amplitude");
  ch.per = p.get_list("channel_period");
  ch.users = static_cast<int>(ch.offset.size());
  ch.period = static_cast<int>(p.get_int("period"));
  if (ch.users < 1 || ch.amp.size() != ch.offset.size() ||
      ch.per.size() != ch.offset.size())
    throw ValidationError("channel lists must have one entry per user");
  if (ch.period < 1) throw ValidationError("period must be >= 1");
  for (int i = 0; i < ch.users; ++i) {
    if (!(ch.per[i] > 0.0)) throw ValidationError("channel periods must be positive");
    if (ch.offset[i] - std::abs(ch.amp[i]) < 0.0)
      throw ValidationError("channel offset must dominate its amplitude");
  }
  return ch;
}

// log(1 + g_i u_i / (1 + sum_{j != i} g_j u_j))
Vec rates(const Vec& g, const Vec& u) {
  const double all = 1.0 + g.dot(u);
  Vec r(g.size());
  for (int i = 0; i < g.size(); ++i) r[i] = std::log1p(g[i] * u[i] / (all - g[i] * u[i]));
  return r;
}

// dR_i/du (row i)
Mat rate_jacobian(const Vec& g, const Vec& u) {
  const int q = static_cast<int>(g.size());
  const double all = 1.0 + g.dot(u);
  Mat J(q, q);
  for (int i = 0; i < q; ++i) {
    const double others = all - g[i] * u[i];
    for (int j = 0; j < q; ++j) J(i, j) = g[j] / all - g[j] / others;
    J(i, i) = g[i] / all;
  }
  return J;
}

enum class Kind { kPropFair, kEqualRate };

ScenarioBundle build_scheduling(const ScenarioConfig& cfg, Kind kind) {
  ScenarioBundle b;
  b.id = kind == Kind::kPropFair ? "prop-fair" : "equal-rate";
  b.route = SolverRoute::kValueIteration;
  b.seed = cfg.seed;
  b.params = resolve_parameters(
      kind == Kind::kPropFair ? prop_fair_schema() : equal_rate_schema(),
      cfg.overrides);
  const auto& p = b.params;
  const Channels ch = read_channels(p);
  const int q = ch.users;
  const double pmax = p.get_double("power_max");
  const int levels = static_cast<int>(p.get_int("power_levels"));
  const int points = static_cast<int>(p.get_int("grid_points"));
  if (!(pmax > 0.0) || levels < 1 || points < 1)
    throw ValidationError("scheduling grid parameters out of range");
  b.horizon = static_cast<int>(p.get_int("horizon"));
  if (b.horizon < 1) throw ValidationError("horizon must be >= 1");
  const double alpha = kind == Kind::kEqualRate ? p.get_double("alpha") : 0.0;
  if (alpha < 0.0 || alpha > 1.0) throw ValidationError("alpha must lie in [0, 1]");

  ControlSystem sys;
  sys.state_dim = q;
  sys.action_dim = q;
  sys.discount = p.get_double("discount");
  sys.initial_state = Vec::Zero(q);
  sys.action_bounds.assign(q, {0.0, pmax});
  if (kind == Kind::kPropFair) {
    // Running average restarted every period: x' = R at tau = 0, else
    // x' = (1 - 1/tau) x + R / tau.
    sys.transition = {
        "prop-fair-average",
        [ch](const Vec& x, const Vec& u, int t) -> Vec {
          const int tau = ch.tau(t);
          Vec r = rates(ch.gains(t), u);
          if (tau == 0) return r;
          return (1.0 - 1.0 / tau) * x + r / tau;
        },
        [ch](const Vec& x, const Vec& u, int t, Mat* fx, Mat* fu) {
          const int tau = ch.tau(t);
          const int n = static_cast<int>(x.size());
          Mat J = rate_jacobian(ch.gains(t), u);
          if (tau == 0) {
            if (fx) *fx = Mat::Zero(n, n);
            if (fu) *fu = J;
          } else {
            if (fx) *fx = (1.0 - 1.0 / tau) * Mat::Identity(n, n);
            if (fu) *fu = J / tau;
          }
        }};
  } else {
    sys.transition = {"equal-rate-cumulative",
                      [ch](const Vec& x, const Vec& u, int t) -> Vec {
                        return x + rates(ch.gains(t), u);
                      },
                      [ch](const Vec& x, const Vec& u, int t, Mat* fx, Mat* fu) {
                        if (fx) *fx = Mat::Identity(x.size(), x.size());
                        if (fu) *fu = rate_jacobian(ch.gains(t), u);
                      }};
  }

  DynamicGameSpec& g = b.game;
  g.system = sys;
  g.action_dims.assign(q, 1);
  std::vector<int> all(q);
  for (int i = 0; i < q; ++i) all[i] = i;
  for (int i = 0; i < q; ++i) {
    const std::string name = b.id + "-user-" + std::to_string(i + 1);
    if (kind == Kind::kPropFair) {
      g.player_state_indices.push_back({i});
      g.utilities.push_back({name,
                             [](const Vec& x, const Vec&, int) { return x[0]; },
                             [](const Vec& x, const Vec& u, int, Vec* gx, Vec* gu) {
                               *gx = Vec::Ones(x.size());
                               *gu = Vec::Zero(u.size());
                             }});
    } else {
      // pi^i reads every user's cumulative rate, so X(i) is the full state.
      g.player_state_indices.push_back(all);
      g.utilities.push_back(
          {name,
           [ch, alpha, i](const Vec& x, const Vec& u, int t) {
             double v = (1.0 - alpha) * rates(ch.gains(t), u)[i];
             for (int j = 0; j < x.size(); ++j)
               if (j != i) v -= alpha * (x[i] - x[j]) * (x[i] - x[j]);
             return v;
           },
           [ch, alpha, i](const Vec& x, const Vec& u, int t, Vec* gx, Vec* gu) {
             gx->setZero(x.size());
             for (int j = 0; j < x.size(); ++j) {
               if (j == i) continue;
               double d = 2.0 * alpha * (x[i] - x[j]);
               (*gx)[i] -= d;
               (*gx)[j] += d;
             }
             *gu = (1.0 - alpha) * rate_jacobian(ch.gains(t), u).row(i).transpose();
           }});
    }
  }

  b.mocp.system = sys;
  if (kind == Kind::kPropFair) {
    b.mocp.potential = {"prop-fair-potential",
                        [](const Vec& x, const Vec&, int) { return x.sum(); },
                        [](const Vec& x, const Vec& u, int, Vec* gx, Vec* gu) {
                          *gx = Vec::Ones(x.size());
                          *gu = Vec::Zero(u.size());
                        }};
  } else {
    b.mocp.potential = {
        "equal-rate-potential",
        [ch, alpha](const Vec& x, const Vec& u, int t) {
          double v = (1.0 - alpha) * std::log1p(ch.gains(t).dot(u));
          for (int i = 0; i < x.size(); ++i)
            for (int j = i + 1; j < x.size(); ++j)
              v -= alpha * (x[i] - x[j]) * (x[i] - x[j]);
          return v;
        },
        [ch, alpha](const Vec& x, const Vec& u, int t, Vec* gx, Vec* gu) {
          const Vec gt = ch.gains(t);
          gx->setZero(x.size());
          for (int i = 0; i < x.size(); ++i)
            for (int j = i + 1; j < x.size(); ++j) {
              double d = 2.0 * alpha * (x[i] - x[j]);
              (*gx)[i] -= d;
              (*gx)[j] += d;
            }
          *gu = (1.0 - alpha) * gt / (1.0 + gt.dot(u));
        }};
  }

  // Grid range per user: the single-user maximum rate (average) or its sum
  // over the period (cumulative).
  GridSpec gs;
  gs.time_slots = ch.period;
  for (int i = 0; i < q; ++i) {
    double best = 0.0, total = 0.0;
    for (int tau = 0; tau < ch.period; ++tau) {
      double r = std::log1p(ch.gain(i, tau) * pmax);
      best = std::max(best, r);
      total += r;
    }
    gs.state_axes.push_back({0.0, kind == Kind::kPropFair ? best : total, points});
    gs.action_axes.push_back({0.0, pmax, levels});
  }
  b.grid = gs;

  FiniteHorizonProblem fp;
  fp.mocp = b.mocp;
  fp.horizon = b.horizon;
  b.problem = fp;

  b.sample_plan.state_box.clear();
  for (const auto& ax : gs.state_axes) b.sample_plan.state_box.push_back({ax.lo, ax.hi});
  b.sample_plan.action_box.assign(q, {0.0, pmax});
  b.sample_plan.time_points.clear();
  for (int tau = 0; tau < ch.period; ++tau) b.sample_plan.time_points.push_back(tau);

  b.trajectory_table = [ch, q](const Trajectory& tr) {
    Table tab;
    tab.header.push_back("t");
    tab.header.push_back("tau");
    for (const char* c : {"u_", "x_", "R_", "h2_"})
      for (int i = 0; i < q; ++i) tab.header.push_back(c + std::to_string(i + 1));
    for (int t = 0; t < tr.horizon; ++t) {
      const Vec& u = tr.actions[t];
      Vec gt = ch.gains(t);
      Vec r = rates(gt, u);
      std::vector<double> row = {static_cast<double>(t), static_cast<double>(ch.tau(t))};
      for (int i = 0; i < q; ++i) row.push_back(u[i]);
      for (int i = 0; i < q; ++i) row.push_back(tr.states[t][i]);
      for (int i = 0; i < q; ++i) row.push_back(r[i]);
      for (int i = 0; i < q; ++i) row.push_back(gt[i]);
      tab.rows.push_back(std::move(row));
    }
    return tab;
  };
  return b;
}

}  // namespace

std::vector<ParamSpec> prop_fair_schema() { return common_schema(); }

std::vector<ParamSpec> equal_rate_schema() {
  auto s = common_schema();
  s.push_back({"alpha", ParamType::kDouble, 0.9, "weight of the rate-gap term"});
  return s;
}

ScenarioBundle build_prop_fair(const ScenarioConfig& cfg) {
  return build_scheduling(cfg, Kind::kPropFair);
}

ScenarioBundle build_equal_rate(const ScenarioConfig& cfg) {
  return build_scheduling(cfg, Kind::kEqualRate);
}

double scheduling_channel(const ParameterSet& p, int user, int tau) {
  return read_channels(p).gain(user, tau);
}

Vec single_user_reference(const ScenarioBundle& b) {
  if (b.id != "prop-fair" && b.id != "equal-rate")
    throw SpecificationError("single-user reference is defined for scheduling only");
  const int q = b.game.system.state_dim;
  const int period = static_cast<int>(b.params.get_int("period"));
  const double pmax = b.params.get_double("power_max");
  Vec ref(q);
  for (int i = 0; i < q; ++i) {
    Vec x = b.game.system.initial_state;
    for (int t = 0; t < period; ++t) {
      Vec u = Vec::Zero(q);
      u[i] = pmax;
      x = b.game.system.step(x, u, t);
    }
    ref[i] = x[i];
  }
  return ref;
}

}  // namespace dpg
