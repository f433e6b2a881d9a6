// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "dpg/errors.h"

namespace dpg {

FiniteHorizonProblem best_response_problem(const DynamicGameSpec& game,
                                           const ConstraintStructure& cs,
                                           bool linear_dynamics,
                                           const Trajectory& traj,
                                           int player) {
  game.validate();
  if (player < 0 || player >= game.num_players())
    throw SpecificationError("player index out of range");
  const ActionLayout lay = game.layout();
  const int off = lay.offsets[player], dim = lay.dims[player];
  const int T = traj.horizon;
  // Shared, immutable copies captured by the callables below.
  auto fixed = std::make_shared<const std::vector<Vec>>(traj.actions);
  auto g = std::make_shared<const DynamicGameSpec>(game);

  auto embed = [fixed, off, dim](const Vec& v, int t) {
    Vec u = (*fixed)[t];
    u.segment(off, dim) = v;
    return u;
  };

  FiniteHorizonProblem p;
  p.horizon = T;
  p.linear_dynamics = linear_dynamics;
  ControlSystem& sys = p.mocp.system;
  sys.state_dim = game.system.state_dim;
  sys.action_dim = dim;
  sys.discount = game.system.discount;
  sys.initial_state = game.system.initial_state;
  sys.action_bounds.assign(game.system.action_bounds.begin() + off,
                           game.system.action_bounds.begin() + off + dim);
  const auto& tr = game.system.transition;
  sys.transition.name = tr.name + "/br";
  sys.transition.value = [g, embed](const Vec& x, const Vec& v, int t) {
    return g->system.transition.value(x, embed(v, t), t);
  };
  if (tr.jacobian) {
    sys.transition.jacobian = [g, embed, off, dim](const Vec& x, const Vec& v,
                                                   int t, Mat* fx, Mat* fu) {
      Mat full;
      g->system.transition.jacobian(x, embed(v, t), t, fx, fu ? &full : nullptr);
      if (fu) *fu = full.middleCols(off, dim);
    };
  }
  if (game.system.constraints.count > 0) {
    sys.constraints = {game.system.constraints.name + "/br",
                       game.system.constraints.count,
                       [g, embed](const Vec& x, const Vec& v, int t) {
                         return g->system.constraints.value(x, embed(v, t), t);
                       }};
  }
  p.mocp.potential.name = game.utilities[player].name + "/br";
  p.mocp.potential.value = [g, embed, player](const Vec& x, const Vec& v,
                                              int t) {
    return g->utility(player, x, embed(v, t), t);
  };
  p.mocp.potential.gradient = [g, embed, player, off, dim](
                                  const Vec& x, const Vec& v, int t, Vec* gx,
                                  Vec* gv) {
    Vec gu;
    g->utility_gradient(player, x, embed(v, t), t, gx, &gu);
    if (gv) *gv = gu.segment(off, dim);
  };

  // M u_t <= c  ->  M_i v_t <= c - M_{-i} u^{-i}_t, one block per step.
  p.constraints.state_bounds = cs.state_bounds;
  if (!cs.coupled.empty()) {
    p.constraints.coupled.resize(T);
    for (int t = 0; t < T; ++t) {
      const LinearCoupling* lc = cs.coupling_at(t);
      Vec others = traj.actions[t];
      others.segment(off, dim).setZero();
      p.constraints.coupled[t] = {lc->M.middleCols(off, dim),
                                  lc->c - lc->M * others};
    }
  }
  return p;
}

BestResponseResult best_response_deviation(const DynamicGameSpec& game,
                                           const ConstraintStructure& cs,
                                           bool linear_dynamics,
                                           const Trajectory& traj, int player,
                                           const SolverOptions& opts) {
  FiniteHorizonProblem p =
      best_response_problem(game, cs, linear_dynamics, traj, player);
  const ActionLayout lay = game.layout();
  const int off = lay.offsets[player], dim = lay.dims[player];
  std::vector<Vec> warm(traj.horizon);
  for (int t = 0; t < traj.horizon; ++t)
    warm[t] = traj.actions[t].segment(off, dim);

  BestResponseResult out;
  out.current_return = evaluate_returns(game, traj)[player];
  SolveResult sr = solve_finite_horizon(p, opts, &warm);
  out.best_return = sr.objective;
  out.improvement = out.best_return - out.current_return;
  out.deviation = sr.trajectory.actions;
  out.converged = sr.converged;
  out.constraint_violation = sr.constraint_violation;
  return out;
}

NeReport verify_ne_with(int num_players, const BestResponder& responder,
                        double tol, std::string description) {
  if (!(tol > 0.0)) throw SpecificationError("tol must be positive");
  NeReport rep;
  rep.tolerance = tol;
  rep.search_description = std::move(description);
  rep.per_player_improvement.resize(num_players);
  rep.per_player_relative.resize(num_players);
  rep.current_returns.resize(num_players);
  for (int i = 0; i < num_players; ++i) {
    BestResponseResult br = responder(i);
    rep.per_player_improvement[i] = br.improvement;
    rep.current_returns[i] = br.current_return;
    rep.per_player_relative[i] =
        br.improvement / std::max(std::abs(br.current_return), 1e-9);
    rep.all_searches_converged = rep.all_searches_converged && br.converged;
  }
  rep.max_relative_improvement =
      num_players ? rep.per_player_relative.maxCoeff() : 0.0;
  rep.certified = rep.max_relative_improvement <= tol;
  return rep;
}

NeReport verify_ne(const DynamicGameSpec& game, const ConstraintStructure& cs,
                   bool linear_dynamics, const Trajectory& traj, double tol,
                   const SolverOptions& opts) {
  return verify_ne_with(
      game.num_players(),
      [&](int i) {
        return best_response_deviation(game, cs, linear_dynamics, traj, i,
                                       opts);
      },
      tol, "solver: bound-constrained augmented-Lagrangian best response");
}

}  // namespace dpg
