// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/runner.h"

#include "dpg/errors.h"

namespace dpg {

ScenarioRun solve_scenario(const ScenarioBundle& b, const RunOptions& opts) {
  ScenarioRun run;
  switch (b.route) {
    case SolverRoute::kLq: {
      if (!b.lq) throw SpecificationError("LQ route without an LQ problem");
      run.riccati = riccati_fixed_point(*b.lq, opts.riccati_tol, opts.riccati_max_iter);
      run.lq_sim = lq_simulate(*b.lq, run.riccati->K, b.horizon);
      run.trajectory = run.lq_sim->traj;
      run.trajectory.per_player_returns = evaluate_returns(b.game, run.trajectory);
      run.trajectory.potential_return = evaluate_potential_return(b.mocp, run.trajectory);
      run.converged = true;
      run.residual = run.riccati->residual;
      break;
    }
    case SolverRoute::kTrajOpt: {
      if (!b.problem) throw SpecificationError("trajectory route without a problem");
      run.solve = solve_finite_horizon(*b.problem, opts.solver);
      run.trajectory = run.solve->trajectory;
      run.trajectory.per_player_returns = evaluate_returns(b.game, run.trajectory);
      run.converged = run.solve->converged;
      run.residual = run.solve->kkt_residual;
      break;
    }
    case SolverRoute::kValueIteration: {
      if (!b.grid) throw SpecificationError("value-iteration route without a grid");
      Grid grid(*b.grid);
      run.vi = value_iterate(grid, b.mocp, opts.vi);
      run.rollout = greedy_policy_rollout(run.vi->policy, grid, b.mocp,
                                          b.mocp.system.initial_state, b.horizon);
      run.trajectory = run.rollout->traj;
      run.trajectory.per_player_returns = evaluate_returns(b.game, run.trajectory);
      run.trajectory.potential_return = evaluate_potential_return(b.mocp, run.trajectory);
      run.converged = run.vi->converged;
      run.residual = run.vi->value.bellman_residual;
      break;
    }
  }
  return run;
}

NeReport certify_scenario(const ScenarioBundle& b, const Trajectory& traj,
                          double tol, const RunOptions& opts) {
  const int q = b.game.num_players();
  switch (b.route) {
    case SolverRoute::kLq:
      return verify_ne_with(
          q,
          [&](int i) {
            LqBestResponse br = lq_best_response(*b.lq, traj, i, b.action_limit);
            BestResponseResult r;
            r.current_return = br.current_return;
            r.best_return = br.best_return;
            r.improvement = br.best_return - br.current_return;
            r.deviation = std::move(br.deviation);
            return r;
          },
          tol, "affine Riccati best response");
    case SolverRoute::kTrajOpt:
      return verify_ne(b.game, b.problem->constraints, b.problem->linear_dynamics,
                       traj, tol, opts.solver);
    case SolverRoute::kValueIteration: {
      Grid grid(*b.grid);
      return verify_ne_with(
          q, [&](int i) { return grid_best_response(b.game, grid, traj, i); }, tol,
          "grid dynamic programming and constant-level search");
    }
  }
  throw SpecificationError("unknown solver route");
}

}  // namespace dpg
