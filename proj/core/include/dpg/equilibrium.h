// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Numerical Nash-equilibrium certification by unilateral deviation search.

#ifndef DPG_EQUILIBRIUM_H_
#define DPG_EQUILIBRIUM_H_

#include <functional>
#include <string>
#include <vector>

#include "dpg/game.h"
#include "dpg/traj_opt.h"

namespace dpg {

struct BestResponseResult {
  double improvement = 0.0;  // best deviating return - current return
  double current_return = 0.0;
  double best_return = 0.0;
  std::vector<Vec> deviation;  // the player's own actions
  bool converged = true;
  double constraint_violation = 0.0;
};

struct NeReport {
  Vec per_player_improvement;
  Vec per_player_relative;
  Vec current_returns;
  double max_relative_improvement = 0.0;
  double tolerance = 0.0;
  bool certified = false;
  std::string search_description;
  bool all_searches_converged = true;
};

// Player i's own-action problem against the others' recorded actions: same
// dynamics and constraint structure, objective pi^i. Warm-started at the
// recorded actions.
FiniteHorizonProblem best_response_problem(const DynamicGameSpec& game,
                                           const ConstraintStructure& cs,
                                           bool linear_dynamics,
                                           const Trajectory& traj, int player);

BestResponseResult best_response_deviation(const DynamicGameSpec& game,
                                           const ConstraintStructure& cs,
                                           bool linear_dynamics,
                                           const Trajectory& traj, int player,
                                           const SolverOptions& opts);

using BestResponder = std::function<BestResponseResult(int player)>;

// Relative improvement is improvement / max(|current return|, 1e-9).
NeReport verify_ne_with(int num_players, const BestResponder& responder,
                        double tol, std::string description);

NeReport verify_ne(const DynamicGameSpec& game, const ConstraintStructure& cs,
                   bool linear_dynamics, const Trajectory& traj, double tol,
                   const SolverOptions& opts);

}  // namespace dpg

#endif  // DPG_EQUILIBRIUM_H_
