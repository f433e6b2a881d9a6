// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Route dispatch: solve a built scenario with its matched solver and certify
// the result by unilateral deviation search.

#ifndef DPG_RUNNER_H_
#define DPG_RUNNER_H_

#include <optional>

#include "dpg/equilibrium.h"
#include "dpg/lq.h"
#include "dpg/scenarios.h"
#include "dpg/traj_opt.h"
#include "dpg/value_iteration.h"

namespace dpg {

struct RunOptions {
  SolverOptions solver;
  ViOptions vi;
  double riccati_tol = 1e-10;
  int riccati_max_iter = 5000;
};

struct ScenarioRun {
  // In game coordinates (augmented state and u~ for the LQ route).
  Trajectory trajectory;
  bool converged = false;
  // Riccati step residual, KKT residual or Bellman residual.
  double residual = 0.0;
  std::optional<RiccatiSolution> riccati;
  std::optional<LqSimulation> lq_sim;
  std::optional<SolveResult> solve;
  std::optional<ViResult> vi;
  std::optional<PolicyRollout> rollout;
};

// Solver failures propagate (NonConvergenceError, InstabilityError, ...).
ScenarioRun solve_scenario(const ScenarioBundle& b, const RunOptions& opts = {});

// Exact Riccati best response (LQ), bound-constrained best response
// (trajectory optimization) or grid deviation search (value iteration).
NeReport certify_scenario(const ScenarioBundle& b, const Trajectory& traj,
                          double tol, const RunOptions& opts = {});

}  // namespace dpg

#endif  // DPG_RUNNER_H_
