// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Finite-horizon trajectory optimization for concave MOCPs: bound-constrained
// ascent on the action boxes inside an augmented-Lagrangian loop for per-step
// linear couplings and state boxes.

#ifndef DPG_TRAJ_OPT_H_
#define DPG_TRAJ_OPT_H_

#include <cstdint>
#include <vector>

#include "dpg/game.h"

namespace dpg {

// M u_t <= c
struct LinearCoupling {
  Mat M;
  Vec c;
};

struct ConstraintStructure {
  // Empty: none. One entry: applies at every t. Otherwise one per t.
  std::vector<LinearCoupling> coupled;
  // Per state coordinate, enforced on x_1..x_T. Empty: none. Infinite
  // endpoints are skipped.
  std::vector<Interval> state_bounds;

  const LinearCoupling* coupling_at(int t) const;
  int rows_at(int t) const;
};

struct FiniteHorizonProblem {
  MocpSpec mocp;
  int horizon = 1;
  bool linear_dynamics = false;
  ConstraintStructure constraints;

  void validate() const;
};

enum class InnerMethod {
  // Two-metric projected Newton with truncated conjugate gradients on the
  // free coordinates; Hessian-vector products by differencing the adjoint
  // gradient.
  kNewtonCg,
  // Projected gradient with Barzilai-Borwein steps.
  kSpectral,
};

struct SolverOptions {
  InnerMethod inner_method = InnerMethod::kNewtonCg;
  int max_outer_iterations = 60;
  int max_inner_iterations = 2000;
  int max_cg_iterations = 250;
  double penalty_growth = 10.0;
  double initial_penalty = 10.0;
  double max_penalty = 1e8;
  double gradient_tolerance = 1e-6;
  double feasibility_tolerance = 1e-7;
  double shrink = 0.5;
  double armijo = 1e-4;
  // Penalty grows when violation did not fall below this fraction of the
  // previous outer iterate's.
  double violation_decrease = 0.25;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SolveResult {
  Trajectory trajectory;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  // Multipliers of the discounted constraints, per t.
  std::vector<Vec> coupling_duals;
  std::vector<Vec> state_lower_duals;  // t = 1..T stored at index t-1
  std::vector<Vec> state_upper_duals;
  bool converged = false;
  int iterations = 0;  // inner iterations, summed
  int outer_iterations = 0;
  std::vector<double> objective_history;  // after each outer iteration
};

using ActionSequence = std::vector<Vec>;

// Discounted potential return of an action sequence, and optionally its
// gradient w.r.t. every u_t by the adjoint recursion.
double discounted_objective(const FiniteHorizonProblem& prob,
                            const ActionSequence& actions,
                            ActionSequence* gradient = nullptr);

// Default warm start: midpoint of every action interval.
ActionSequence midpoint_actions(const ControlSystem& sys, int horizon);

SolveResult solve_finite_horizon(const FiniteHorizonProblem& prob,
                                 const SolverOptions& opts,
                                 const ActionSequence* warm_start = nullptr);

// Max violation of the structure's rows and state bounds along a trajectory
// (0 when feasible).
double structure_violation(const ConstraintStructure& cs,
                           const Trajectory& traj);

}  // namespace dpg

#endif  // DPG_TRAJ_OPT_H_
