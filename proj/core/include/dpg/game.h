// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Constrained nonstationary dynamic games and their single-objective
// counterpart, plus rollout and feasibility checks shared by every solver.

#ifndef DPG_GAME_H_
#define DPG_GAME_H_

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpg/types.h"

namespace dpg {

// Real-valued stage function of (state, action profile, time). For player
// utilities the state argument is the player's slice x^i, not the full state.
// The gradient is optional; when present it fills d/dx (w.r.t. the argument
// actually passed) and d/du (full action profile).
struct StageFunction {
  using Value = std::function<double(const Vec& x, const Vec& u, int t)>;
  using Gradient =
      std::function<void(const Vec& x, const Vec& u, int t, Vec* gx, Vec* gu)>;

  std::string name;
  Value value;
  Gradient gradient;

  double operator()(const Vec& x, const Vec& u, int t) const {
    return value(x, u, t);
  }
  bool has_gradient() const { return static_cast<bool>(gradient); }
};

struct Transition {
  using Value = std::function<Vec(const Vec& x, const Vec& u, int t)>;
  using Jacobian =
      std::function<void(const Vec& x, const Vec& u, int t, Mat* fx, Mat* fu)>;

  std::string name;
  Value value;
  Jacobian jacobian;  // optional
};

// g(x, u, t) <= 0 componentwise. count == 0 means unconstrained.
struct ConstraintFn {
  std::string name;
  int count = 0;
  std::function<Vec(const Vec& x, const Vec& u, int t)> value;
};

// Everything a game and its MOCP have in common.
struct ControlSystem {
  int state_dim = 0;
  int action_dim = 0;
  Transition transition;
  ConstraintFn constraints;
  std::vector<Interval> action_bounds;
  double discount = 0.9;
  Vec initial_state;

  // Throws SpecificationError on inconsistent dimensions or a discount
  // outside (0, 1).
  void validate() const;
  Vec step(const Vec& x, const Vec& u, int t) const;
  Vec constraint_values(const Vec& x, const Vec& u, int t) const;
};

// Flat storage of an action profile: player i owns
// u[offsets[i] .. offsets[i] + dims[i]).
struct ActionLayout {
  std::vector<int> dims;
  std::vector<int> offsets;
  int total = 0;

  explicit ActionLayout(std::vector<int> action_dims = {});
  int num_players() const { return static_cast<int>(dims.size()); }
  int owner(int coord) const;
  auto segment(Vec& u, int i) const { return u.segment(offsets[i], dims[i]); }
  auto segment(const Vec& u, int i) const {
    return u.segment(offsets[i], dims[i]);
  }
};

struct DynamicGameSpec {
  ControlSystem system;
  std::vector<int> action_dims;
  // X(i), zero-based, ascending.
  std::vector<std::vector<int>> player_state_indices;
  std::vector<StageFunction> utilities;

  int num_players() const { return static_cast<int>(action_dims.size()); }
  ActionLayout layout() const { return ActionLayout(action_dims); }
  void validate() const;

  Vec state_slice(int i, const Vec& x) const;
  // pi^i evaluated from the full state; only X(i) coordinates are passed on.
  double utility(int i, const Vec& x, const Vec& u, int t) const;
  // Gradient of pi^i w.r.t. the full state (zeros outside X(i)) and the full
  // action profile. Falls back to central differences when the utility has
  // no analytic gradient.
  void utility_gradient(int i, const Vec& x, const Vec& u, int t, Vec* gx,
                        Vec* gu, double fd_step = 1e-6) const;
};

struct MocpSpec {
  ControlSystem system;
  StageFunction potential;  // takes the full state

  void validate() const;
  void potential_gradient(const Vec& x, const Vec& u, int t, Vec* gx, Vec* gu,
                          double fd_step = 1e-6) const;
};

struct Trajectory {
  int horizon = 0;
  std::vector<Vec> states;   // horizon + 1
  std::vector<Vec> actions;  // horizon
  Vec per_player_returns;
  std::optional<double> potential_return;
};

struct FeasibilityReport {
  bool feasible = true;
  double worst_violation = 0.0;
  std::vector<std::pair<int, int>> violating_indices;  // (t, c)
  double dynamics_residual = 0.0;
};

inline constexpr double kDynamicsTolerance = 1e-9;

// Sum_{t<T} beta^t pi^i along the trajectory.
Vec evaluate_returns(const DynamicGameSpec& game, const Trajectory& traj);
double evaluate_potential_return(const MocpSpec& mocp, const Trajectory& traj);

Trajectory rollout(const ControlSystem& sys, const std::vector<Vec>& actions,
                   int horizon);
Trajectory rollout(const DynamicGameSpec& game,
                   const std::vector<Vec>& actions, int horizon);
Trajectory rollout(const MocpSpec& mocp, const std::vector<Vec>& actions,
                   int horizon);

// Constraints are checked at t = 0..T-1 with the recorded actions. The
// terminal state x_T is checked too, paired with the zero action projected
// onto the action box, so that a state-floor breach caused by the last
// action is reported at t = T.
FeasibilityReport check_feasibility(const ControlSystem& sys,
                                    const Trajectory& traj, double tol);
inline FeasibilityReport check_feasibility(const DynamicGameSpec& game,
                                           const Trajectory& traj,
                                           double tol) {
  return check_feasibility(game.system, traj, tol);
}
inline FeasibilityReport check_feasibility(const MocpSpec& mocp,
                                           const Trajectory& traj,
                                           double tol) {
  return check_feasibility(mocp.system, traj, tol);
}

}  // namespace dpg

#endif  // DPG_GAME_H_
