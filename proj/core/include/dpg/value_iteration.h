// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Grid value iteration on the time-augmented state (x, t) with periodic time.

#ifndef DPG_VALUE_ITERATION_H_
#define DPG_VALUE_ITERATION_H_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dpg/equilibrium.h"
#include "dpg/game.h"

namespace dpg {

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int points = 1;

  double step() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
  double value(int k) const { return points > 1 ? lo + k * step() : lo; }
  // Nearest point, ties to the lower index; out-of-range values clamp and set
  // *clamped.
  int snap(double v, bool* clamped = nullptr) const;
};

// time_slots is the number of distinct time values: t runs over
// 0..time_slots-1 and the last slot wraps to 0. The augmented state count is
// prod(points) * time_slots.
struct GridSpec {
  std::vector<GridAxis> state_axes;
  int time_slots = 1;
  std::vector<GridAxis> action_axes;

  void validate() const;
};

struct AugmentedState {
  std::vector<int> idx;
  int t = 0;
};

class Grid {
 public:
  explicit Grid(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int state_dim() const { return static_cast<int>(spec_.state_axes.size()); }
  int action_dim() const { return static_cast<int>(spec_.action_axes.size()); }
  int num_spatial() const { return num_spatial_; }
  int time_slots() const { return spec_.time_slots; }
  std::int64_t num_states() const {
    return static_cast<std::int64_t>(num_spatial_) * spec_.time_slots;
  }
  int num_actions() const { return num_actions_; }

  Vec point(int spatial) const;
  Vec action(int a) const;  // lexicographic, last coordinate fastest
  int spatial_index(const std::vector<int>& idx) const;
  std::vector<int> spatial_indices(int spatial) const;
  int snap(const Vec& x, bool* clamped = nullptr) const;
  AugmentedState decode(std::int64_t s) const;
  std::int64_t encode(int spatial, int t) const {
    return static_cast<std::int64_t>(t) * num_spatial_ + spatial;
  }

 private:
  GridSpec spec_;
  int num_spatial_ = 1;
  int num_actions_ = 1;
};

Grid build_grid(const GridSpec& spec);

using AugmentedTransition =
    std::function<std::pair<Vec, int>(const Vec& x, int t, const Vec& u)>;

// (x, t) -> (f(x, u, t), t + 1) for t < t_last and (f(x, u, t), 0) at t_last.
AugmentedTransition augment_time(const Transition& f, int t_last);

struct ValueTable {
  std::vector<double> V;  // indexed by Grid::encode
  double delta = 0.0;     // sup-norm change of the last sweep
  double bellman_residual = 0.0;
  int iterations = 0;
  std::vector<double> delta_history;
};

struct PolicyTable {
  std::vector<int> action;  // indexed by Grid::encode
};

struct ViOptions {
  double epsilon = 1e-4;
  int max_iterations = 100000;
  int threads = 1;
};

struct ViResult {
  ValueTable value;
  PolicyTable policy;
  bool converged = false;
  std::int64_t clamped_successors = 0;
};

// Jacobi sweeps of the Bellman operator over all (state, time) grid points
// with exhaustive argmax; ties go to the lowest action index.
ViResult value_iterate(const Grid& grid, const MocpSpec& mocp,
                       const ViOptions& opts = {});

struct PolicyRollout {
  Trajectory traj;  // continuous states
  std::vector<int> snapped;      // spatial index looked up at each t
  std::vector<int> time_index;   // augmented time at each t
  int clamped = 0;
};

PolicyRollout greedy_policy_rollout(const PolicyTable& policy, const Grid& grid,
                                    const MocpSpec& mocp, const Vec& x0,
                                    int horizon, int t0 = 0);

// Deviation search for one player over the grid: backward DP on the state
// grid for the recorded horizon with the other players' actions fixed, plus
// every constant action level. Returns the best candidate, or the recorded
// actions when nothing beats them.
BestResponseResult grid_best_response(const DynamicGameSpec& game,
                                      const Grid& grid, const Trajectory& traj,
                                      int player);

}  // namespace dpg

#endif  // DPG_VALUE_ITERATION_H_
