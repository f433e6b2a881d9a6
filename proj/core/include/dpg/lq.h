// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Linear-quadratic potential games: augmentation to standard LQ form,
// Riccati fixed point, feedback gain and closed-loop simulation.

#ifndef DPG_LQ_H_
#define DPG_LQ_H_

#include <vector>

#include "dpg/game.h"

namespace dpg {

struct LqGameParams {
  int num_players = 0;
  int state_dim = 0;
  std::vector<int> action_dims;
  Mat C;                  // S x S
  std::vector<Mat> B;     // S x A^i
  std::vector<Mat> D;     // A^i x S
  std::vector<Mat> Qc;    // A^i x A^i, negative definite
  Mat R;                  // S x S, negative semidefinite
  double discount = 0.9;
  Vec x0;
  Vec x_prev;             // x_{-1}; empty means x_{-1} = x0

  // Dimensions, then definiteness (ValidationError).
  void validate() const;
};

// x~_{t+1} = A x~_t - B u~_t with x~ = [x_t; x_{t-1}] and u~^i = D^i x_t - u^i.
struct LqProblem {
  int state_dim = 0;  // S; the augmented state has 2S entries
  std::vector<int> action_dims;
  Mat A;
  Mat B;
  Mat R_tilde;
  Mat Q_block;
  double discount = 0.9;
  Vec x0_aug;
  std::vector<Mat> D;  // for recovering original actions

  ActionLayout layout() const { return ActionLayout(action_dims); }
  int aug_dim() const { return static_cast<int>(A.rows()); }
  int total_actions() const { return static_cast<int>(B.cols()); }
};

LqProblem augment_lq(const LqGameParams& params);

struct RiccatiSolution {
  Mat P;
  Mat K;
  int iterations = 0;
  double residual = 0.0;  // max |P_{n+1} - P_n|
  double spectral_radius_A = 0.0;
  bool spectral_warning = false;  // rho(A) >= 1
  std::vector<double> residual_history;
};

// Throws NonConvergenceError after max_iter, ConditioningError when the inner
// matrix loses rank.
RiccatiSolution riccati_fixed_point(const LqProblem& prob, double tol = 1e-10,
                                    int max_iter = 5000);

// One application of the Riccati map.
Mat riccati_step(const LqProblem& prob, const Mat& P);
// max |P - riccati_step(P)|
double dare_residual(const LqProblem& prob, const Mat& P);

Mat lq_optimal_gain(const LqProblem& prob, const Mat& P);
// ||Q K x - beta B' P (A - B K) x||, the stationarity residual of the
// Bellman right-hand side at u~ = K x.
double lq_first_order_residual(const LqProblem& prob, const Mat& P,
                               const Mat& K, const Vec& x);

struct LqSimulation {
  Trajectory traj;                    // augmented states, u~ actions
  std::vector<Vec> original_actions;  // u^i = D^i x - u~^i
  std::vector<double> stage_utility;  // u~'Q u~ + x~'R~ x~
  double closed_loop_radius = 0.0;
};

LqSimulation lq_simulate(const LqProblem& prob, const Mat& K, int horizon);

// The augmented game as a generic spec: every player sees the whole
// augmented state, pi^i = x~'R~x~ + u~^i'Q^i u~^i, actions boxed to
// [-action_limit, action_limit].
DynamicGameSpec lq_game_spec(const LqProblem& prob, double action_limit);
MocpSpec lq_mocp_spec(const LqProblem& prob, double action_limit);

struct LqBestResponse {
  double best_return = 0.0;
  double current_return = 0.0;
  std::vector<Vec> deviation;  // player's u~^i sequence
  bool bound_active = false;   // the unconstrained optimum left the box
};

// Exact finite-horizon best response of one player against the other
// players' recorded actions (affine Riccati recursion, zero terminal value).
LqBestResponse lq_best_response(const LqProblem& prob, const Trajectory& traj,
                                int player, double action_limit);

}  // namespace dpg

#endif  // DPG_LQ_H_
