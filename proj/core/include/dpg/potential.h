// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Numerical test of the potential-game property and construction of the
// potential by integrating the players' own-variable gradient field.

#ifndef DPG_POTENTIAL_H_
#define DPG_POTENTIAL_H_

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dpg/game.h"

namespace dpg {

struct SamplePlan {
  int num_samples = 100;
  std::vector<Interval> state_box;
  std::vector<Interval> action_box;
  std::vector<int> time_points = {0};
  std::uint64_t rng_seed = 0;

  void validate(int state_dim, int action_dim) const;
};

struct SamplePoint {
  Vec x;
  Vec u;
  int t = 0;
};

// Uniform draws kept at least `margin` away from every box face. Time points
// cycle through plan.time_points.
std::vector<SamplePoint> draw_samples(const SamplePlan& plan, double margin);

enum class Condition {
  kStateAction = 0,
  kStateState = 1,
  kActionAction = 2,
  // Only produced by verify_potential_gradients.
  kStateGradient = 3,
  kActionGradient = 4,
};
const char* condition_name(Condition c);

struct WorstCase {
  SamplePoint point;
  int i = 0;
  int j = 0;
  Condition condition = Condition::kStateAction;
};

struct ConservativityReport {
  bool passed = true;
  double max_residual = 0.0;
  double tolerance = 0.0;
  double fd_step = 0.0;
  int samples = 0;
  WorstCase worst_case;
  // Condition checks: indexed by Condition (state-action, state-state,
  // action-action). Gradient checks use [1] for states and [2] for actions.
  std::array<double, 3> per_condition_max{0.0, 0.0, 0.0};
  Mat pair_residual;  // Q x Q, symmetric
};

ConservativityReport check_potential_conditions(const DynamicGameSpec& game,
                                                const SamplePlan& plan,
                                                double fd_step = 1e-4,
                                                double tol = 1e-5);

enum class IntegrandForm {
  // Gradient field evaluated at the moving point (eta, xi); shared state
  // coordinates are counted once.
  kJoint,
  // State terms along eta with u held at the query action, action terms along
  // xi with x held at the query state, and every (i, m in X(i)) pair summed.
  kLiteral,
};

enum class IntegrationPath {
  kStraight,
  // Anchor -> (x, anchor_u) -> (x, u).
  kStatesThenActions,
};

struct LineIntegralOptions {
  int quadrature_order = 32;
  bool adaptive = true;
  double adaptive_tol = 1e-9;
  int max_order = 1024;
  IntegrandForm form = IntegrandForm::kJoint;
  IntegrationPath path = IntegrationPath::kStraight;
  double fd_step = 1e-6;  // for utilities without analytic gradients
};

class PotentialFn {
 public:
  PotentialFn(std::shared_ptr<const DynamicGameSpec> game, Vec anchor_x,
              Vec anchor_u, LineIntegralOptions opts, bool unverified);

  double operator()(const Vec& x, const Vec& u, int t) const {
    return evaluate(x, u, t, nullptr);
  }
  // order_used receives the final order after adaptive doubling.
  double evaluate(const Vec& x, const Vec& u, int t, int* order_used) const;

  const Vec& anchor_x() const { return anchor_x_; }
  const Vec& anchor_u() const { return anchor_u_; }
  int quadrature_order() const { return opts_.quadrature_order; }
  const LineIntegralOptions& options() const { return opts_; }
  // Set when the game was not accompanied by a passing conservativity
  // report; the field might not be a gradient and the result path-dependent.
  bool unverified() const { return unverified_; }

  StageFunction as_stage_function(std::string name = "line-integral") const;

 private:
  double integrate(const Vec& x, const Vec& u, int t, int order) const;
  double segment(const Vec& x0, const Vec& u0, const Vec& x1, const Vec& u1,
                 int t, int order) const;
  double literal(const Vec& x, const Vec& u, int t, int order) const;
  void field(const Vec& x, const Vec& u, int t, double lambda, Vec* fx,
             Vec* fu) const;

  std::shared_ptr<const DynamicGameSpec> game_;
  Vec anchor_x_;
  Vec anchor_u_;
  LineIntegralOptions opts_;
  bool unverified_;
  std::vector<int> state_owner_;  // first i with m in X(i), or -1
};

// `certificate` should be a passing check_potential_conditions report for the
// same game; without it the returned evaluator is flagged unverified.
PotentialFn build_potential_line_integral(
    const DynamicGameSpec& game, const Vec& anchor_x, const Vec& anchor_u,
    const LineIntegralOptions& opts = {},
    const ConservativityReport* certificate = nullptr);

// Compares d(pot)/dx^m, m in X(i), and d(pot)/du^i (central differences)
// against the players' own gradients.
ConservativityReport verify_potential_gradients(const DynamicGameSpec& game,
                                                const StageFunction& pot,
                                                const SamplePlan& plan,
                                                double fd_step = 1e-4,
                                                double tol = 1e-5);

}  // namespace dpg

#endif  // DPG_POTENTIAL_H_
