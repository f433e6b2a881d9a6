// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/game.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpg/errors.h"
#include "dpg/numerics.h"

namespace dpg {
namespace {

std::string at(int t) { return " at t=" + std::to_string(t); }

}  // namespace

void ControlSystem::validate() const {
  if (state_dim < 1) throw SpecificationError("state_dim must be positive");
  if (action_dim < 1) throw SpecificationError("action_dim must be positive");
  if (!(discount > 0.0 && discount < 1.0))
    throw SpecificationError("discount must lie strictly inside (0, 1)");
  if (initial_state.size() != state_dim)
    throw SpecificationError("initial_state has wrong dimension");
  if (static_cast<int>(action_bounds.size()) != action_dim)
    throw SpecificationError("action_bounds must have one interval per action");
  for (const auto& b : action_bounds)
    if (!(b.lo <= b.hi)) throw SpecificationError("action bound with lo > hi");
  if (!transition.value) throw SpecificationError("transition is not set");
  if (constraints.count > 0 && !constraints.value)
    throw SpecificationError("constraint count set without a callable");
}

Vec ControlSystem::step(const Vec& x, const Vec& u, int t) const {
  Vec next = transition.value(x, u, t);
  if (next.size() != state_dim)
    throw SpecificationError("transition '" + transition.name +
                             "' returned wrong dimension" + at(t));
  return next;
}

Vec ControlSystem::constraint_values(const Vec& x, const Vec& u, int t) const {
  if (constraints.count == 0) return Vec();
  Vec g = constraints.value(x, u, t);
  if (g.size() != constraints.count)
    throw SpecificationError("constraint '" + constraints.name +
                             "' returned wrong dimension" + at(t));
  return g;
}

ActionLayout::ActionLayout(std::vector<int> action_dims)
    : dims(std::move(action_dims)) {
  offsets.resize(dims.size());
  for (size_t i = 0; i < dims.size(); ++i) {
    offsets[i] = total;
    total += dims[i];
  }
}

int ActionLayout::owner(int coord) const {
  for (int i = num_players() - 1; i >= 0; --i)
    if (coord >= offsets[i]) return i;
  return -1;
}

void DynamicGameSpec::validate() const {
  system.validate();
  const int q = num_players();
  if (q < 1) throw SpecificationError("game needs at least one player");
  int total = 0;
  for (int d : action_dims) {
    if (d < 1) throw SpecificationError("action dims must be positive");
    total += d;
  }
  if (total != system.action_dim)
    throw SpecificationError("sum of action dims differs from action_dim");
  if (static_cast<int>(player_state_indices.size()) != q ||
      static_cast<int>(utilities.size()) != q)
    throw SpecificationError("need X(i) and a utility for every player");
  for (int i = 0; i < q; ++i) {
    const auto& xi = player_state_indices[i];
    if (xi.empty())
      throw SpecificationError("X(" + std::to_string(i + 1) + ") is empty");
    for (size_t k = 0; k < xi.size(); ++k) {
      if (xi[k] < 0 || xi[k] >= system.state_dim)
        throw SpecificationError("state index out of range in X(" +
                                 std::to_string(i + 1) + ")");
      if (k > 0 && xi[k] <= xi[k - 1])
        throw SpecificationError("X(i) must be strictly ascending");
    }
    if (!utilities[i].value)
      throw SpecificationError("utility " + std::to_string(i + 1) + " not set");
  }
}

Vec DynamicGameSpec::state_slice(int i, const Vec& x) const {
  const auto& xi = player_state_indices[i];
  Vec s(xi.size());
  for (size_t k = 0; k < xi.size(); ++k) s[k] = x[xi[k]];
  return s;
}

double DynamicGameSpec::utility(int i, const Vec& x, const Vec& u,
                                int t) const {
  return utilities[i].value(state_slice(i, x), u, t);
}

void DynamicGameSpec::utility_gradient(int i, const Vec& x, const Vec& u,
                                       int t, Vec* gx, Vec* gu,
                                       double fd_step) const {
  const auto& xi = player_state_indices[i];
  Vec xs = state_slice(i, x);
  Vec gs(xs.size()), g_u(u.size());
  if (utilities[i].has_gradient()) {
    utilities[i].gradient(xs, u, t, &gs, &g_u);
  } else {
    const auto& f = utilities[i].value;
    for (int k = 0; k < xs.size(); ++k)
      gs[k] = fd_partial([&](const Vec& z) { return f(z, u, t); }, xs, k,
                         fd_step);
    for (int k = 0; k < u.size(); ++k)
      g_u[k] = fd_partial([&](const Vec& z) { return f(xs, z, t); }, u, k,
                          fd_step);
  }
  if (gx) {
    gx->setZero(x.size());
    for (size_t k = 0; k < xi.size(); ++k) (*gx)[xi[k]] = gs[k];
  }
  if (gu) *gu = g_u;
}

void MocpSpec::validate() const {
  system.validate();
  if (!potential.value) throw SpecificationError("potential not set");
}

void MocpSpec::potential_gradient(const Vec& x, const Vec& u, int t, Vec* gx,
                                  Vec* gu, double fd_step) const {
  if (potential.has_gradient()) {
    Vec a(x.size()), b(u.size());
    potential.gradient(x, u, t, &a, &b);
    if (gx) *gx = a;
    if (gu) *gu = b;
    return;
  }
  const auto& f = potential.value;
  if (gx) *gx = fd_gradient([&](const Vec& z) { return f(z, u, t); }, x, fd_step);
  if (gu) *gu = fd_gradient([&](const Vec& z) { return f(x, z, t); }, u, fd_step);
}

namespace {

void check_dims(const ControlSystem& sys, const Trajectory& traj) {
  if (traj.horizon < 0 ||
      static_cast<int>(traj.states.size()) != traj.horizon + 1 ||
      static_cast<int>(traj.actions.size()) != traj.horizon)
    throw SpecificationError("trajectory length does not match its horizon");
  for (const auto& x : traj.states)
    if (x.size() != sys.state_dim)
      throw SpecificationError("trajectory state has wrong dimension");
  for (const auto& u : traj.actions)
    if (u.size() != sys.action_dim)
      throw SpecificationError("trajectory action has wrong dimension");
}

}  // namespace

Vec evaluate_returns(const DynamicGameSpec& game, const Trajectory& traj) {
  check_dims(game.system, traj);
  const int q = game.num_players();
  Vec r = Vec::Zero(q);
  double disc = 1.0;
  for (int t = 0; t < traj.horizon; ++t) {
    for (int i = 0; i < q; ++i) {
      double v = game.utility(i, traj.states[t], traj.actions[t], t);
      if (!std::isfinite(v))
        throw NumericalDomainError("non-finite utility for player " +
                                       std::to_string(i + 1) + at(t),
                                   i, t);
      r[i] += disc * v;
    }
    disc *= game.system.discount;
  }
  return r;
}

double evaluate_potential_return(const MocpSpec& mocp, const Trajectory& traj) {
  check_dims(mocp.system, traj);
  double r = 0.0, disc = 1.0;
  for (int t = 0; t < traj.horizon; ++t) {
    double v = mocp.potential(traj.states[t], traj.actions[t], t);
    if (!std::isfinite(v))
      throw NumericalDomainError("non-finite potential" + at(t), -1, t);
    r += disc * v;
    disc *= mocp.system.discount;
  }
  return r;
}

Trajectory rollout(const ControlSystem& sys, const std::vector<Vec>& actions,
                   int horizon) {
  if (horizon < 0 || static_cast<int>(actions.size()) != horizon)
    throw SpecificationError("need exactly T action profiles");
  Trajectory traj;
  traj.horizon = horizon;
  traj.states.reserve(horizon + 1);
  traj.states.push_back(sys.initial_state);
  traj.actions = actions;
  const double slack = 1e-12;
  for (int t = 0; t < horizon; ++t) {
    const Vec& u = actions[t];
    if (u.size() != sys.action_dim)
      throw SpecificationError("action profile has wrong dimension" + at(t));
    for (int k = 0; k < sys.action_dim; ++k) {
      const auto& b = sys.action_bounds[k];
      if (!b.contains(u[k], slack * std::max(1.0, b.width())))
        throw FeasibilityError("action coordinate " + std::to_string(k) +
                                   " out of bounds" + at(t),
                               t, k);
    }
    Vec next = sys.step(traj.states.back(), u, t);
    if (!all_finite(next))
      throw NumericalDomainError("transition produced a non-finite state" +
                                     at(t),
                                 -1, t);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Trajectory rollout(const DynamicGameSpec& game,
                   const std::vector<Vec>& actions, int horizon) {
  const ActionLayout layout = game.layout();
  try {
    Trajectory traj = rollout(game.system, actions, horizon);
    traj.per_player_returns = evaluate_returns(game, traj);
    return traj;
  } catch (const FeasibilityError& e) {
    // Report the player, not the flat coordinate.
    throw FeasibilityError(e.what(), e.t(), layout.owner(e.player()));
  }
}

Trajectory rollout(const MocpSpec& mocp, const std::vector<Vec>& actions,
                   int horizon) {
  Trajectory traj = rollout(mocp.system, actions, horizon);
  traj.potential_return = evaluate_potential_return(mocp, traj);
  return traj;
}

FeasibilityReport check_feasibility(const ControlSystem& sys,
                                    const Trajectory& traj, double tol) {
  if (!(tol > 0.0)) throw SpecificationError("tolerance must be positive");
  check_dims(sys, traj);
  FeasibilityReport rep;
  bool any = false;
  auto scan = [&](const Vec& x, const Vec& u, int t) {
    Vec g = sys.constraint_values(x, u, t);
    for (int c = 0; c < g.size(); ++c) {
      rep.worst_violation = any ? std::max(rep.worst_violation, g[c]) : g[c];
      any = true;
      if (g[c] > tol) rep.violating_indices.emplace_back(t, c);
    }
  };
  for (int t = 0; t < traj.horizon; ++t) {
    scan(traj.states[t], traj.actions[t], t);
    Vec f = sys.step(traj.states[t], traj.actions[t], t);
    rep.dynamics_residual = std::max(
        rep.dynamics_residual, (traj.states[t + 1] - f).cwiseAbs().maxCoeff());
  }
  Vec zero(sys.action_dim);
  for (int k = 0; k < sys.action_dim; ++k)
    zero[k] = sys.action_bounds[k].clamp(0.0);
  scan(traj.states[traj.horizon], zero, traj.horizon);
  rep.feasible =
      rep.worst_violation <= tol && rep.dynamics_residual <= tol;
  return rep;
}

}  // namespace dpg
