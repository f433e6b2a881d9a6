// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/value_iteration.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "dpg/errors.h"

namespace dpg {

int GridAxis::snap(double v, bool* clamped) const {
  if (points <= 1) {
    if (clamped) *clamped = v != lo;
    return 0;
  }
  double r = (v - lo) / step();
  // Points within round-off of a midpoint count as ties.
  int k = static_cast<int>(std::ceil(r - 0.5 - 1e-9));
  if (clamped) *clamped = r < -1e-9 || r > points - 1 + 1e-9;
  k = std::clamp(k, 0, points - 1);
  return k;
}

void GridSpec::validate() const {
  if (state_axes.empty()) throw SpecificationError("grid needs a state axis");
  if (action_axes.empty()) throw SpecificationError("grid needs an action axis");
  if (time_slots < 1) throw SpecificationError("time_slots must be >= 1");
  for (const auto* axes : {&state_axes, &action_axes}) {
    for (const auto& a : *axes) {
      if (a.points < 1) throw SpecificationError("grid axis with zero points");
      if (!(a.lo <= a.hi)) throw SpecificationError("grid axis with lo > hi");
      if (a.points > 1 && !(a.hi > a.lo))
        throw SpecificationError("multi-point axis needs lo < hi");
    }
  }
}

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::int64_t n = 1, m = 1;
  for (const auto& a : spec_.state_axes) n *= a.points;
  for (const auto& a : spec_.action_axes) m *= a.points;
  if (n * spec_.time_slots > std::numeric_limits<int>::max() ||
      m > std::numeric_limits<int>::max())
    throw SpecificationError("grid too large");
  num_spatial_ = static_cast<int>(n);
  num_actions_ = static_cast<int>(m);
}

Grid build_grid(const GridSpec& spec) { return Grid(spec); }

std::vector<int> Grid::spatial_indices(int spatial) const {
  const int d = state_dim();
  std::vector<int> idx(d);
  for (int k = d - 1; k >= 0; --k) {
    int p = spec_.state_axes[k].points;
    idx[k] = spatial % p;
    spatial /= p;
  }
  return idx;
}

int Grid::spatial_index(const std::vector<int>& idx) const {
  int s = 0;
  for (int k = 0; k < state_dim(); ++k)
    s = s * spec_.state_axes[k].points + idx[k];
  return s;
}

Vec Grid::point(int spatial) const {
  auto idx = spatial_indices(spatial);
  Vec x(state_dim());
  for (int k = 0; k < state_dim(); ++k) x[k] = spec_.state_axes[k].value(idx[k]);
  return x;
}

Vec Grid::action(int a) const {
  const int d = action_dim();
  Vec u(d);
  for (int k = d - 1; k >= 0; --k) {
    const auto& ax = spec_.action_axes[k];
    u[k] = ax.value(a % ax.points);
    a /= ax.points;
  }
  return u;
}

int Grid::snap(const Vec& x, bool* clamped) const {
  int s = 0;
  bool any = false;
  for (int k = 0; k < state_dim(); ++k) {
    bool c = false;
    int i = spec_.state_axes[k].snap(x[k], &c);
    any = any || c;
    s = s * spec_.state_axes[k].points + i;
  }
  if (clamped) *clamped = any;
  return s;
}

AugmentedState Grid::decode(std::int64_t s) const {
  AugmentedState a;
  a.t = static_cast<int>(s / num_spatial_);
  a.idx = spatial_indices(static_cast<int>(s % num_spatial_));
  return a;
}

AugmentedTransition augment_time(const Transition& f, int t_last) {
  if (t_last < 0) throw SpecificationError("period must be >= 1");
  return [value = f.value, t_last](const Vec& x, int t, const Vec& u) {
    return std::pair<Vec, int>{value(x, u, t), t < t_last ? t + 1 : 0};
  };
}

namespace {

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 1024) {
    fn(std::int64_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::int64_t chunk = (n + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    std::int64_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ViResult value_iterate(const Grid& grid, const MocpSpec& mocp,
                       const ViOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw SpecificationError("epsilon must be positive");
  mocp.validate();
  if (mocp.system.state_dim != grid.state_dim() ||
      mocp.system.action_dim != grid.action_dim())
    throw SpecificationError("grid and MOCP dimensions differ");
  const std::int64_t S = grid.num_states();
  const int A = grid.num_actions();
  const double beta = mocp.system.discount;
  const auto ft = augment_time(mocp.system.transition, grid.time_slots() - 1);

  std::vector<Vec> actions(A);
  for (int a = 0; a < A; ++a) actions[a] = grid.action(a);

  // Successor and stage value of every (state, action) pair.
  std::vector<std::int32_t> next(S * A);
  std::vector<double> reward(S * A);
  std::vector<std::int64_t> clamps(std::max(1, opts.threads), 0);
  std::vector<std::string> errors(std::max(1, opts.threads));
  {
    std::int64_t chunk = (S + clamps.size() - 1) / clamps.size();
    parallel_for(S, opts.threads, [&](std::int64_t lo, std::int64_t hi) {
      const size_t w = static_cast<size_t>(lo / std::max<std::int64_t>(chunk, 1));
      try {
        for (std::int64_t s = lo; s < hi; ++s) {
          const int sp = static_cast<int>(s % grid.num_spatial());
          const int t = static_cast<int>(s / grid.num_spatial());
          const Vec x = grid.point(sp);
          for (int a = 0; a < A; ++a) {
            double r = mocp.potential(x, actions[a], t);
            if (!std::isfinite(r))
              throw NumericalDomainError(
                  "non-finite potential at grid state " + std::to_string(s) +
                      ", action " + std::to_string(a),
                  -1, t);
            auto [xn, tn] = ft(x, t, actions[a]);
            bool c = false;
            int spn = grid.snap(xn, &c);
            if (c) ++clamps[w];
            next[s * A + a] = static_cast<std::int32_t>(grid.encode(spn, tn));
            reward[s * A + a] = r;
          }
        }
      } catch (const NumericalDomainError& e) {
        errors[w] = e.what();
      }
    });
    for (const auto& e : errors)
      if (!e.empty()) throw NumericalDomainError(e);
  }

  ViResult res;
  for (auto c : clamps) res.clamped_successors += c;
  std::vector<double> V(S, 0.0), Vn(S, 0.0);
  std::vector<int> pol(S, 0);
  std::vector<double> part(clamps.size(), 0.0);

  auto sweep = [&](const std::vector<double>& from, std::vector<double>* to,
                   std::vector<int>* choice) {
    std::fill(part.begin(), part.end(), 0.0);
    std::int64_t chunk = (S + part.size() - 1) / part.size();
    parallel_for(S, opts.threads, [&](std::int64_t lo, std::int64_t hi) {
      const size_t w = static_cast<size_t>(lo / std::max<std::int64_t>(chunk, 1));
      double d = 0.0;
      for (std::int64_t s = lo; s < hi; ++s) {
        const std::int64_t base = s * A;
        int best_a = 0;
        double best = reward[base] + beta * from[next[base]];
        for (int a = 1; a < A; ++a) {
          double q = reward[base + a] + beta * from[next[base + a]];
          if (q > best) best = q, best_a = a;
        }
        if (choice) (*choice)[s] = best_a;
        d = std::max(d, std::abs(best - from[s]));
        (*to)[s] = best;
      }
      part[w] = std::max(part[w], d);
    });
    return *std::max_element(part.begin(), part.end());
  };

  double delta = std::numeric_limits<double>::infinity();
  int k = 0;
  while (k < opts.max_iterations) {
    delta = sweep(V, &Vn, &pol);
    ++k;
    res.value.delta_history.push_back(delta);
    V.swap(Vn);
    if (delta <= opts.epsilon) break;
  }
  res.converged = delta <= opts.epsilon;
  res.value.delta = delta;
  res.value.iterations = k;
  std::vector<double> scratch(S);
  res.value.bellman_residual = sweep(V, &scratch, nullptr);
  res.value.V = std::move(V);
  res.policy.action = std::move(pol);
  return res;
}

PolicyRollout greedy_policy_rollout(const PolicyTable& policy, const Grid& grid,
                                    const MocpSpec& mocp, const Vec& x0,
                                    int horizon, int t0) {
  if (horizon < 0) throw SpecificationError("horizon must be >= 0");
  if (static_cast<std::int64_t>(policy.action.size()) != grid.num_states())
    throw SpecificationError("policy does not match the grid");
  const auto ft = augment_time(mocp.system.transition, grid.time_slots() - 1);
  PolicyRollout out;
  Trajectory& tr = out.traj;
  tr.horizon = horizon;
  tr.states.push_back(x0);
  int tau = t0 % grid.time_slots();
  double ret = 0.0, disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    const Vec& x = tr.states.back();
    bool c = false;
    int sp = grid.snap(x, &c);
    if (c) ++out.clamped;
    Vec u = grid.action(policy.action[grid.encode(sp, tau)]);
    out.snapped.push_back(sp);
    out.time_index.push_back(tau);
    ret += disc * mocp.potential(x, u, tau);
    disc *= mocp.system.discount;
    auto [xn, tn] = ft(x, tau, u);
    tr.actions.push_back(u);
    tr.states.push_back(std::move(xn));
    tau = tn;
  }
  tr.potential_return = ret;
  return out;
}

BestResponseResult grid_best_response(const DynamicGameSpec& game,
                                      const Grid& grid, const Trajectory& traj,
                                      int player) {
  game.validate();
  const ActionLayout lay = game.layout();
  if (player < 0 || player >= game.num_players())
    throw SpecificationError("player index out of range");
  if (grid.state_dim() != game.system.state_dim ||
      grid.action_dim() != game.system.action_dim)
    throw SpecificationError("grid and game dimensions differ");
  const int off = lay.offsets[player], dim = lay.dims[player];
  const int T = traj.horizon;
  const double beta = game.system.discount;
  const int N = grid.num_spatial();

  // The player's own action levels, lexicographic.
  std::vector<Vec> own(1, Vec(dim));
  for (int k = 0; k < dim; ++k) {
    const auto& ax = grid.spec().action_axes[off + k];
    std::vector<Vec> grown;
    for (const auto& v : own)
      for (int p = 0; p < ax.points; ++p) {
        Vec w = v;
        w[k] = ax.value(p);
        grown.push_back(w);
      }
    own = std::move(grown);
  }
  const int A = static_cast<int>(own.size());
  auto embed = [&](const Vec& v, int t) {
    Vec u = traj.actions[t];
    u.segment(off, dim) = v;
    return u;
  };
  auto evaluate = [&](const std::function<Vec(const Vec&, int)>& choose) {
    Vec x = game.system.initial_state;
    double r = 0.0, disc = 1.0;
    std::vector<Vec> seq;
    for (int t = 0; t < T; ++t) {
      Vec u = embed(choose(x, t), t);
      r += disc * game.utility(player, x, u, t);
      disc *= beta;
      x = game.system.step(x, u, t);
      seq.push_back(u.segment(off, dim));
    }
    return std::pair<double, std::vector<Vec>>{r, seq};
  };

  BestResponseResult out;
  out.current_return = evaluate_returns(game, traj)[player];
  out.best_return = out.current_return;
  for (int t = 0; t < T; ++t)
    out.deviation.push_back(traj.actions[t].segment(off, dim));

  // Backward DP with V_T = 0.
  std::vector<std::vector<int>> choice(T, std::vector<int>(N, 0));
  std::vector<double> Vn(N, 0.0), V(N, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < N; ++s) {
      const Vec x = grid.point(s);
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int a = 0; a < A; ++a) {
        Vec u = embed(own[a], t);
        double q = game.utility(player, x, u, t) +
                   beta * Vn[grid.snap(game.system.step(x, u, t))];
        if (q > best) best = q, arg = a;
      }
      V[s] = best;
      choice[t][s] = arg;
    }
    Vn.swap(V);
  }
  auto consider = [&](const std::pair<double, std::vector<Vec>>& cand) {
    if (cand.first > out.best_return) {
      out.best_return = cand.first;
      out.deviation = cand.second;
    }
  };
  consider(evaluate([&](const Vec& x, int t) { return own[choice[t][grid.snap(x)]]; }));
  for (int a = 0; a < A; ++a)
    consider(evaluate([&](const Vec&, int) { return own[a]; }));
  out.improvement = out.best_return - out.current_return;
  return out;
}

}  // namespace dpg
