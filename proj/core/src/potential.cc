// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/potential.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dpg/errors.h"
#include "dpg/numerics.h"

namespace dpg {

void SamplePlan::validate(int state_dim, int action_dim) const {
  if (num_samples < 1) throw SpecificationError("num_samples must be >= 1");
  if (static_cast<int>(state_box.size()) != state_dim ||
      static_cast<int>(action_box.size()) != action_dim)
    throw SpecificationError("sampling box has wrong dimension");
  for (const auto& b : state_box)
    if (!(b.hi > b.lo)) throw SpecificationError("degenerate sampling interval");
  for (const auto& b : action_box)
    if (!(b.hi > b.lo)) throw SpecificationError("degenerate sampling interval");
  if (time_points.empty()) throw SpecificationError("no time points");
}

std::vector<SamplePoint> draw_samples(const SamplePlan& plan, double margin) {
  std::mt19937_64 rng(plan.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const Interval& b) {
    double lo = b.lo + margin, hi = b.hi - margin;
    if (!(hi > lo))
      throw SpecificationError("sampling interval narrower than the FD stencil");
    return lo + (hi - lo) * unit(rng);
  };
  std::vector<SamplePoint> out(plan.num_samples);
  for (int s = 0; s < plan.num_samples; ++s) {
    auto& p = out[s];
    p.x.resize(plan.state_box.size());
    p.u.resize(plan.action_box.size());
    for (size_t k = 0; k < plan.state_box.size(); ++k)
      p.x[k] = draw(plan.state_box[k]);
    for (size_t k = 0; k < plan.action_box.size(); ++k)
      p.u[k] = draw(plan.action_box[k]);
    p.t = plan.time_points[s % plan.time_points.size()];
  }
  return out;
}

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::kStateAction: return "state-action";
    case Condition::kStateState: return "state-state";
    case Condition::kActionAction: return "action-action";
    case Condition::kStateGradient: return "state-gradient";
    case Condition::kActionGradient: return "action-gradient";
  }
  return "?";
}

namespace {

Vec join(const Vec& x, const Vec& u) {
  Vec z(x.size() + u.size());
  z << x, u;
  return z;
}

struct Recorder {
  ConservativityReport* rep;
  const SamplePoint* point;

  void add(double r, int i, int j, Condition c) {
    int slot = static_cast<int>(c);
    if (slot > 2) slot -= 2;
    rep->per_condition_max[slot] = std::max(rep->per_condition_max[slot], r);
    double& pr = rep->pair_residual(i, j);
    pr = std::max(pr, r);
    rep->pair_residual(j, i) = pr;
    if (r > rep->max_residual) {
      rep->max_residual = r;
      rep->worst_case = {*point, i, j, c};
    }
  }
};

void check_value(double v, const SamplePoint& p, int player) {
  if (!std::isfinite(v)) {
    std::vector<double> pt(p.x.data(), p.x.data() + p.x.size());
    pt.insert(pt.end(), p.u.data(), p.u.data() + p.u.size());
    throw NumericalDomainError(
        "non-finite utility of player " + std::to_string(player + 1) +
            " near a sample point at t=" + std::to_string(p.t),
        player, p.t, -1.0, std::move(pt));
  }
}

}  // namespace

ConservativityReport check_potential_conditions(const DynamicGameSpec& game,
                                                const SamplePlan& plan,
                                                double fd_step, double tol) {
  if (!(fd_step > 0.0) || !(tol > 0.0))
    throw SpecificationError("fd_step and tol must be positive");
  game.validate();
  const int s_dim = game.system.state_dim;
  plan.validate(s_dim, game.system.action_dim);
  const int q = game.num_players();
  const ActionLayout lay = game.layout();

  ConservativityReport rep;
  rep.max_residual = -1.0;  // so the first comparison records a worst case
  rep.tolerance = tol;
  rep.fd_step = fd_step;
  rep.pair_residual = Mat::Zero(q, q);
  const auto samples = draw_samples(plan, 1.5 * fd_step);

  for (const auto& p : samples) {
    Recorder rec{&rep, &p};
    const Vec z = join(p.x, p.u);
    std::vector<ScalarField> f(q);
    for (int i = 0; i < q; ++i) {
      f[i] = [&, i](const Vec& w) {
        double v = game.utility(i, w.head(s_dim), w.tail(w.size() - s_dim), p.t);
        check_value(v, p, i);
        return v;
      };
    }
    auto d2 = [&](int i, int a, int b) { return fd_second(f[i], z, a, b, fd_step); };

    for (int i = 0; i < q; ++i) {
      for (int j = i + 1; j < q; ++j) {
        // state-action, both directions
        for (auto [own, other] : {std::pair{i, j}, std::pair{j, i}}) {
          for (int m : game.player_state_indices[own]) {
            for (int b = 0; b < lay.dims[other]; ++b) {
              int ub = s_dim + lay.offsets[other] + b;
              double r = std::abs(d2(own, m, ub) - d2(other, m, ub));
              rec.add(r, i, j, Condition::kStateAction);
            }
          }
        }
        for (int m : game.player_state_indices[i]) {
          for (int n : game.player_state_indices[j]) {
            double r = std::abs(d2(i, m, n) - d2(j, n, m));
            rec.add(r, i, j, Condition::kStateState);
          }
        }
        for (int a = 0; a < lay.dims[i]; ++a) {
          for (int b = 0; b < lay.dims[j]; ++b) {
            int ua = s_dim + lay.offsets[i] + a;
            int ub = s_dim + lay.offsets[j] + b;
            double r = std::abs(d2(i, ua, ub) - d2(j, ub, ua));
            rec.add(r, i, j, Condition::kActionAction);
          }
        }
      }
    }
    ++rep.samples;
  }
  rep.max_residual = std::max(rep.max_residual, 0.0);
  rep.passed = rep.max_residual <= tol;
  return rep;
}

ConservativityReport verify_potential_gradients(const DynamicGameSpec& game,
                                                const StageFunction& pot,
                                                const SamplePlan& plan,
                                                double fd_step, double tol) {
  if (!(fd_step > 0.0) || !(tol > 0.0))
    throw SpecificationError("fd_step and tol must be positive");
  game.validate();
  const int s_dim = game.system.state_dim;
  plan.validate(s_dim, game.system.action_dim);
  const int q = game.num_players();
  const ActionLayout lay = game.layout();

  ConservativityReport rep;
  rep.max_residual = -1.0;  // so the first comparison records a worst case
  rep.tolerance = tol;
  rep.fd_step = fd_step;
  rep.pair_residual = Mat::Zero(q, q);
  const auto samples = draw_samples(plan, 1.5 * fd_step);

  for (const auto& p : samples) {
    Recorder rec{&rep, &p};
    const Vec z = join(p.x, p.u);
    ScalarField fp = [&](const Vec& w) {
      double v = pot(w.head(s_dim), w.tail(w.size() - s_dim), p.t);
      check_value(v, p, -1);
      return v;
    };
    for (int i = 0; i < q; ++i) {
      Vec gx, gu;
      game.utility_gradient(i, p.x, p.u, p.t, &gx, &gu);
      if (!all_finite(gx) || !all_finite(gu)) check_value(NAN, p, i);
      for (int m : game.player_state_indices[i]) {
        double r = std::abs(fd_partial(fp, z, m, fd_step) - gx[m]);
        rec.add(r, i, i, Condition::kStateGradient);
      }
      for (int a = 0; a < lay.dims[i]; ++a) {
        int k = lay.offsets[i] + a;
        double r = std::abs(fd_partial(fp, z, s_dim + k, fd_step) - gu[k]);
        rec.add(r, i, i, Condition::kActionGradient);
      }
    }
    ++rep.samples;
  }
  rep.max_residual = std::max(rep.max_residual, 0.0);
  rep.passed = rep.max_residual <= tol;
  return rep;
}

PotentialFn::PotentialFn(std::shared_ptr<const DynamicGameSpec> game,
                         Vec anchor_x, Vec anchor_u, LineIntegralOptions opts,
                         bool unverified)
    : game_(std::move(game)),
      anchor_x_(std::move(anchor_x)),
      anchor_u_(std::move(anchor_u)),
      opts_(opts),
      unverified_(unverified) {
  if (anchor_x_.size() != game_->system.state_dim ||
      anchor_u_.size() != game_->system.action_dim)
    throw SpecificationError("anchor has wrong dimension");
  if (opts_.quadrature_order < 1 || opts_.max_order < opts_.quadrature_order)
    throw SpecificationError("bad quadrature order");
  if (opts_.form == IntegrandForm::kLiteral &&
      opts_.path != IntegrationPath::kStraight)
    throw SpecificationError("the literal integrand is defined on the straight path only");
  state_owner_.assign(game_->system.state_dim, -1);
  for (int i = game_->num_players() - 1; i >= 0; --i)
    for (int m : game_->player_state_indices[i]) state_owner_[m] = i;
}

void PotentialFn::field(const Vec& x, const Vec& u, int t, double lambda,
                        Vec* fx, Vec* fu) const {
  const auto& g = *game_;
  const ActionLayout lay = g.layout();
  fx->setZero(x.size());
  fu->setZero(u.size());
  for (int i = 0; i < g.num_players(); ++i) {
    Vec gx, gu;
    g.utility_gradient(i, x, u, t, &gx, &gu, opts_.fd_step);
    if (!all_finite(gx) || !all_finite(gu))
      throw NumericalDomainError("non-finite gradient of player " +
                                     std::to_string(i + 1) + " at lambda=" +
                                     std::to_string(lambda),
                                 i, t, lambda);
    for (int m : g.player_state_indices[i])
      if (state_owner_[m] == i) (*fx)[m] = gx[m];
    fu->segment(lay.offsets[i], lay.dims[i]) =
        gu.segment(lay.offsets[i], lay.dims[i]);
  }
}

double PotentialFn::segment(const Vec& x0, const Vec& u0, const Vec& x1,
                            const Vec& u1, int t, int order) const {
  const Vec dx = x1 - x0, du = u1 - u0;
  if (dx.isZero(0.0) && du.isZero(0.0)) return 0.0;
  const auto& rule = gauss_legendre(order);
  double acc = 0.0;
  Vec fx, fu;
  for (int k = 0; k < order; ++k) {
    double lam = rule.nodes[k];
    field(x0 + lam * dx, u0 + lam * du, t, lam, &fx, &fu);
    acc += rule.weights[k] * (fx.dot(dx) + fu.dot(du));
  }
  return acc;
}

double PotentialFn::literal(const Vec& x, const Vec& u, int t, int order) const {
  const auto& g = *game_;
  const ActionLayout lay = g.layout();
  const Vec dx = x - anchor_x_, du = u - anchor_u_;
  const auto& rule = gauss_legendre(order);
  double acc = 0.0;
  for (int k = 0; k < order; ++k) {
    double lam = rule.nodes[k];
    Vec eta = anchor_x_ + lam * dx, xi = anchor_u_ + lam * du;
    double s = 0.0;
    for (int i = 0; i < g.num_players(); ++i) {
      Vec gx, gu;
      g.utility_gradient(i, eta, u, t, &gx, nullptr, opts_.fd_step);
      g.utility_gradient(i, x, xi, t, nullptr, &gu, opts_.fd_step);
      if (!all_finite(gx) || !all_finite(gu))
        throw NumericalDomainError("non-finite gradient at lambda=" +
                                       std::to_string(lam),
                                   i, t, lam);
      for (int m : g.player_state_indices[i]) s += gx[m] * dx[m];
      s += gu.segment(lay.offsets[i], lay.dims[i])
               .dot(du.segment(lay.offsets[i], lay.dims[i]));
    }
    acc += rule.weights[k] * s;
  }
  return acc;
}

double PotentialFn::integrate(const Vec& x, const Vec& u, int t,
                              int order) const {
  if (opts_.form == IntegrandForm::kLiteral) return literal(x, u, t, order);
  if (opts_.path == IntegrationPath::kStraight)
    return segment(anchor_x_, anchor_u_, x, u, t, order);
  return segment(anchor_x_, anchor_u_, x, anchor_u_, t, order) +
         segment(x, anchor_u_, x, u, t, order);
}

double PotentialFn::evaluate(const Vec& x, const Vec& u, int t,
                             int* order_used) const {
  if (x.size() != anchor_x_.size() || u.size() != anchor_u_.size())
    throw SpecificationError("query point has wrong dimension");
  int order = opts_.quadrature_order;
  double est = integrate(x, u, t, order);
  if (opts_.adaptive) {
    while (order * 2 <= opts_.max_order) {
      double next = integrate(x, u, t, order * 2);
      order *= 2;
      bool done = std::abs(next - est) < opts_.adaptive_tol;
      est = next;
      if (done) break;
    }
  }
  if (order_used) *order_used = order;
  return est;
}

StageFunction PotentialFn::as_stage_function(std::string name) const {
  auto self = std::make_shared<const PotentialFn>(*this);
  return {std::move(name),
          [self](const Vec& x, const Vec& u, int t) { return (*self)(x, u, t); },
          {}};
}

PotentialFn build_potential_line_integral(
    const DynamicGameSpec& game, const Vec& anchor_x, const Vec& anchor_u,
    const LineIntegralOptions& opts, const ConservativityReport* certificate) {
  game.validate();
  bool unverified = certificate == nullptr || !certificate->passed;
  return PotentialFn(std::make_shared<const DynamicGameSpec>(game), anchor_x,
                     anchor_u, opts, unverified);
}

}  // namespace dpg
