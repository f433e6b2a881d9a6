// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/traj_opt.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "dpg/errors.h"
#include "dpg/numerics.h"

namespace dpg {

const LinearCoupling* ConstraintStructure::coupling_at(int t) const {
  if (coupled.empty()) return nullptr;
  if (coupled.size() == 1) return &coupled[0];
  return &coupled.at(t);
}

int ConstraintStructure::rows_at(int t) const {
  const LinearCoupling* lc = coupling_at(t);
  return lc ? static_cast<int>(lc->c.size()) : 0;
}

void FiniteHorizonProblem::validate() const {
  mocp.validate();
  if (horizon < 1) throw SpecificationError("horizon must be >= 1");
  const auto& cs = constraints;
  if (cs.coupled.size() > 1 && static_cast<int>(cs.coupled.size()) != horizon)
    throw SpecificationError("need one coupling block or one per time step");
  for (const auto& lc : cs.coupled)
    if (lc.M.cols() != mocp.system.action_dim || lc.M.rows() != lc.c.size())
      throw SpecificationError("coupling block has wrong shape");
  if (!cs.state_bounds.empty() &&
      static_cast<int>(cs.state_bounds.size()) != mocp.system.state_dim)
    throw SpecificationError("state bounds need one interval per coordinate");
}

void SolverOptions::validate() const {
  if (max_outer_iterations < 1 || max_inner_iterations < 1 ||
      max_cg_iterations < 1)
    throw SpecificationError("iteration budgets must be positive");
  if (!(penalty_growth > 1.0) || !(initial_penalty > 0.0) ||
      !(max_penalty >= initial_penalty))
    throw SpecificationError("bad penalty schedule");
  if (!(gradient_tolerance > 0.0) || !(feasibility_tolerance > 0.0))
    throw SpecificationError("tolerances must be positive");
  if (!(shrink > 0.0 && shrink < 1.0) || !(armijo > 0.0 && armijo < 1.0))
    throw SpecificationError("backtracking parameters must lie in (0, 1)");
}

ActionSequence midpoint_actions(const ControlSystem& sys, int horizon) {
  Vec mid(sys.action_dim);
  for (int k = 0; k < sys.action_dim; ++k) mid[k] = sys.action_bounds[k].mid();
  return ActionSequence(horizon, mid);
}

double structure_violation(const ConstraintStructure& cs,
                           const Trajectory& traj) {
  double v = 0.0;
  for (int t = 0; t < traj.horizon; ++t) {
    if (const LinearCoupling* lc = cs.coupling_at(t))
      v = std::max(v, (lc->M * traj.actions[t] - lc->c).maxCoeff());
  }
  if (!cs.state_bounds.empty()) {
    for (int t = 1; t <= traj.horizon; ++t) {
      const Vec& x = traj.states[t];
      for (int k = 0; k < x.size(); ++k) {
        v = std::max(v, cs.state_bounds[k].lo - x[k]);
        v = std::max(v, x[k] - cs.state_bounds[k].hi);
      }
    }
  }
  return std::max(v, 0.0);
}

namespace {

using Seq = ActionSequence;

// Augmented Lagrangian of the discounted problem. The penalty at step t is
// rho * beta^t, so in the beta^-t preconditioned metric every step sees the
// same curvature. Rows are rescaled to action units: a coupling row by its
// largest coefficient, a state bound by the largest entry of its row of
// df/du. Without that, a battery drained at rate delta needs rho ~ 1/delta^2
// before the multipliers converge. Reported multipliers are unscaled.
class Lagrangian {
 public:
  Lagrangian(const FiniteHorizonProblem& prob) : prob_(prob) {
    const auto& sys = prob.mocp.system;
    T_ = prob.horizon;
    n_ = sys.state_dim;
    m_ = sys.action_dim;
    beta_ = sys.discount;
    disc_.resize(T_ + 1);
    disc_[0] = 1.0;
    for (int t = 1; t <= T_; ++t) disc_[t] = disc_[t - 1] * beta_;
    const auto& sb = prob.constraints.state_bounds;
    has_lo_.assign(n_, false);
    has_hi_.assign(n_, false);
    for (size_t k = 0; k < sb.size(); ++k) {
      has_lo_[k] = std::isfinite(sb[k].lo);
      has_hi_[k] = std::isfinite(sb[k].hi);
    }
    mu_c_.resize(T_);
    for (int t = 0; t < T_; ++t)
      mu_c_[t] = Vec::Zero(prob.constraints.rows_at(t));
    mu_lo_.assign(T_, Vec::Zero(n_));
    mu_hi_.assign(T_, Vec::Zero(n_));
    if (prob.linear_dynamics) {
      Vec x0 = sys.initial_state, u0 = Vec::Zero(m_);
      fx_.resize(T_);
      fu_.resize(T_);
      for (int t = 0; t < T_; ++t) jacobian(x0, u0, t, &fx_[t], &fu_[t]);
    }
    c_scale_.resize(T_);
    for (int t = 0; t < T_; ++t) {
      const LinearCoupling* lc = prob.constraints.coupling_at(t);
      if (!lc) continue;
      c_scale_[t].resize(lc->M.rows());
      for (int r = 0; r < lc->M.rows(); ++r) {
        const double w = lc->M.row(r).cwiseAbs().maxCoeff();
        c_scale_[t][r] = w > 0.0 ? 1.0 / w : 1.0;
      }
    }
    x_scale_ = Vec::Ones(n_);
    if (!sb.empty()) {
      Vec reach = Vec::Zero(n_);
      Vec mid(m_);
      for (int k = 0; k < m_; ++k) mid[k] = sys.action_bounds[k].mid();
      Mat fx, fu;
      for (int t = 0; t < T_; ++t) {
        if (prob.linear_dynamics) {
          fu = fu_[t];
        } else {
          jacobian(sys.initial_state, mid, t, &fx, &fu);
        }
        reach = reach.cwiseMax(fu.cwiseAbs().rowwise().maxCoeff());
      }
      for (int k = 0; k < n_; ++k)
        if (reach[k] > 0.0) x_scale_[k] = 1.0 / reach[k];
    }
  }

  int T() const { return T_; }
  double discount(int t) const { return disc_[t]; }
  bool has_constraints() const {
    return !prob_.constraints.coupled.empty() ||
           !prob_.constraints.state_bounds.empty();
  }

  void jacobian(const Vec& x, const Vec& u, int t, Mat* fx, Mat* fu) const {
    const auto& tr = prob_.mocp.system.transition;
    if (tr.jacobian) {
      tr.jacobian(x, u, t, fx, fu);
      return;
    }
    const double h = 1e-6;
    fx->resize(n_, n_);
    fu->resize(n_, m_);
    for (int k = 0; k < n_; ++k) {
      Vec p = x, q = x;
      p[k] += h;
      q[k] -= h;
      fx->col(k) = (tr.value(p, u, t) - tr.value(q, u, t)) / (2 * h);
    }
    for (int k = 0; k < m_; ++k) {
      Vec p = u, q = u;
      p[k] += h;
      q[k] -= h;
      fu->col(k) = (tr.value(x, p, t) - tr.value(x, q, t)) / (2 * h);
    }
  }

  // Forward rollout; fills states and returns the discounted objective.
  double forward(const Seq& U, std::vector<Vec>* X) const {
    const auto& sys = prob_.mocp.system;
    X->resize(T_ + 1);
    (*X)[0] = sys.initial_state;
    double J = 0.0;
    for (int t = 0; t < T_; ++t) {
      double v = prob_.mocp.potential((*X)[t], U[t], t);
      if (!std::isfinite(v))
        throw NumericalDomainError("non-finite potential at t=" +
                                       std::to_string(t),
                                   -1, t);
      J += disc_[t] * v;
      (*X)[t + 1] = sys.step((*X)[t], U[t], t);
    }
    return J;
  }

  // L(U) and optionally dL/dU. rho = 0 evaluates the plain objective.
  double value(const Seq& U, double rho, Seq* grad, double* objective = nullptr,
               std::vector<Vec>* states = nullptr) const {
    std::vector<Vec> Xl;
    std::vector<Vec>& X = states ? *states : Xl;
    const double J = forward(U, &X);
    if (objective) *objective = J;
    double pen = 0.0;
    // nu = max(0, mu + rho_t h): the multiplier the gradient sees.
    std::vector<Vec> nu_c(T_), nu_lo(T_), nu_hi(T_);
    const auto& cs = prob_.constraints;
    for (int t = 0; t < T_; ++t) {
      const double rt = rho * disc_[t];
      if (const LinearCoupling* lc = cs.coupling_at(t)) {
        Vec h = c_scale_[t].cwiseProduct(lc->M * U[t] - lc->c);
        nu_c[t] = phr(mu_c_[t], h, rt, &pen);
      }
      if (!cs.state_bounds.empty()) {
        Vec hl, hh;
        state_rows(X[t + 1], &hl, &hh);
        const double rt1 = rho * disc_[t + 1];
        nu_lo[t] = phr(mu_lo_[t], hl, rt1, &pen, &has_lo_);
        nu_hi[t] = phr(mu_hi_[t], hh, rt1, &pen, &has_hi_);
      }
    }
    if (grad) {
      grad->resize(T_);
      Vec lam = Vec::Zero(n_);
      const bool sb = !cs.state_bounds.empty();
      Mat fx, fu;
      for (int t = T_ - 1; t >= 0; --t) {
        // lam currently holds dL/dx_{t+1}; add the state-bound terms there.
        if (sb) lam += x_scale_.cwiseProduct(nu_lo[t] - nu_hi[t]);
        Vec gx, gu;
        prob_.mocp.potential_gradient(X[t], U[t], t, &gx, &gu);
        const Mat* Fx;
        const Mat* Fu;
        if (prob_.linear_dynamics) {
          Fx = &fx_[t];
          Fu = &fu_[t];
        } else {
          jacobian(X[t], U[t], t, &fx, &fu);
          Fx = &fx;
          Fu = &fu;
        }
        Vec g = disc_[t] * gu + Fu->transpose() * lam;
        if (const LinearCoupling* lc = cs.coupling_at(t))
          g -= lc->M.transpose() * c_scale_[t].cwiseProduct(nu_c[t]);
        (*grad)[t] = std::move(g);
        lam = disc_[t] * gx + Fx->transpose() * lam;
      }
    }
    return J - pen;
  }

  void update_multipliers(const Seq& U, const std::vector<Vec>& X,
                          double rho) {
    const auto& cs = prob_.constraints;
    double unused = 0.0;
    for (int t = 0; t < T_; ++t) {
      const double rt = rho * disc_[t];
      if (const LinearCoupling* lc = cs.coupling_at(t))
        mu_c_[t] = phr(mu_c_[t], c_scale_[t].cwiseProduct(lc->M * U[t] - lc->c),
                       rt, &unused);
      if (!cs.state_bounds.empty()) {
        Vec hl, hh;
        state_rows(X[t + 1], &hl, &hh);
        const double rt1 = rho * disc_[t + 1];
        mu_lo_[t] = phr(mu_lo_[t], hl, rt1, &unused, &has_lo_);
        mu_hi_[t] = phr(mu_hi_[t], hh, rt1, &unused, &has_hi_);
      }
    }
  }

  void export_duals(SolveResult* r) const {
    r->coupling_duals.resize(T_);
    for (int t = 0; t < T_; ++t)
      r->coupling_duals[t] = mu_c_[t].size() ? c_scale_[t].cwiseProduct(mu_c_[t]) : Vec();
    if (!prob_.constraints.state_bounds.empty()) {
      r->state_lower_duals.resize(T_);
      r->state_upper_duals.resize(T_);
      for (int t = 0; t < T_; ++t) {
        r->state_lower_duals[t] = x_scale_.cwiseProduct(mu_lo_[t]);
        r->state_upper_duals[t] = x_scale_.cwiseProduct(mu_hi_[t]);
      }
    }
  }

 private:
  // Scaled rows lo - x <= 0 and x - hi <= 0; infinite bounds give -1.
  void state_rows(const Vec& x, Vec* hl, Vec* hh) const {
    const auto& sb = prob_.constraints.state_bounds;
    hl->resize(n_);
    hh->resize(n_);
    for (int k = 0; k < n_; ++k) {
      (*hl)[k] = has_lo_[k] ? x_scale_[k] * (sb[k].lo - x[k]) : -1.0;
      (*hh)[k] = has_hi_[k] ? x_scale_[k] * (x[k] - sb[k].hi) : -1.0;
    }
  }

  // Powell-Hestenes-Rockafellar term for h <= 0 with multiplier mu, penalty
  // rho: adds (max(0, mu + rho h)^2 - mu^2) / (2 rho) to *pen and returns
  // max(0, mu + rho h).
  static Vec phr(const Vec& mu, const Vec& h, double rho, double* pen,
                 const std::vector<bool>* active = nullptr) {
    Vec nu(h.size());
    for (int k = 0; k < h.size(); ++k) {
      if (active && !(*active)[k]) {
        nu[k] = 0.0;
        continue;
      }
      if (rho <= 0.0) {
        nu[k] = mu[k];
        *pen += mu[k] * h[k];
        continue;
      }
      double s = std::max(0.0, mu[k] + rho * h[k]);
      nu[k] = s;
      *pen += (s * s - mu[k] * mu[k]) / (2.0 * rho);
    }
    return nu;
  }

  const FiniteHorizonProblem& prob_;
  int T_ = 0, n_ = 0, m_ = 0;
  double beta_ = 0.0;
  std::vector<double> disc_;
  std::vector<bool> has_lo_, has_hi_;
  std::vector<Vec> mu_c_, mu_lo_, mu_hi_;
  std::vector<Vec> c_scale_;
  Vec x_scale_;
  std::vector<Mat> fx_, fu_;
};

class BoxProjector {
 public:
  explicit BoxProjector(const ControlSystem& sys) : b_(sys.action_bounds) {}
  const Interval& bound(int k) const { return b_[k]; }
  void project(Vec* u) const {
    for (int k = 0; k < u->size(); ++k) (*u)[k] = b_[k].clamp((*u)[k]);
  }
  // max |P(u + s g) - u| with per-step scale s_t.
  double pg_norm(const Seq& U, const Seq& G,
                 const std::vector<double>& scale) const {
    double r = 0.0;
    for (size_t t = 0; t < U.size(); ++t) {
      for (int k = 0; k < U[t].size(); ++k) {
        double v = b_[k].clamp(U[t][k] + scale[t] * G[t][k]) - U[t][k];
        r = std::max(r, std::abs(v));
      }
    }
    return r;
  }

 private:
  const std::vector<Interval>& b_;
};

struct InnerStats {
  int iterations = 0;
  double pg = 0.0;  // unscaled projected-gradient norm
};

// Spectral projected gradient ascent with a beta^-t diagonal metric:
// Barzilai-Borwein trial steps and a nonmonotone (max of the last few
// values) Armijo test.
InnerStats spectral_solve(const Lagrangian& lag, const BoxProjector& box,
                          double rho, double tol, int max_iter,
                          const SolverOptions& opts, Seq* U) {
  constexpr int kMemory = 10;
  const int T = lag.T();
  std::vector<double> D(T);
  for (int t = 0; t < T; ++t) D[t] = 1.0 / lag.discount(t);

  Seq G;
  double L = lag.value(*U, rho, &G);
  std::deque<double> recent{L};
  InnerStats st;
  double step = 1.0;
  Seq U_prev, G_prev;
  bool have_prev = false;
  const std::vector<double> one(T, 1.0);
  for (int it = 0; it < max_iter; ++it) {
    st.pg = box.pg_norm(*U, G, one);
    st.iterations = it;
    if (st.pg <= tol) return st;
    if (have_prev) {
      double sDs = 0.0, sy = 0.0;
      for (int t = 0; t < T; ++t) {
        Vec s = (*U)[t] - U_prev[t];
        Vec y = G[t] - G_prev[t];
        sDs += s.squaredNorm() / D[t];
        sy += s.dot(y);
      }
      if (sy < 0.0 && sDs > 0.0)
        step = std::clamp(sDs / -sy, 1e-12, 1e12);
      else
        step = std::min(step * 4.0, 1e12);
    }
    const double ref = *std::max_element(recent.begin(), recent.end());
    Seq trial(T);
    double L_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (int t = 0; t < T; ++t) {
        trial[t] = (*U)[t] + step * D[t] * G[t];
        box.project(&trial[t]);
      }
      double gain = 0.0;
      for (int t = 0; t < T; ++t) gain += G[t].dot(trial[t] - (*U)[t]);
      L_new = lag.value(trial, rho, nullptr);
      if (std::isfinite(L_new) && L_new >= ref + opts.armijo * gain) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) return st;  // stalled at round-off
    U_prev = *U;
    G_prev = G;
    have_prev = true;
    *U = std::move(trial);
    L = lag.value(*U, rho, &G);
    recent.push_back(L);
    if (static_cast<int>(recent.size()) > kMemory) recent.pop_front();
  }
  st.iterations = max_iter;
  st.pg = box.pg_norm(*U, G, one);
  return st;
}


// u_t[k] += a * d_t[k] for every t, k.
void axpy(double a, const Seq& d, Seq* u) {
  for (size_t t = 0; t < u->size(); ++t) (*u)[t] += a * d[t];
}

double dot(const Seq& a, const Seq& b) {
  double s = 0.0;
  for (size_t t = 0; t < a.size(); ++t) s += a[t].dot(b[t]);
  return s;
}

// Bertsekas-style two-metric projection method. Coordinates within eps of a
// bound whose gradient points outward are fixed and take a scaled gradient
// step; the rest take a truncated Newton step from preconditioned CG on
// -H, with H v = (grad(U + h v) - grad(U - h v)) / 2h.
InnerStats newton_solve(const Lagrangian& lag, const BoxProjector& box,
                        double rho, double tol, int max_iter,
                        const SolverOptions& opts, Seq* U) {
  const int T = lag.T();
  std::vector<double> D(T);
  for (int t = 0; t < T; ++t) D[t] = 1.0 / lag.discount(t);
  const int m = T > 0 ? static_cast<int>((*U)[0].size()) : 0;

  Seq G;
  double L = lag.value(*U, rho, &G);
  InnerStats st;
  const std::vector<double> one(T, 1.0);
  for (int it = 0; it < max_iter; ++it) {
    st.pg = box.pg_norm(*U, G, one);
    st.iterations = it;
    if (st.pg <= tol) return st;

    // Active set and free-coordinate mask.
    const double eps = std::min(box.pg_norm(*U, G, D), 1e-3);
    Seq free(T, Vec::Ones(m));
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < m; ++k) {
        const Interval& b = box.bound(k);
        const double u = (*U)[t][k], g = G[t][k];
        const double e = eps * std::max(1.0, b.width());
        if ((u <= b.lo + e && g < 0.0) || (u >= b.hi - e && g > 0.0))
          free[t][k] = 0.0;
      }
    auto mask = [&](Seq* v) {
      for (int t = 0; t < T; ++t) (*v)[t] = (*v)[t].cwiseProduct(free[t]);
    };
    auto hess = [&](const Seq& v) {
      double vmax = 0.0, umax = 1.0;
      for (int t = 0; t < T; ++t) {
        vmax = std::max(vmax, v[t].cwiseAbs().maxCoeff());
        umax = std::max(umax, (*U)[t].cwiseAbs().maxCoeff());
      }
      const double h = 1e-6 * umax / vmax;
      Seq up = *U, dn = *U, gp, gm;
      axpy(h, v, &up);
      axpy(-h, v, &dn);
      lag.value(up, rho, &gp);
      lag.value(dn, rho, &gm);
      Seq out(T);
      for (int t = 0; t < T; ++t) out[t] = -(gp[t] - gm[t]) / (2.0 * h);
      mask(&out);
      return out;
    };

    // CG on (-H_FF) d = g_F, preconditioned by D.
    Seq r = G;
    mask(&r);
    Seq d(T, Vec::Zero(m)), z(T), p(T);
    for (int t = 0; t < T; ++t) z[t] = D[t] * r[t];
    p = z;
    double rz = dot(r, z);
    const double r0 = std::sqrt(std::max(rz, 0.0));
    const double forcing = std::min(0.5, std::sqrt(r0));
    for (int k = 0; k < opts.max_cg_iterations && rz > 0.0; ++k) {
      Seq Hp = hess(p);
      const double curv = dot(p, Hp);
      if (!(curv > 1e-14 * dot(p, p))) {
        if (k == 0) d = p;  // no curvature: fall back to the scaled gradient
        break;
      }
      const double a = rz / curv;
      axpy(a, p, &d);
      axpy(-a, Hp, &r);
      for (int t = 0; t < T; ++t) z[t] = D[t] * r[t];
      const double rz_new = dot(r, z);
      if (std::sqrt(std::max(rz_new, 0.0)) <= forcing * r0) break;
      for (int t = 0; t < T; ++t) p[t] = z[t] + (rz_new / rz) * p[t];
      rz = rz_new;
    }
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < m; ++k)
        if (free[t][k] == 0.0) d[t][k] = D[t] * G[t][k];

    // Projected arc search. Once the predicted gain is below the round-off
    // of L, function values cannot rank candidates and a decrease of the
    // projected gradient decides instead.
    const double noise = 1e-13 * std::max(1.0, std::abs(L));
    bool accepted = false;
    double alpha = 1.0;
    Seq trial(T), G_trial;
    for (int bt = 0; bt < 40; ++bt) {
      for (int t = 0; t < T; ++t) {
        trial[t] = (*U)[t] + alpha * d[t];
        box.project(&trial[t]);
      }
      double gain = 0.0;
      for (int t = 0; t < T; ++t) gain += G[t].dot(trial[t] - (*U)[t]);
      if (gain > 0.0) {
        if (gain < noise) {
          const double L_new = lag.value(trial, rho, &G_trial);
          if (std::isfinite(L_new) && box.pg_norm(trial, G_trial, one) < st.pg) {
            accepted = true;
            break;
          }
        } else {
          const double L_new = lag.value(trial, rho, nullptr);
          if (std::isfinite(L_new) && L_new >= L + opts.armijo * gain) {
            accepted = true;
            break;
          }
        }
      }
      alpha *= opts.shrink;
    }
    if (!accepted) {
      // The Newton direction failed; try a short run of gradient steps.
      const double pg_old = st.pg;
      spectral_solve(lag, box, rho, tol, 50, opts, U);
      const double L_old = L;
      L = lag.value(*U, rho, &G);
      if (!(L > L_old + noise) && !(box.pg_norm(*U, G, one) < 0.5 * pg_old))
        return st;  // stalled
      continue;
    }
    *U = std::move(trial);
    L = lag.value(*U, rho, &G);
  }
  st.iterations = max_iter;
  st.pg = box.pg_norm(*U, G, one);
  return st;
}

InnerStats inner_solve(const Lagrangian& lag, const BoxProjector& box,
                       double rho, double tol, int max_iter,
                       const SolverOptions& opts, Seq* U) {
  if (opts.inner_method == InnerMethod::kSpectral)
    return spectral_solve(lag, box, rho, tol, max_iter, opts, U);
  return newton_solve(lag, box, rho, tol, max_iter, opts, U);
}

}  // namespace

double discounted_objective(const FiniteHorizonProblem& prob,
                            const ActionSequence& actions,
                            ActionSequence* gradient) {
  prob.validate();
  if (static_cast<int>(actions.size()) != prob.horizon)
    throw SpecificationError("need one action profile per step");
  FiniteHorizonProblem bare = prob;
  bare.constraints = {};
  Lagrangian lag(bare);
  return lag.value(actions, 0.0, gradient);
}

SolveResult solve_finite_horizon(const FiniteHorizonProblem& prob,
                                 const SolverOptions& opts,
                                 const ActionSequence* warm_start) {
  prob.validate();
  opts.validate();
  const auto& sys = prob.mocp.system;
  const int T = prob.horizon;

  Seq U = warm_start ? *warm_start : midpoint_actions(sys, T);
  if (static_cast<int>(U.size()) != T)
    throw SpecificationError("warm start has wrong length");
  BoxProjector box(sys);
  for (auto& u : U) {
    if (u.size() != sys.action_dim)
      throw SpecificationError("warm start has wrong action dimension");
    box.project(&u);
  }

  Lagrangian lag(prob);
  SolveResult res;
  double rho = lag.has_constraints() ? opts.initial_penalty : 0.0;
  double prev_viol = std::numeric_limits<double>::infinity();
  const std::vector<double> one(T, 1.0);
  const int outer_budget = lag.has_constraints() ? opts.max_outer_iterations : 1;

  // Early outer iterations are solved loosely; the multipliers are still far
  // from their limits there.
  double inner_tol = lag.has_constraints()
                         ? std::max(opts.gradient_tolerance, 1e-2)
                         : opts.gradient_tolerance;
  for (int k = 0; k < outer_budget; ++k) {
    InnerStats st = inner_solve(lag, box, rho, inner_tol,
                                opts.max_inner_iterations, opts, &U);
    inner_tol = std::max(opts.gradient_tolerance, inner_tol * 0.1);
    res.iterations += st.iterations;
    res.outer_iterations = k + 1;

    Seq G;
    std::vector<Vec> X;
    double J = 0.0;
    lag.value(U, rho, &G, &J, &X);
    res.kkt_residual = box.pg_norm(U, G, one);
    Trajectory tr;
    tr.horizon = T;
    tr.states = X;
    tr.actions = U;
    double viol = structure_violation(prob.constraints, tr);
    res.objective_history.push_back(J);
    res.constraint_violation = viol;
    res.objective = J;

    if (!lag.has_constraints()) {
      res.converged = st.pg <= opts.gradient_tolerance;
      break;
    }
    lag.update_multipliers(U, X, rho);
    if (viol <= opts.feasibility_tolerance &&
        st.pg <= opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    if (viol > opts.feasibility_tolerance && viol > opts.violation_decrease * prev_viol)
      rho = std::min(rho * opts.penalty_growth, opts.max_penalty);
    prev_viol = viol;
  }

  res.trajectory = rollout(prob.mocp, U, T);
  res.objective = *res.trajectory.potential_return;
  lag.export_duals(&res);
  return res;
}

}  // namespace dpg
