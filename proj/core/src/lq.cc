// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/lq.h"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dpg/errors.h"
#include "dpg/numerics.h"

namespace dpg {
namespace {

void expect_shape(const Mat& m, int r, int c, const std::string& what) {
  if (m.rows() != r || m.cols() != c)
    throw SpecificationError(what + " has shape " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()) + ", expected " +
                             std::to_string(r) + "x" + std::to_string(c));
}

double max_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// (Q + beta B'PB) factorized; throws when numerically singular.
Eigen::LDLT<Mat> inner_factor(const Mat& Q, const Mat& B, const Mat& P,
                              double beta) {
  Mat H = Q + beta * B.transpose() * P * B;
  H = 0.5 * (H + H.transpose());
  Eigen::LDLT<Mat> ldlt(H);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14))
    throw ConditioningError("Q + beta B'PB is numerically singular (rcond " +
                            std::to_string(ldlt.rcond()) + ")");
  return ldlt;
}

const std::string idx(int i) { return "[" + std::to_string(i + 1) + "]"; }

}  // namespace

void LqGameParams::validate() const {
  const int s = state_dim, q = num_players;
  if (q < 1 || s < 1) throw SpecificationError("need Q >= 1 and S >= 1");
  if (static_cast<int>(action_dims.size()) != q ||
      static_cast<int>(B.size()) != q || static_cast<int>(D.size()) != q ||
      static_cast<int>(Qc.size()) != q)
    throw SpecificationError("per-player matrix lists must have Q entries");
  expect_shape(C, s, s, "C");
  expect_shape(R, s, s, "R");
  if (x0.size() != s) throw SpecificationError("x0 has wrong dimension");
  if (x_prev.size() != 0 && x_prev.size() != s)
    throw SpecificationError("x_prev has wrong dimension");
  if (!(discount > 0.0 && discount < 1.0))
    throw SpecificationError("discount must lie in (0, 1)");
  for (int i = 0; i < q; ++i) {
    if (action_dims[i] < 1) throw SpecificationError("A^i must be positive");
    expect_shape(B[i], s, action_dims[i], "B" + idx(i));
    expect_shape(D[i], action_dims[i], s, "D" + idx(i));
    expect_shape(Qc[i], action_dims[i], action_dims[i], "Q" + idx(i));
  }
  for (int i = 0; i < q; ++i)
    if (!(max_eig(Qc[i]) < 0.0))
      throw ValidationError("Q" + idx(i) + " is not negative definite");
  const double scale = std::max(1.0, inf_norm(R));
  if (max_eig(R) > 1e-12 * scale)
    throw ValidationError("R is not negative semidefinite");
}

LqProblem augment_lq(const LqGameParams& params) {
  params.validate();
  const int s = params.state_dim, q = params.num_players;
  LqProblem prob;
  prob.state_dim = s;
  prob.action_dims = params.action_dims;
  prob.discount = params.discount;
  prob.D = params.D;
  const ActionLayout lay(params.action_dims);

  Mat top = params.C;
  for (int i = 0; i < q; ++i) top += params.B[i] * params.D[i];
  prob.A = Mat::Zero(2 * s, 2 * s);
  prob.A.topLeftCorner(s, s) = top;
  prob.A.bottomLeftCorner(s, s) = Mat::Identity(s, s);

  prob.B = Mat::Zero(2 * s, lay.total);
  prob.Q_block = Mat::Zero(lay.total, lay.total);
  for (int i = 0; i < q; ++i) {
    prob.B.block(0, lay.offsets[i], s, lay.dims[i]) = params.B[i];
    prob.Q_block.block(lay.offsets[i], lay.offsets[i], lay.dims[i],
                       lay.dims[i]) = params.Qc[i];
  }
  prob.R_tilde.resize(2 * s, 2 * s);
  prob.R_tilde << params.R, -params.R, -params.R, params.R;

  prob.x0_aug.resize(2 * s);
  prob.x0_aug << params.x0, (params.x_prev.size() ? params.x_prev : params.x0);
  return prob;
}

Mat riccati_step(const LqProblem& prob, const Mat& P) {
  const double beta = prob.discount;
  const Mat& A = prob.A;
  const Mat& B = prob.B;
  auto ldlt = inner_factor(prob.Q_block, B, P, beta);
  Mat BtPA = B.transpose() * P * A;
  Mat next = prob.R_tilde + beta * A.transpose() * P * A -
             beta * beta * BtPA.transpose() * ldlt.solve(BtPA);
  return 0.5 * (next + next.transpose());
}

double dare_residual(const LqProblem& prob, const Mat& P) {
  return inf_norm(P - riccati_step(prob, P));
}

RiccatiSolution riccati_fixed_point(const LqProblem& prob, double tol,
                                    int max_iter) {
  if (!(tol > 0.0)) throw SpecificationError("tol must be positive");
  if (max_iter < 1) throw SpecificationError("max_iter must be positive");
  RiccatiSolution sol;
  sol.spectral_radius_A = spectral_radius(prob.A);
  sol.spectral_warning = sol.spectral_radius_A >= 1.0;

  Mat P = Mat::Zero(prob.aug_dim(), prob.aug_dim());
  double res = 0.0;
  for (int n = 1; n <= max_iter; ++n) {
    Mat next = riccati_step(prob, P);
    if (!next.allFinite())
      throw NumericalDomainError("Riccati iterate became non-finite");
    res = inf_norm(next - P);
    sol.residual_history.push_back(res);
    P = std::move(next);
    if (res <= tol) {
      sol.P = P;
      sol.K = lq_optimal_gain(prob, P);
      sol.iterations = n;
      sol.residual = res;
      return sol;
    }
  }
  throw NonConvergenceError("Riccati iteration did not converge", res,
                            max_iter);
}

Mat lq_optimal_gain(const LqProblem& prob, const Mat& P) {
  const double beta = prob.discount;
  auto ldlt = inner_factor(prob.Q_block, prob.B, P, beta);
  return beta * ldlt.solve(prob.B.transpose() * P * prob.A);
}

double lq_first_order_residual(const LqProblem& prob, const Mat& P,
                               const Mat& K, const Vec& x) {
  const double beta = prob.discount;
  Vec r = beta * prob.Q_block * K * x -
          beta * beta * prob.B.transpose() * P * (prob.A - prob.B * K) * x;
  return r.norm();
}

LqSimulation lq_simulate(const LqProblem& prob, const Mat& K, int horizon) {
  if (horizon < 1) throw SpecificationError("horizon must be >= 1");
  if (K.rows() != prob.total_actions() || K.cols() != prob.aug_dim())
    throw SpecificationError("gain has wrong shape");
  const int s = prob.state_dim;
  const ActionLayout lay = prob.layout();
  const Mat closed = prob.A - prob.B * K;

  LqSimulation sim;
  sim.closed_loop_radius = spectral_radius(closed);
  Trajectory& traj = sim.traj;
  traj.horizon = horizon;
  traj.states.push_back(prob.x0_aug);
  for (int t = 0; t < horizon; ++t) {
    const Vec& x = traj.states.back();
    Vec ut = K * x;
    sim.stage_utility.push_back(ut.dot(prob.Q_block * ut) +
                                x.dot(prob.R_tilde * x));
    Vec orig(lay.total);
    for (int i = 0; i < lay.num_players(); ++i)
      orig.segment(lay.offsets[i], lay.dims[i]) =
          prob.D[i] * x.head(s) - ut.segment(lay.offsets[i], lay.dims[i]);
    sim.original_actions.push_back(std::move(orig));
    traj.actions.push_back(ut);
    Vec next = closed * x;
    if (!next.allFinite() || next.norm() > 1e12)
      throw InstabilityError("closed-loop state diverged at t=" +
                                 std::to_string(t + 1),
                             sim.closed_loop_radius);
    traj.states.push_back(std::move(next));
  }
  double r = 0.0, disc = 1.0;
  for (double v : sim.stage_utility) {
    r += disc * v;
    disc *= prob.discount;
  }
  traj.potential_return = r;
  return sim;
}

namespace {

ControlSystem lq_system(const LqProblem& prob, double action_limit) {
  ControlSystem sys;
  sys.state_dim = prob.aug_dim();
  sys.action_dim = prob.total_actions();
  const Mat A = prob.A, B = prob.B;
  sys.transition = {
      "lq-augmented",
      [A, B](const Vec& x, const Vec& u, int) -> Vec { return A * x - B * u; },
      [A, B](const Vec&, const Vec&, int, Mat* fx, Mat* fu) {
        if (fx) *fx = A;
        if (fu) *fu = -B;
      }};
  sys.action_bounds.assign(sys.action_dim, {-action_limit, action_limit});
  sys.discount = prob.discount;
  sys.initial_state = prob.x0_aug;
  return sys;
}

}  // namespace

DynamicGameSpec lq_game_spec(const LqProblem& prob, double action_limit) {
  DynamicGameSpec game;
  game.system = lq_system(prob, action_limit);
  game.action_dims = prob.action_dims;
  const ActionLayout lay = prob.layout();
  std::vector<int> all(prob.aug_dim());
  for (int k = 0; k < prob.aug_dim(); ++k) all[k] = k;
  const Mat Rt = prob.R_tilde;
  for (int i = 0; i < lay.num_players(); ++i) {
    game.player_state_indices.push_back(all);
    const int off = lay.offsets[i], dim = lay.dims[i];
    const Mat Qi = prob.Q_block.block(off, off, dim, dim);
    game.utilities.push_back(
        {"lq-player-" + std::to_string(i + 1),
         [Rt, Qi, off, dim](const Vec& x, const Vec& u, int) {
           Vec ui = u.segment(off, dim);
           return x.dot(Rt * x) + ui.dot(Qi * ui);
         },
         [Rt, Qi, off, dim](const Vec& x, const Vec& u, int, Vec* gx,
                            Vec* gu) {
           *gx = 2.0 * Rt * x;
           gu->setZero(u.size());
           gu->segment(off, dim) = 2.0 * Qi * u.segment(off, dim);
         }});
  }
  return game;
}

MocpSpec lq_mocp_spec(const LqProblem& prob, double action_limit) {
  MocpSpec mocp;
  mocp.system = lq_system(prob, action_limit);
  const Mat Rt = prob.R_tilde, Q = prob.Q_block;
  mocp.potential = {"lq-potential",
                    [Rt, Q](const Vec& x, const Vec& u, int) {
                      return x.dot(Rt * x) + u.dot(Q * u);
                    },
                    [Rt, Q](const Vec& x, const Vec& u, int, Vec* gx, Vec* gu) {
                      *gx = 2.0 * Rt * x;
                      *gu = 2.0 * Q * u;
                    }};
  return mocp;
}

LqBestResponse lq_best_response(const LqProblem& prob, const Trajectory& traj,
                                int player, double action_limit) {
  const ActionLayout lay = prob.layout();
  if (player < 0 || player >= lay.num_players())
    throw SpecificationError("player index out of range");
  const int T = traj.horizon, n = prob.aug_dim();
  const int off = lay.offsets[player], dim = lay.dims[player];
  const double beta = prob.discount;
  const Mat& A = prob.A;
  const Mat Bi = prob.B.middleCols(off, dim);
  const Mat Qi = prob.Q_block.block(off, off, dim, dim);
  const Mat& Rt = prob.R_tilde;

  // w_t: the other players' contribution to the drift.
  std::vector<Vec> w(T);
  for (int t = 0; t < T; ++t) {
    Vec others = traj.actions[t];
    others.segment(off, dim).setZero();
    w[t] = prob.B * others;
  }

  // V_t(x) = x'P x + 2 p'x + c, V_T = 0; policy v_t = K_t x + k_t.
  Mat P = Mat::Zero(n, n);
  Vec p = Vec::Zero(n);
  std::vector<Mat> Ks(T);
  std::vector<Vec> ks(T);
  for (int t = T - 1; t >= 0; --t) {
    auto ldlt = inner_factor(Qi, Bi, P, beta);
    Mat G = beta * Bi.transpose() * P * A;
    Vec g0 = beta * Bi.transpose() * (p - P * w[t]);
    Mat HinvG = ldlt.solve(G);
    Vec Hinvg0 = ldlt.solve(g0);
    Ks[t] = HinvG;
    ks[t] = Hinvg0;
    Mat Pn = Rt + beta * A.transpose() * P * A - G.transpose() * HinvG;
    Vec pn = beta * A.transpose() * (p - P * w[t]) - G.transpose() * Hinvg0;
    P = 0.5 * (Pn + Pn.transpose());
    p = pn;
  }

  LqBestResponse out;
  Vec x = traj.states[0];
  double disc = 1.0;
  for (int t = 0; t < T; ++t) {
    Vec v = Ks[t] * x + ks[t];
    for (int k = 0; k < dim; ++k) {
      if (std::abs(v[k]) > action_limit) {
        out.bound_active = true;
        v[k] = std::copysign(action_limit, v[k]);
      }
    }
    Vec cur = traj.actions[t].segment(off, dim);
    const Vec& xc = traj.states[t];
    out.current_return += disc * (xc.dot(Rt * xc) + cur.dot(Qi * cur));
    out.best_return += disc * (x.dot(Rt * x) + v.dot(Qi * v));
    x = A * x - Bi * v - w[t];
    out.deviation.push_back(std::move(v));
    disc *= beta;
  }
  return out;
}

}  // namespace dpg
