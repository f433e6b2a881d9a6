// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg/numerics.h"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include <Eigen/Eigenvalues>

#include "dpg/errors.h"

namespace dpg {
namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int m = 2; m <= n; ++m) {
    double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

QuadratureRule make_rule(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double dp = legendre(n, x).second;
    double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half of the [-1,1] weight
    rule.nodes[k] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - k] = 0.5 * (1.0 + x);
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1) throw SpecificationError("quadrature order must be >= 1");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) {
    QuadratureRule r;
    if (order == 1) {
      r.nodes = {0.5};
      r.weights = {1.0};
    } else {
      r = make_rule(order);
    }
    it = cache.emplace(order, std::move(r)).first;
  }
  return it->second;
}

double fd_partial(const ScalarField& f, const Vec& z, int i, double h) {
  Vec p = z, m = z;
  p[i] += h;
  m[i] -= h;
  return (f(p) - f(m)) / (2.0 * h);
}

Vec fd_gradient(const ScalarField& f, const Vec& z, double h) {
  Vec g(z.size());
  for (int i = 0; i < z.size(); ++i) g[i] = fd_partial(f, z, i, h);
  return g;
}

double fd_second(const ScalarField& f, const Vec& z, int i, int j, double h) {
  if (i == j) {
    Vec p = z, m = z;
    p[i] += h;
    m[i] -= h;
    return (f(p) - 2.0 * f(z) + f(m)) / (h * h);
  }
  Vec pp = z, pm = z, mp = z, mm = z;
  pp[i] += h, pp[j] += h;
  pm[i] += h, pm[j] -= h;
  mp[i] -= h, mp[j] += h;
  mm[i] -= h, mm[j] -= h;
  return (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
}

double spectral_radius(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double inf_norm(const Mat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace dpg
