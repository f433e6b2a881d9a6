// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DPG_NUMERICS_H_
#define DPG_NUMERICS_H_

#include <functional>
#include <vector>

#include "dpg/types.h"

namespace dpg {

// Gauss-Legendre rule mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached per order; thread-safe.
const QuadratureRule& gauss_legendre(int order);

using ScalarField = std::function<double(const Vec&)>;

// Central first difference along coordinate i.
double fd_partial(const ScalarField& f, const Vec& z, int i, double h);
Vec fd_gradient(const ScalarField& f, const Vec& z, double h);
// Second-order central estimate of d2f/dz_i dz_j. Uses the three-point
// formula when i == j.
double fd_second(const ScalarField& f, const Vec& z, int i, int j, double h);

double spectral_radius(const Mat& a);
double inf_norm(const Mat& a);  // max absolute entry
bool all_finite(const Vec& v);

}  // namespace dpg

#endif  // DPG_NUMERICS_H_
