// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DPG_TYPES_H_
#define DPG_TYPES_H_

#include <Eigen/Dense>

namespace dpg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  bool contains(double v, double slack = 0.0) const {
    return v >= lo - slack && v <= hi + slack;
  }
};

}  // namespace dpg

#endif  // DPG_TYPES_H_
