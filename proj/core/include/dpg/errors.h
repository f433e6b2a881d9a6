// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DPG_ERRORS_H_
#define DPG_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace dpg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Inconsistent dimensions, bad indices or otherwise malformed input.
class SpecificationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "specification"; }
};

// A callable returned NaN/Inf. Carries whatever location info the caller had.
class NumericalDomainError : public Error {
 public:
  NumericalDomainError(const std::string& what, int player = -1, int t = -1,
                       double lambda = -1.0, std::vector<double> point = {})
      : Error(what), player_(player), t_(t), lambda_(lambda),
        point_(std::move(point)) {}
  const char* kind() const noexcept override { return "numerical-domain"; }
  int player() const { return player_; }
  int t() const { return t_; }
  double lambda() const { return lambda_; }
  const std::vector<double>& point() const { return point_; }

 private:
  int player_;
  int t_;
  double lambda_;
  std::vector<double> point_;
};

class FeasibilityError : public Error {
 public:
  FeasibilityError(const std::string& what, int t, int player)
      : Error(what), t_(t), player_(player) {}
  const char* kind() const noexcept override { return "feasibility"; }
  int t() const { return t_; }
  int player() const { return player_; }

 private:
  int t_;
  int player_;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "conditioning"; }
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_residual,
                      int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  const char* kind() const noexcept override { return "non-convergence"; }
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double spectral_radius)
      : Error(what), spectral_radius_(spectral_radius) {}
  const char* kind() const noexcept override { return "instability"; }
  double spectral_radius() const { return spectral_radius_; }

 private:
  double spectral_radius_;
};

// Parameter values that are well-formed but violate a modelling requirement,
// e.g. a cost matrix that is not negative definite.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace dpg

#endif  // DPG_ERRORS_H_
