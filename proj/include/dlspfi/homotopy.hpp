#pragma once

// Piecewise-linear regularization path for
//
//   min_x  1/2 ||A x - y||^2 + t * sum_i w_i |x_i|,   w_i >= 0,
//
// followed from t = infinity downwards in Gram form (A^T A, A^T y, y^T y).
// Coordinates with w_i = 0 are unpenalized and active from the start. The
// path stops either at a target penalty t or at the first t where
// ||A x - y|| reaches a residual bound, which solves the constrained problem
// min sum w_i |x_i| s.t. ||A x - y|| <= eps.

#include <Eigen/Core>

#include <vector>

namespace dlspfi {

struct HomotopyStop {
  enum class Kind { kPenalty, kResidual };
  Kind kind = Kind::kPenalty;
  double value = 0.0;  // target t, or residual bound eps

  static HomotopyStop at_penalty(double t) { return {Kind::kPenalty, t}; }
  static HomotopyStop at_residual(double eps) { return {Kind::kResidual, eps}; }
};

struct HomotopyResult {
  Eigen::VectorXd x;
  double t = 0.0;          // penalty level at the returned point
  double residual = 0.0;   // ||A x - y||
  int steps = 0;           // path breakpoints visited
  std::vector<int> active; // indices with x_i allowed nonzero
};

/// Throws InfeasibleError when a residual bound is below the smallest
/// residual on the path, NotConvergedError after `max_steps` breakpoints and
/// Error(kInvalidArgument) when the unpenalized columns are rank deficient.
HomotopyResult solve_homotopy(const Eigen::MatrixXd& gram, const Eigen::VectorXd& aty,
                              double yty, const Eigen::VectorXd& weights, HomotopyStop stop,
                              int max_steps = 0);

}  // namespace dlspfi
