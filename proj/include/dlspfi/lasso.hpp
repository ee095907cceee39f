#pragma once

// Weighted LASSO:  min_x ||A x - y||_2^2 + sum_i w_i |x_i|,  w_i >= 0.

#include <Eigen/Core>

namespace dlspfi {

enum class LassoMethod {
  kHomotopy,          // exact piecewise-linear path (default)
  kProximalGradient,  // FISTA with backtracking
};

struct LassoOptions {
  LassoMethod method = LassoMethod::kHomotopy;
  double tolerance = 1e-8;   // KKT residual required at exit
  int max_iterations = 10000;
  // Proximal-gradient iterations used when the homotopy path stalls or
  // misses the tolerance. 0 disables the fallback.
  int fallback_iterations = 500000;
};

struct LassoResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

double lasso_objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& weights, const Eigen::VectorXd& x);

/// Largest violation of the optimality conditions, with g = 2 A^T (A x - y):
/// |g_i + w_i sign(x_i)| on nonzero x_i, max(0, |g_i| - w_i) on zero x_i.
double lasso_kkt_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights, const Eigen::VectorXd& x);

/// Throws NotConvergedError (carrying the final KKT residual) when the
/// tolerance is not met within max_iterations.
LassoResult weighted_lasso(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights, const LassoOptions& opts = {});

}  // namespace dlspfi
