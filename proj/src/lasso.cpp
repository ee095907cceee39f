#include "dlspfi/lasso.hpp"

#include "dlspfi/error.hpp"
#include "dlspfi/homotopy.hpp"

#include <Eigen/QR>

#include <cmath>
#include <string>
#include <vector>

namespace dlspfi {

namespace {

void check_inputs(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& weights) {
  if (a.rows() != y.size() || a.cols() != weights.size()) {
    throw Error(ErrorCode::kShapeMismatch, "weighted_lasso: A is " + std::to_string(a.rows()) +
                                               "x" + std::to_string(a.cols()) + ", y has " +
                                               std::to_string(y.size()) + ", weights have " +
                                               std::to_string(weights.size()));
  }
  if (!a.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::kDomain, "weighted_lasso: non-finite input");
  }
  if ((weights.array() < 0.0).any()) {
    throw Error(ErrorCode::kDomain, "weighted_lasso: negative penalty weight");
  }
}

double soft(double v, double thr) {
  return v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
}

LassoResult fista(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& w, const LassoOptions& opts,
                  const Eigen::VectorXd* start = nullptr) {
  const Eigen::Index p = a.cols();
  Eigen::VectorXd x = start ? *start : Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z = x;
  double theta = 1.0;
  // Initial Lipschitz guess from a few power iterations on 2 A^T A.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(p) / std::sqrt(double(p));
  double lip = 1.0;
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd av = 2.0 * (a.transpose() * (a * v));
    lip = av.norm();
    if (lip == 0.0) break;
    v = av / lip;
  }
  lip = std::max(lip, 1e-300);

  auto smooth = [&](const Eigen::VectorXd& s) { return (a * s - y).squaredNorm(); };
  double kkt = lasso_kkt_residual(a, y, w, x);
  int it = 0;
  for (; it < opts.max_iterations && kkt > opts.tolerance; ++it) {
    const Eigen::VectorXd rz = a * z - y;
    const Eigen::VectorXd grad = 2.0 * (a.transpose() * rz);
    const double fz = rz.squaredNorm();
    Eigen::VectorXd x_new(p);
    for (;;) {
      for (Eigen::Index i = 0; i < p; ++i) x_new[i] = soft(z[i] - grad[i] / lip, w[i] / lip);
      const Eigen::VectorXd d = x_new - z;
      if (smooth(x_new) <= fz + grad.dot(d) + 0.5 * lip * d.squaredNorm() + 1e-15 * fz) break;
      lip *= 2.0;
    }
    const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    // Restart momentum when the objective goes up.
    if (lasso_objective(a, y, w, x_new) > lasso_objective(a, y, w, x)) {
      z = x;
      theta = 1.0;
      continue;
    }
    z = x_new + ((theta - 1.0) / theta_new) * (x_new - x);
    x = std::move(x_new);
    theta = theta_new;
    kkt = lasso_kkt_residual(a, y, w, x);
  }
  if (kkt > opts.tolerance) {
    throw NotConvergedError("proximal gradient did not reach KKT tolerance after " +
                                std::to_string(it) + " iterations (residual " +
                                sci(kkt) + ")",
                            kkt);
  }
  return {x, lasso_objective(a, y, w, x), kkt, it};
}

// Re-solve the stationarity equations on the final support with a QR of the
// active columns. The Gram path loses digits when A^T A is badly scaled.
Eigen::VectorXd polish(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, const Eigen::VectorXd& x) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) support.push_back(i);
  const auto k = static_cast<Eigen::Index>(support.size());
  if (k == 0 || k > a.rows()) return x;
  Eigen::MatrixXd as(a.rows(), k);
  Eigen::VectorXd ws(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    as.col(j) = a.col(support[j]);
    ws[j] = 0.5 * w[support[j]] * (x[support[j]] > 0.0 ? 1.0 : -1.0);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(as);
  const auto r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  // R^T R x = R^T Q^T y - ws
  const Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(k);
  const Eigen::VectorXd u = r.transpose().solve(ws);
  const Eigen::VectorXd xs = r.solve(qty - u);
  if (!xs.allFinite()) return x;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    if ((xs[j] > 0.0) != (x[support[j]] > 0.0)) return x;
    out[support[j]] = xs[j];
  }
  return out;
}

}  // namespace

double lasso_objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& weights, const Eigen::VectorXd& x) {
  return (a * x - y).squaredNorm() + weights.cwiseProduct(x.cwiseAbs()).sum();
}

double lasso_kkt_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights, const Eigen::VectorXd& x) {
  const Eigen::VectorXd g = 2.0 * (a.transpose() * (a * x - y));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = x[i] != 0.0 ? std::abs(g[i] + weights[i] * (x[i] > 0.0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g[i]) - weights[i]);
    worst = std::max(worst, r);
  }
  return worst;
}

LassoResult weighted_lasso(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights, const LassoOptions& opts) {
  check_inputs(a, y, weights);
  if (!(opts.tolerance > 0.0)) throw Error(ErrorCode::kDomain, "tolerance must be positive");
  if (opts.method == LassoMethod::kProximalGradient) return fista(a, y, weights, opts);

  // ||Ax - y||^2 + sum w|x|  ==  2 * (1/2 ||Ax - y||^2 + sum (w/2)|x|).
  const Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd aty = a.transpose() * y;
  HomotopyResult path;
  try {
    path = solve_homotopy(gram, aty, y.squaredNorm(), 0.5 * weights,
                          HomotopyStop::at_penalty(1.0), opts.max_iterations);
  } catch (const NotConvergedError&) {
    if (opts.fallback_iterations <= 0) throw;
    LassoOptions o = opts;
    o.max_iterations = opts.fallback_iterations;
    return fista(a, y, weights, o);
  }
  LassoResult r{path.x, lasso_objective(a, y, weights, path.x),
                lasso_kkt_residual(a, y, weights, path.x), path.steps};
  if (r.kkt_residual > opts.tolerance) {
    const Eigen::VectorXd x = polish(a, y, weights, path.x);
    const double kkt = lasso_kkt_residual(a, y, weights, x);
    if (kkt < r.kkt_residual) r = {x, lasso_objective(a, y, weights, x), kkt, path.steps};
  }
  if (r.kkt_residual > opts.tolerance && opts.fallback_iterations > 0) {
    LassoOptions o = opts;
    o.max_iterations = opts.fallback_iterations;
    return fista(a, y, weights, o, &r.x);
  }
  if (r.kkt_residual > opts.tolerance) {
    throw NotConvergedError("homotopy solution misses KKT tolerance (residual " +
                                sci(r.kkt_residual) + ")",
                            r.kkt_residual);
  }
  return r;
}

}  // namespace dlspfi
