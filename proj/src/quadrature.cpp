#include "dlspfi/quadrature.hpp"

#include "dlspfi/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace dlspfi {

namespace {

// Returns (L_n^alpha(x), L_{n-1}^alpha(x)).
std::pair<double, double> laguerre_pair(int n, double alpha, double x) {
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

}  // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::kDomain, "Gauss-Legendre order must be >= 1");
  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

GaussRule gauss_laguerre(int n, double alpha) {
  if (n < 1) throw Error(ErrorCode::kDomain, "Gauss-Laguerre order must be >= 1");
  if (!(alpha > -1.0)) throw Error(ErrorCode::kDomain, "Laguerre alpha must exceed -1");
  // Golub-Welsch for the starting nodes.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    jacobi(k, k) = 2.0 * k + 1.0 + alpha;
    if (k + 1 < n) {
      const double b = std::sqrt((k + 1.0) * (k + 1.0 + alpha));
      jacobi(k, k + 1) = b;
      jacobi(k + 1, k) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
  GaussRule rule{eig.eigenvalues(), Eigen::VectorXd(n)};
  const double log_const = std::lgamma(n + alpha + 1.0) - std::lgamma(n + 1.0) -
                           2.0 * std::log(n + 1.0);
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i];
    for (int iter = 0; iter < 20; ++iter) {
      const auto [ln, ln1] = laguerre_pair(n, alpha, x);
      const double d = (n * ln - (n + alpha) * ln1) / x;
      const double dx = ln / d;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::max(1.0, x)) break;
    }
    rule.nodes[i] = x;
    const auto [ln_next, ln_cur] = laguerre_pair(n + 1, alpha, x);
    (void)ln_cur;
    rule.weights[i] = std::exp(log_const + std::log(x) - 2.0 * std::log(std::abs(ln_next)));
  }
  return rule;
}

SphereRule product_sphere_rule(int polar, int azimuthal, bool hemisphere) {
  if (polar < 1 || azimuthal < 1) throw Error(ErrorCode::kDomain, "sphere rule orders must be >= 1");
  if (hemisphere && polar % 2 != 0) {
    throw Error(ErrorCode::kDomain, "hemisphere rule needs an even polar order");
  }
  const GaussRule gl = gauss_legendre(polar);
  SphereRule rule;
  rule.hemisphere = hemisphere;
  std::vector<double> w;
  const double dphi = 2.0 * std::numbers::pi / azimuthal;
  for (int i = 0; i < polar; ++i) {
    const double z = gl.nodes[i];
    if (hemisphere && z <= 0.0) continue;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int k = 0; k < azimuthal; ++k) {
      const double phi = dphi * (k + 0.5);
      rule.directions.emplace_back(s * std::cos(phi), s * std::sin(phi), z);
      rule.directions.back().normalize();
      w.push_back(gl.weights[i] * dphi * (hemisphere ? 2.0 : 1.0));
    }
  }
  rule.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return rule;
}

}  // namespace dlspfi
