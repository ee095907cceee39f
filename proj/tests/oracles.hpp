#pragma once

// Reference evaluations written independently of the library code paths:
// explicit-sum Laguerre polynomials, closed-form normalization via tgamma and
// std::assoc_legendre spherical harmonics.

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace oracle {

inline double gen_binomial(double a, int k) {  // C(a, k) for real a
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (a - i) / (i + 1);
  return r;
}

// L_n^alpha(x) = sum_k (-1)^k C(n + alpha, n - k) x^k / k!
inline double laguerre(int n, double alpha, double x) {
  double s = 0.0, fact = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) fact *= k;
    s += ((k % 2) ? -1.0 : 1.0) * gen_binomial(n + alpha, n - k) * std::pow(x, k) / fact;
  }
  return s;
}

inline double radial(int n, double q, double zeta) {
  const double norm =
      std::sqrt(2.0 / std::pow(zeta, 1.5) * std::tgamma(n + 1.0) / std::tgamma(n + 1.5));
  return norm * std::exp(-q * q / (2.0 * zeta)) * laguerre(n, 0.5, q * q / zeta);
}

// Real harmonic without Condon-Shortley phase: cos for m > 0, sin(|m|) for m < 0.
inline double sh(int l, int m, const Eigen::Vector3d& u) {
  const double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
  const double phi = std::atan2(u.y(), u.x());
  const int am = std::abs(m);
  const double k = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) *
                             std::tgamma(l - am + 1.0) / std::tgamma(l + am + 1.0));
  const double p = std::assoc_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am),
                                       std::cos(theta));
  if (m == 0) return k * p;
  return std::sqrt(2.0) * k * p * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

}  // namespace oracle
