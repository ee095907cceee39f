#pragma once

#include <Eigen/Core>

#include <vector>

namespace dlspfi {

/// Gauss rule: sum(weights .* f(nodes)) approximates the weighted integral.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Legendre on [-1, 1].
GaussRule gauss_legendre(int n);

/// Generalized Gauss-Laguerre for the weight x^alpha e^{-x} on [0, inf).
/// Nodes are Newton-polished; weights come from the closed form in log space.
GaussRule gauss_laguerre(int n, double alpha);

/// Product rule for integrals over S^2: Gauss-Legendre in cos(theta) times
/// equispaced azimuths. Integrates spherical polynomials of degree
/// < min(2 * polar, azimuthal) exactly. With `hemisphere` only nodes with
/// z > 0 are kept at doubled weight, which is exact for even integrands.
struct SphereRule {
  std::vector<Eigen::Vector3d> directions;
  Eigen::VectorXd weights;
  bool hemisphere = false;
};

SphereRule product_sphere_rule(int polar, int azimuthal, bool hemisphere = false);

}  // namespace dlspfi
