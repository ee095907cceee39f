#include "dlspfi/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace dlspfi;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  for (int n : {1, 2, 5, 16, 40}) {
    const GaussRule r = gauss_legendre(n);
    REQUIRE(r.nodes.size() == n);
    for (int k = 0; k < 2 * n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
      const double ref = (k % 2) ? 0.0 : 2.0 / (k + 1);
      CHECK(s == doctest::Approx(ref).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("generalized gauss-laguerre moments") {
  // int x^k x^a e^{-x} dx = Gamma(k + a + 1)
  for (double alpha : {0.0, 0.5}) {
    for (int n : {3, 10, 24}) {
      const GaussRule r = gauss_laguerre(n, alpha);
      for (int k = 0; k < std::min(2 * n, 30); ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
        CHECK(s == doctest::Approx(std::tgamma(k + alpha + 1.0)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("sphere rule weights and even moments") {
  for (bool hemi : {false, true}) {
    const SphereRule r = product_sphere_rule(12, 24, hemi);
    CHECK(r.weights.sum() == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-13));
    double zz = 0.0, xxyy = 0.0;
    for (std::size_t j = 0; j < r.directions.size(); ++j) {
      const auto& u = r.directions[j];
      CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-15));
      if (hemi) CHECK(u.z() > 0.0);
      zz += r.weights[static_cast<Eigen::Index>(j)] * u.z() * u.z();
      xxyy += r.weights[static_cast<Eigen::Index>(j)] * u.x() * u.x() * u.y() * u.y();
    }
    CHECK(zz == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-13));
    CHECK(xxyy == doctest::Approx(4.0 * std::numbers::pi / 15.0).epsilon(1e-13));
  }
}

TEST_CASE("hemisphere rule needs an even polar order") {
  CHECK_THROWS(product_sphere_rule(7, 14, true));
  CHECK_THROWS(gauss_legendre(0));
  CHECK_THROWS(gauss_laguerre(0, 0.5));
}
