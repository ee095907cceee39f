#include "dlspfi/error.hpp"
#include "dlspfi/phantom.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace dlspfi;

TEST_CASE("tensor from md and fa") {
  const TensorSpec iso = tensor_from_md_fa(0.7e-3, 0.0, Eigen::Vector3d(1, 1, 0).normalized());
  CHECK(iso.lambda_parallel == doctest::Approx(0.7e-3).epsilon(1e-14));
  CHECK(iso.lambda_perpendicular == doctest::Approx(0.7e-3).epsilon(1e-14));
  for (double fa : {0.0, 0.05, 0.3, 0.6, 0.8, 0.9, 0.99}) {
    const TensorSpec t = tensor_from_md_fa(1.1e-3, fa, Eigen::Vector3d::UnitY());
    CHECK(t.fa() == doctest::Approx(fa).epsilon(1e-10).scale(1.0));
    CHECK(t.md() == doctest::Approx(1.1e-3).epsilon(1e-13));
    // FA from the eigenvalues of the assembled matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.matrix());
    const Eigen::Vector3d ev = es.eigenvalues();
    const double m = ev.mean();
    const double fa2 = std::sqrt(1.5 * (ev.array() - m).square().sum() / ev.array().square().sum());
    CHECK(fa2 == doctest::Approx(fa).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS(tensor_from_md_fa(-1e-3, 0.5, Eigen::Vector3d::UnitZ()), Error);
  CHECK_THROWS_AS(tensor_from_md_fa(1e-3, 1.0, Eigen::Vector3d::UnitZ()), Error);
}

TEST_CASE("prolate eigenvalue ratio matches a bisection root") {
  // FA(r) for lambda1 = r lambda2, lambda2 = lambda3; solve FA(r) = 0.9 by bisection.
  auto fa_of = [](double r) {
    const double m = (r + 2.0) / 3.0;
    const double num = (r - m) * (r - m) + 2.0 * (1.0 - m) * (1.0 - m);
    return std::sqrt(1.5 * num / (r * r + 2.0));
  };
  double lo = 1.0, hi = 1e6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fa_of(mid) < 0.9 ? lo : hi) = mid;
  }
  const TensorSpec t = tensor_from_md_fa(0.7e-3, 0.9, Eigen::Vector3d::UnitZ());
  CHECK(t.lambda_parallel / t.lambda_perpendicular == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
  CHECK(t.matrix()(2, 2) == doctest::Approx(t.lambda_parallel).epsilon(1e-14));
}

TEST_CASE("tensor and mixture signals") {
  const double tau = kDefaultTau;
  const TensorSpec iso = tensor_from_md_fa(0.9e-3, 0.0, Eigen::Vector3d::UnitX());
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector3d u = random_direction(rng);
    const double q = 10.0 * i;
    CHECK(tensor_signal(iso, q, u, tau) ==
          doctest::Approx(std::exp(-4.0 * std::numbers::pi * std::numbers::pi * tau * q * q * 0.9e-3)).epsilon(1e-13));
  }
  const TensorSpec t1 = tensor_from_md_fa(0.7e-3, 0.8, Eigen::Vector3d::UnitX());
  const TensorSpec t2 = tensor_from_md_fa(0.7e-3, 0.8, Eigen::Vector3d::UnitY());
  CHECK(tensor_signal(t1, 0.0, Eigen::Vector3d::UnitX(), tau) == 1.0);
  const double v = tensor_signal(t1, 30.0, Eigen::Vector3d::UnitZ(), tau);
  CHECK(v > 0.0);
  CHECK(v < 1.0);

  const MixtureSpec one({{1.0, t1}});
  const MixtureSpec same({{0.5, t1}, {0.5, t1}});
  const MixtureSpec cross({{0.5, t1}, {0.5, t2}});
  const Eigen::Vector3d bis = Eigen::Vector3d(1, 1, 0).normalized();
  for (double q : {0.0, 20.0, 60.0}) {
    CHECK(mixture_signal(one, q, bis, tau) == tensor_signal(t1, q, bis, tau));
    CHECK(mixture_signal(same, q, bis, tau) == doctest::Approx(tensor_signal(t1, q, bis, tau)).epsilon(1e-15));
    CHECK(mixture_signal(cross, q, bis, tau) ==
          doctest::Approx(0.5 * (tensor_signal(t1, q, bis, tau) + tensor_signal(t2, q, bis, tau))).epsilon(1e-15));
  }
  CHECK_THROWS_AS(MixtureSpec({{0.5, t1}, {0.4, t2}}), Error);
  CHECK_THROWS_AS(MixtureSpec({{1.2, t1}, {-0.2, t2}}), Error);
}

TEST_CASE("dsi grid counts and symmetry") {
  const AcquisitionScheme g = dsi_grid();
  CHECK(g.size() == 514u);
  CHECK(dsi_grid(1).size() == 6u);
  // independent lattice enumeration
  int count = 0;
  for (int x = -5; x <= 5; ++x)
    for (int y = -5; y <= 5; ++y)
      for (int z = -5; z <= 5; ++z) {
        const int r2 = x * x + y * y + z * z;
        if (r2 > 0 && r2 <= 25) ++count;
      }
  CHECK(count == 514);
  CHECK(g.max_b() == doctest::Approx(8000.0).epsilon(1e-12));
  std::set<std::tuple<long, long, long>> pts;
  for (const auto& s : g) {
    const Eigen::Vector3d v = s.vector();
    pts.insert({std::lround(v.x() * 1e6), std::lround(v.y() * 1e6), std::lround(v.z() * 1e6)});
  }
  for (const auto& s : g) {
    const Eigen::Vector3d v = -s.vector();
    CHECK(pts.count({std::lround(v.x() * 1e6), std::lround(v.y() * 1e6), std::lround(v.z() * 1e6)}) == 1u);
  }
}

TEST_CASE("undersampling") {
  const AcquisitionScheme g = dsi_grid();
  const auto a = undersample_indices(g, 3.0, 170, 42);
  const auto b = undersample_indices(g, 3.0, 170, 42);
  CHECK(a == b);
  CHECK(a.size() == 170u);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(undersample_indices(g, 3.0, 170, 43) != a);
  // the six innermost samples are always present
  const double q1 = g.max_q() / 5.0;
  int inner = 0;
  for (auto i : a) inner += std::abs(g[i].q - q1) < 1e-9 * q1;
  CHECK(inner == 6);
  // full count is the identity
  const auto all = undersample_indices(g, 3.0, 514, 1);
  CHECK(all.size() == 514u);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  CHECK_THROWS_AS(undersample_indices(g, 3.0, 515, 1), Error);
  const AcquisitionScheme sub = undersample(g, 3.0, 170, 42);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(sub[i].q == g[a[i]].q);
}

TEST_CASE("undersampling density favors low q") {
  const AcquisitionScheme g = dsi_grid();
  double mean_sub = 0.0, mean_uniform = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (auto i : undersample_indices(g, 3.0, 170, s)) mean_sub += g[i].q;
    for (auto i : undersample_indices(g, 0.0, 170, s)) mean_uniform += g[i].q;
  }
  CHECK(mean_sub < 0.8 * mean_uniform);
}

TEST_CASE("sphere directions") {
  const auto one = sphere_directions(1);
  REQUIRE(one.size() == 1u);
  CHECK(one[0].norm() == doctest::Approx(1.0).epsilon(1e-15));
  const auto d = sphere_directions(321);
  REQUIRE(d.size() == 321u);
  double min_angle = 180.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      const double c = std::min(1.0, std::abs(d[i].dot(d[j])));  // axes
      min_angle = std::min(min_angle, std::acos(c) * 180.0 / std::numbers::pi);
    }
  CHECK(min_angle > 5.0);
}

TEST_CASE("rician noise statistics") {
  Rng rng(123);
  CHECK(add_rician_noise(0.37, std::numeric_limits<double>::infinity(), rng) == 0.37);
  const int n = 1000000;
  const double snr = 20.0, sigma = 1.0 / snr;
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < n; ++i) {
    s0 += add_rician_noise(0.0, snr, rng);
    s1 += add_rician_noise(1.0, snr, rng);
  }
  CHECK(s0 / n == doctest::Approx(sigma * std::sqrt(std::numbers::pi / 2.0)).epsilon(0.01));
  // Rician mean for A >> sigma: A + sigma^2 / (2A)
  CHECK(s1 / n > 1.0);
  CHECK(s1 / n == doctest::Approx(1.0 + sigma * sigma / 2.0).epsilon(2e-4));
}

TEST_CASE("phantom config parsing and synthesis") {
  std::istringstream in(
      "# two fibers\n"
      "tensor = 0.7e-3 0.8 1 0 0 0.5\n"
      "tensor_angles = 0.7e-3 0.8 90 60 0.5\n"
      "snr = 20\nseed = 9\nvoxels = 3\n");
  const PhantomConfig cfg = read_phantom_config(in);
  REQUIRE(cfg.tensors.size() == 2u);
  CHECK(cfg.tensors[1].tensor.axis.x() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cfg.snr == 20.0);
  CHECK(cfg.voxels == 3);
  const AcquisitionScheme g = dsi_grid(2);
  const auto v1 = synthesize(cfg, g);
  const auto v2 = synthesize(cfg, g);
  REQUIRE(v1.size() == 3u);
  CHECK(v1 == v2);
  CHECK(v1[0] != v1[1]);

  std::istringstream bad("tensor = 0.7e-3 0.8 1 0 0 0.5\ncolour = red\n");
  CHECK_THROWS_AS(read_phantom_config(bad), Error);
  std::istringstream weights("tensor = 0.7e-3 0.8 1 0 0 0.5\n");
  CHECK_THROWS_AS(read_phantom_config(weights), Error);
}
