#include "solver_oracles.hpp"

#include "dlspfi/dictionary.hpp"
#include "dlspfi/error.hpp"
#include "dlspfi/homotopy.hpp"
#include "dlspfi/lasso.hpp"

#include <doctest.h>

#include <random>

using namespace dlspfi;

namespace {

struct Instance {
  Eigen::MatrixXd a;
  Eigen::VectorXd y;
};

Instance random_instance(std::mt19937_64& rng, int rows, int cols, double noise) {
  std::normal_distribution<double> g;
  Instance in{Eigen::MatrixXd(rows, cols), Eigen::VectorXd::Zero(rows)};
  for (auto& v : in.a.reshaped()) v = g(rng);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(cols);
  std::uniform_int_distribution<int> pick(0, cols - 1);
  for (int k = 0; k < 2; ++k) x0[pick(rng)] = g(rng);
  in.y = in.a * x0;
  for (auto& v : in.y) v += noise * g(rng);
  return in;
}

int support(const Eigen::VectorXd& x) { return static_cast<int>((x.array() != 0.0).count()); }

}  // namespace

TEST_CASE("weighted lasso matches the support-enumeration oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uw(0.5, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 60; ++trial) {
    const Instance in = random_instance(rng, 10, 8, 0.3);
    Eigen::VectorXd w(8);
    for (auto& v : w) v = uw(rng) * 2.0;
    for (LassoMethod method : {LassoMethod::kHomotopy, LassoMethod::kProximalGradient}) {
      LassoOptions opts;
      opts.method = method;
      // The proximal-gradient path is an option, checked at a looser gap.
      const bool exact = method == LassoMethod::kHomotopy;
      opts.tolerance = exact ? 1e-9 : 1e-5;
      opts.max_iterations = 200000;
      const double gap = exact ? 1e-8 : 1e-5;
      const LassoResult r = weighted_lasso(in.a, in.y, w, opts);
      if (support(r.x) > 3) continue;
      const double ref = oracle::lasso_min(in.a, in.y, w, 3);
      CHECK(r.objective == doctest::Approx(lasso_objective(in.a, in.y, w, r.x)).epsilon(1e-14));
      CHECK(r.objective - ref <= gap);
      CHECK(ref - r.objective <= gap);
      CHECK(r.kkt_residual <= opts.tolerance);
      if (method == LassoMethod::kHomotopy) ++checked;
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("lasso limits") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(6, 6);
  for (auto& v : a.reshaped()) v = g(rng);
  a += 3.0 * Eigen::MatrixXd::Identity(6, 6);
  Eigen::VectorXd y(6);
  for (auto& v : y) v = g(rng);

  SUBCASE("zero penalty on a square system is the inverse") {
    const LassoResult r = weighted_lasso(a, y, Eigen::VectorXd::Zero(6));
    CHECK((r.x - a.lu().solve(y)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("dead zone") {
    const Eigen::VectorXd w = 2.0 * (a.transpose() * y).cwiseAbs();
    CHECK(weighted_lasso(a, y, w).x.isZero(0.0));
    CHECK(weighted_lasso(a, y, w.array() + 1.0).x.isZero(0.0));
  }
  SUBCASE("shape and sign errors") {
    CHECK_THROWS_AS(weighted_lasso(a, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(6)), Error);
    CHECK_THROWS_AS(weighted_lasso(a, y, -Eigen::VectorXd::Ones(6)), Error);
  }
}

TEST_CASE("weighted l1 norm is non-increasing in the penalty scale") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(rng, 12, 20, 0.1);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(20);
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0}) {
      const LassoResult r = weighted_lasso(in.a, in.y, lam * w);
      const double l1 = r.x.lpNorm<1>();
      CHECK(l1 <= prev + 1e-9);
      prev = l1;
    }
  }
}

TEST_CASE("kkt residual on a wide ill-conditioned problem") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(40, 120);
  for (auto& v : a.reshaped()) v = g(rng);
  // nearly collinear column pairs
  for (int j = 0; j < 60; j += 2) a.col(j + 1) = a.col(j) + 1e-4 * a.col(j + 1);
  Eigen::VectorXd y(40);
  for (auto& v : y) v = g(rng);
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(120, 1e-3);
  const LassoResult r = weighted_lasso(a, y, w);
  CHECK(r.kkt_residual <= 1e-8);
  CHECK(lasso_kkt_residual(a, y, w, r.x) == doctest::Approx(r.kkt_residual));
}

TEST_CASE("homotopy penalty and residual stops") {
  std::mt19937_64 rng(5);
  const Instance in = random_instance(rng, 15, 10, 0.2);
  const Eigen::MatrixXd gram = in.a.transpose() * in.a;
  const Eigen::VectorXd aty = in.a.transpose() * in.y;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(10);
  const HomotopyResult p = solve_homotopy(gram, aty, in.y.squaredNorm(), w, HomotopyStop::at_penalty(0.3));
  CHECK(p.t == doctest::Approx(0.3));
  // 1/2 ||Ax-y||^2 + t|x|_1 has optimality A^T(y - Ax) in t * subgradient
  const Eigen::VectorXd c = in.a.transpose() * (in.y - in.a * p.x);
  for (int i = 0; i < 10; ++i) {
    if (p.x[i] != 0.0) CHECK(c[i] == doctest::Approx(0.3 * (p.x[i] > 0 ? 1.0 : -1.0)).epsilon(1e-10));
    else CHECK(std::abs(c[i]) <= 0.3 + 1e-10);
  }
  const double eps = 0.5 * in.y.norm();
  const HomotopyResult r = solve_homotopy(gram, aty, in.y.squaredNorm(), w, HomotopyStop::at_residual(eps));
  CHECK((in.a * r.x - in.y).norm() == doctest::Approx(eps).epsilon(1e-10));
  CHECK(r.residual == doctest::Approx(eps).epsilon(1e-10));
  CHECK_THROWS_AS(solve_homotopy(gram.topLeftCorner(5, 5), aty.head(5), in.y.squaredNorm(),
                                 w.head(5), HomotopyStop::at_residual(1e-12)),
                  InfeasibleError);
}

TEST_CASE("constrained sparse coding matches the support-enumeration oracle") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 60; ++trial) {
    const int rows = 6 + trial % 5;
    Eigen::MatrixXd d(rows, 8);
    for (auto& v : d.reshaped()) v = g(rng);
    d.colwise().normalize();
    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(8);
    c0[trial % 8] = 1.0 + g(rng);
    c0[(trial * 3 + 1) % 8] += 0.5 * g(rng);
    const Eigen::VectorXd clean = d * c0;
    Eigen::VectorXd noise(rows);
    for (auto& v : noise) v = g(rng);
    const Eigen::VectorXd a = clean + 0.05 * clean.norm() * noise.normalized();
    const double eps = 0.1 * clean.norm();
    const SparseCoder coder(d);
    const SparseCode code = coder.code(a, eps);
    if (support(code.c) > 3) continue;
    const double ref = oracle::constrained_l1_min(d, a, eps, 3);
    CHECK(std::abs(code.l1 - ref) <= 1e-8);
    CHECK(code.residual <= eps * (1.0 + 1e-12));
    CHECK(sparse_code_kkt_residual(d, a, code, eps) <= 1e-6);
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("sparse coding trivial cases") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd d(20, 30);
  for (auto& v : d.reshaped()) v = g(rng);
  d.colwise().normalize();
  const SparseCoder coder(d);
  const SparseCode zero = coder.code(Eigen::VectorXd::Zero(20), 0.01);
  CHECK(zero.c.isZero(0.0));
  for (int j : {0, 7, 29}) {
    const SparseCode c = coder.code(d.col(j), 0.01);
    CHECK(c.l1 <= 1.0);
    CHECK(std::abs(c.c[j]) == doctest::Approx(c.l1));
    CHECK(support(c.c) == 1);
  }
  // rank-deficient target not reachable at tight epsilon
  Eigen::MatrixXd thin = d.leftCols(3);
  CHECK_THROWS_AS(SparseCoder(thin).code(Eigen::VectorXd::Ones(20), 1e-6), InfeasibleError);
  CHECK_THROWS_AS(coder.code(Eigen::VectorXd::Ones(19), 0.1), Error);
}

TEST_CASE("batch sparse coding: parallel equals serial") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  Eigen::MatrixXd d(30, 50), x(30, 40);
  for (auto& v : d.reshaped()) v = g(rng);
  for (auto& v : x.reshaped()) v = g(rng);
  d.colwise().normalize();
  x.colwise().normalize();
  const SparseCoder coder(d);
  const auto a = sparse_code_batch(coder, x, 0.05);
  const auto b = sparse_code_batch_serial(coder, x, 0.05);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].c == b[i].c);
}
