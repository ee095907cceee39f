#pragma once

// Exhaustive support/sign enumeration for small l1 problems.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

template <class F>
void for_each_support(int p, int max_size, F&& f) {
  std::vector<int> s;
  auto rec = [&](auto& self, int start) -> void {
    if (!s.empty()) f(s);
    if (static_cast<int>(s.size()) == max_size) return;
    for (int i = start; i < p; ++i) {
      s.push_back(i);
      self(self, i + 1);
      s.pop_back();
    }
  };
  rec(rec, 0);
}

inline Eigen::VectorXd signs(unsigned bits, std::size_t k) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) s[static_cast<Eigen::Index>(i)] = (bits >> i) & 1u ? -1.0 : 1.0;
  return s;
}

// min ||A x - y||^2 + sum w |x| over supports of size <= max_size.
inline double lasso_min(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                        int max_size) {
  double best = y.squaredNorm();
  for_each_support(static_cast<int>(a.cols()), max_size, [&](const std::vector<int>& s) {
    const Eigen::MatrixXd as = a(Eigen::all, s);
    const Eigen::MatrixXd g = as.transpose() * as;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    for (unsigned bits = 0; bits < (1u << s.size()); ++bits) {
      const Eigen::VectorXd sg = signs(bits, s.size());
      const Eigen::VectorXd ws = w(s).cwiseProduct(sg);
      const Eigen::VectorXd x = ldlt.solve(as.transpose() * y - 0.5 * ws);
      if (((x.array() * sg.array()) <= 0.0).any()) continue;
      const double f = (as * x - y).squaredNorm() + ws.dot(x);
      best = std::min(best, f);
    }
  });
  return best;
}

// min ||c||_1 s.t. ||D c - a|| <= eps over supports of size <= max_size.
inline double constrained_l1_min(const Eigen::MatrixXd& d, const Eigen::VectorXd& a, double eps,
                                 int max_size) {
  if (a.norm() <= eps) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for_each_support(static_cast<int>(d.cols()), max_size, [&](const std::vector<int>& s) {
    const Eigen::MatrixXd ds = d(Eigen::all, s);
    const Eigen::MatrixXd g = ds.transpose() * ds;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    const Eigen::VectorXd cls = ldlt.solve(ds.transpose() * a);
    const double rho2 = eps * eps - (ds * cls - a).squaredNorm();
    if (rho2 < 0.0) return;
    for (unsigned bits = 0; bits < (1u << s.size()); ++bits) {
      const Eigen::VectorXd sg = signs(bits, s.size());
      const Eigen::VectorXd gs = ldlt.solve(sg);
      const Eigen::VectorXd c = cls - std::sqrt(rho2 / sg.dot(gs)) * gs;
      if (((c.array() * sg.array()) <= 0.0).any()) continue;
      best = std::min(best, c.lpNorm<1>());
    }
  });
  return best;
}

}  // namespace oracle
