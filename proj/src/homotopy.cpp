#include "dlspfi/homotopy.hpp"

#include "dlspfi/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dlspfi {

namespace {

// Columns whose new Cholesky pivot falls below this fraction of their own
// Gram diagonal are numerically inside the active span.
constexpr double kPivotTolerance = 1e-10;

// Cholesky factor of G[active, active], grown one column at a time.
class ActiveCholesky {
 public:
  explicit ActiveCholesky(Eigen::Index capacity) : l_(capacity, capacity) {}

  Eigen::Index size() const { return k_; }

  // Returns false (and leaves the factor unchanged) if the column is
  // numerically dependent on the active ones.
  bool append(const Eigen::MatrixXd& gram, const std::vector<int>& active, int j) {
    const double gjj = gram(j, j);
    if (!(gjj > 0.0)) return false;
    Eigen::VectorXd w(k_);
    for (Eigen::Index i = 0; i < k_; ++i) w[i] = gram(active[static_cast<std::size_t>(i)], j);
    if (k_ > 0) l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(w);
    const double d2 = gjj - w.squaredNorm();
    if (!(d2 > kPivotTolerance * gjj)) return false;
    if (k_ > 0) l_.row(k_).head(k_) = w.transpose();
    l_(k_, k_) = std::sqrt(d2);
    ++k_;
    return true;
  }

  void rebuild(const Eigen::MatrixXd& gram, const std::vector<int>& active) {
    k_ = 0;
    std::vector<int> prefix;
    for (int j : active) {
      if (!append(gram, prefix, j)) {
        throw Error(ErrorCode::kInvalidArgument, "active columns became rank deficient");
      }
      prefix.push_back(j);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = b;
    const auto lk = l_.topLeftCorner(k_, k_);
    lk.triangularView<Eigen::Lower>().solveInPlace(x);
    lk.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

 private:
  Eigen::MatrixXd l_;
  Eigen::Index k_ = 0;
};

}  // namespace

HomotopyResult solve_homotopy(const Eigen::MatrixXd& gram, const Eigen::VectorXd& aty,
                              double yty, const Eigen::VectorXd& weights, HomotopyStop stop,
                              int max_steps) {
  const Eigen::Index p = gram.rows();
  if (gram.cols() != p || aty.size() != p || weights.size() != p) {
    throw Error(ErrorCode::kShapeMismatch, "homotopy inputs have inconsistent sizes");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw Error(ErrorCode::kDomain, "penalty weights must be finite and non-negative");
  }
  if (!(stop.value >= 0.0)) throw Error(ErrorCode::kDomain, "stop value must be >= 0");
  if (max_steps <= 0) max_steps = static_cast<int>(20 * p + 100);

  const bool residual_stop = stop.kind == HomotopyStop::Kind::kResidual;
  const double eps2 = stop.value * stop.value;

  std::vector<int> active;
  std::vector<double> sign(static_cast<std::size_t>(p), 0.0);
  std::vector<char> is_active(static_cast<std::size_t>(p), 0);
  std::vector<char> excluded(static_cast<std::size_t>(p), 0);
  ActiveCholesky chol(p);

  for (Eigen::Index j = 0; j < p; ++j) {
    if (weights[j] == 0.0) {
      if (!chol.append(gram, active, static_cast<int>(j))) {
        throw Error(ErrorCode::kInvalidArgument, "unpenalized columns are rank deficient");
      }
      active.push_back(static_cast<int>(j));
      is_active[static_cast<std::size_t>(j)] = 1;
    }
  }

  HomotopyResult result;
  double t = std::numeric_limits<double>::infinity();
  int just_added = -1;
  int just_dropped = -1;
  int stalled = 0;

  Eigen::VectorXd u, v;
  auto assemble = [&](double at) {
    result.x = Eigen::VectorXd::Zero(p);
    for (std::size_t i = 0; i < active.size(); ++i) {
      result.x[active[i]] = u[static_cast<Eigen::Index>(i)] - at * v[static_cast<Eigen::Index>(i)];
    }
    result.t = at;
    result.active = active;
    const double r2 = yty - 2.0 * result.x.dot(aty) + result.x.dot(gram * result.x);
    result.residual = std::sqrt(std::max(0.0, r2));
    return result;
  };

  for (int step = 0;; ++step) {
    if (step > max_steps) {
      assemble(t);
      throw NotConvergedError("homotopy path exceeded " + std::to_string(max_steps) +
                                  " breakpoints",
                              result.residual);
    }
    result.steps = step;
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd aty_a(k), ws_a(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const int j = active[static_cast<std::size_t>(i)];
      aty_a[i] = aty[j];
      ws_a[i] = weights[j] * sign[static_cast<std::size_t>(j)];
    }
    u = k > 0 ? chol.solve(aty_a) : Eigen::VectorXd();
    v = k > 0 ? chol.solve(ws_a) : Eigen::VectorXd();

    // Residual^2 along the segment is P + R t^2 (the linear term cancels).
    const double p_term = yty - (k > 0 ? u.dot(aty_a) : 0.0);
    const double r_term = k > 0 ? v.dot(ws_a) : 0.0;

    // Correlations of inactive columns: alpha + t beta.
    Eigen::VectorXd alpha = aty, beta = Eigen::VectorXd::Zero(p);
    if (k > 0) {
      const Eigen::MatrixXd ga = gram(Eigen::all, active);
      alpha.noalias() -= ga * u;
      beta.noalias() += ga * v;
    }

    if (std::isinf(t)) {
      // Start of the path: nothing penalized is active yet.
      double t0 = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (is_active[static_cast<std::size_t>(j)] || weights[j] == 0.0) continue;
        t0 = std::max(t0, std::abs(alpha[j]) / weights[j]);
      }
      const bool done = residual_stop ? p_term <= eps2 : t0 <= stop.value;
      if (done || t0 == 0.0) {
        if (!done && residual_stop) {
          assemble(0.0);
          throw InfeasibleError("residual bound below the smallest reachable residual",
                                std::sqrt(std::max(0.0, p_term)));
        }
        return assemble(residual_stop ? t0 : std::max(stop.value, 0.0));
      }
      t = t0;
    }

    // Next join.
    double t_join = 0.0;
    int join_idx = -1;
    double join_sign = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto js = static_cast<std::size_t>(j);
      if (is_active[js] || excluded[js] || weights[j] == 0.0 || j == just_dropped) continue;
      const double c_now = alpha[j] + t * beta[j];
      if (std::abs(c_now) >= t * weights[j] * (1.0 - 1e-12)) {
        if (t > t_join || join_idx < 0) {
          t_join = t;
          join_idx = static_cast<int>(j);
          join_sign = c_now >= 0.0 ? 1.0 : -1.0;
        }
        continue;
      }
      for (double s : {1.0, -1.0}) {
        const double den = s * weights[j] - beta[j];
        if (den == 0.0) continue;
        const double tc = alpha[j] / den;
        if (tc > 0.0 && tc < t && tc > t_join) {
          t_join = tc;
          join_idx = static_cast<int>(j);
          join_sign = s;
        }
      }
    }

    // Next drop: a penalized active coordinate reaching zero.
    double t_drop = 0.0;
    int drop_pos = -1;
    for (Eigen::Index i = 0; i < k; ++i) {
      const int j = active[static_cast<std::size_t>(i)];
      if (weights[j] == 0.0 || j == just_added) continue;
      const double sj = sign[static_cast<std::size_t>(j)];
      const double x_now = u[i] - t * v[i];
      double tc;
      if (sj * x_now <= 0.0) {
        tc = t;
      } else if (v[i] != 0.0) {
        tc = u[i] / v[i];
        if (!(tc > 0.0 && tc < t)) continue;
      } else {
        continue;
      }
      if (tc > t_drop) {
        t_drop = tc;
        drop_pos = static_cast<int>(i);
      }
    }

    const double t_event = std::max(t_join, t_drop);
    const double t_floor = residual_stop ? 0.0 : stop.value;

    if (residual_stop) {
      // Smallest t on this segment with residual <= eps.
      if (p_term + r_term * t_event * t_event <= eps2) {
        const double te = r_term > 0.0 ? std::sqrt(std::max(0.0, (eps2 - p_term) / r_term)) : t;
        return assemble(std::min(t, std::max(te, t_event)));
      }
    } else if (t_event <= t_floor) {
      return assemble(t_floor);
    }

    if (join_idx < 0 && drop_pos < 0) {
      // The segment runs to t = 0 without reaching the residual bound.
      assemble(0.0);
      throw InfeasibleError("residual bound below the smallest reachable residual",
                            result.residual);
    }

    // Ties at one breakpoint can make joins and drops cycle without moving t.
    stalled = t_event < t ? 0 : stalled + 1;
    if (stalled > p) {
      assemble(t);
      throw NotConvergedError("homotopy path stalled at a degenerate breakpoint",
                              result.residual);
    }
    t = t_event;
    just_added = -1;
    just_dropped = -1;
    if (drop_pos >= 0 && t_drop >= t_join) {
      const int j = active[static_cast<std::size_t>(drop_pos)];
      active.erase(active.begin() + drop_pos);
      is_active[static_cast<std::size_t>(j)] = 0;
      sign[static_cast<std::size_t>(j)] = 0.0;
      chol.rebuild(gram, active);
      just_dropped = j;
    } else {
      if (chol.append(gram, active, join_idx)) {
        active.push_back(join_idx);
        is_active[static_cast<std::size_t>(join_idx)] = 1;
        sign[static_cast<std::size_t>(join_idx)] = join_sign;
        just_added = join_idx;
      } else {
        excluded[static_cast<std::size_t>(join_idx)] = 1;
      }
    }
  }
}

}  // namespace dlspfi
