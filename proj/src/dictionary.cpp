#include "dlspfi/dictionary.hpp"

#include "dlspfi/error.hpp"
#include "dlspfi/homotopy.hpp"
#include "dlspfi/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace dlspfi {

double adaptive_scale(double md, double tau) {
  if (!(md > 0.0)) throw Error(ErrorCode::kDomain, "MD must be positive");
  if (!(tau > 0.0)) throw Error(ErrorCode::kDomain, "tau must be positive");
  return 1.0 / (8.0 * std::numbers::pi * std::numbers::pi * tau * md);
}

SparseCoder::SparseCoder(Eigen::MatrixXd atoms) : atoms_(std::move(atoms)) {
  gram_.noalias() = atoms_.transpose() * atoms_;
}

SparseCode SparseCoder::code(const Eigen::VectorXd& a_prime, double epsilon) const {
  if (a_prime.size() != atoms_.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "sparse_code: vector length " +
                                               std::to_string(a_prime.size()) +
                                               " does not match dictionary rows " +
                                               std::to_string(atoms_.rows()));
  }
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::kDomain, "epsilon must be >= 0");
  const Eigen::VectorXd aty = atoms_.transpose() * a_prime;
  const HomotopyResult path =
      solve_homotopy(gram_, aty, a_prime.squaredNorm(), Eigen::VectorXd::Ones(atoms_.cols()),
                     HomotopyStop::at_residual(epsilon));
  SparseCode out;
  out.c = path.x;
  out.l1 = path.x.lpNorm<1>();
  out.residual = (atoms_ * path.x - a_prime).norm();
  out.multiplier = path.t;
  return out;
}

SparseCode sparse_code(const CoefficientVector& a_prime, const Dictionary& d, double epsilon) {
  if (a_prime.kind() != CoefficientKind::kStripped) {
    throw Error(ErrorCode::kInvalidArgument, "sparse_code needs a stripped vector");
  }
  if (!a_prime.spec().same_layout(d.spec)) {
    throw Error(ErrorCode::kShapeMismatch, "coefficient layout does not match the dictionary");
  }
  return SparseCoder(d.atoms).code(a_prime.values(), epsilon);
}

namespace {

SparseCode code_or_best(const SparseCoder& coder, const Eigen::VectorXd& col, double epsilon) {
  try {
    return coder.code(col, epsilon);
  } catch (const InfeasibleError& e) {
    return coder.code(col, e.best_residual() * (1.0 + 1e-9) + 1e-15);
  }
}

}  // namespace

std::vector<SparseCode> sparse_code_batch(const SparseCoder& coder,
                                          const Eigen::MatrixXd& columns, double epsilon) {
  std::vector<SparseCode> out(static_cast<std::size_t>(columns.cols()));
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < columns.cols(); ++i) {
    out[static_cast<std::size_t>(i)] = code_or_best(coder, columns.col(i), epsilon);
  }
  return out;
}

std::vector<SparseCode> sparse_code_batch_serial(const SparseCoder& coder,
                                                 const Eigen::MatrixXd& columns,
                                                 double epsilon) {
  std::vector<SparseCode> out;
  out.reserve(static_cast<std::size_t>(columns.cols()));
  for (Eigen::Index i = 0; i < columns.cols(); ++i) {
    out.push_back(code_or_best(coder, columns.col(i), epsilon));
  }
  return out;
}

double sparse_code_kkt_residual(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& a_prime,
                                const SparseCode& code, double epsilon) {
  const Eigen::VectorXd r = a_prime - atoms * code.c;
  const double rn = r.norm();
  if ((code.c.array() == 0.0).all()) {
    // Zero code: optimal iff the bound is already met.
    return std::max(0.0, rn - epsilon);
  }
  const Eigen::VectorXd corr = atoms.transpose() * r;
  const double mu = code.multiplier;
  double worst = std::abs(rn - epsilon);
  for (Eigen::Index i = 0; i < corr.size(); ++i) {
    const double ci = code.c[i];
    const double v = ci != 0.0 ? std::abs(corr[i] - mu * (ci > 0.0 ? 1.0 : -1.0))
                               : std::max(0.0, std::abs(corr[i]) - mu);
    worst = std::max(worst, v);
  }
  return worst;
}

Eigen::MatrixXd learn_dictionary(const Eigen::MatrixXd& training, const DLConfig& cfg,
                                 LearningTrace* trace) {
  const Eigen::Index m = training.rows();
  const Eigen::Index n = training.cols();
  const Eigen::Index k = cfg.n_atoms;
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "n_atoms must be >= 1");
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::kDomain, "epsilon_dl must be positive");
  if (cfg.batch_size < 1 || cfg.epochs < 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1 and epochs >= 0");
  }
  if (n < k) {
    throw Error(ErrorCode::kInvalidArgument, "training set has " + std::to_string(n) +
                                                 " columns, fewer than " + std::to_string(k) +
                                                 " atoms");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(training.col(j).norm() > 1e-12)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "training column " + std::to_string(j) + " is all zero");
    }
  }

  std::mt19937_64 rng(cfg.seed);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, k);
  const Eigen::Index n_identity = std::min(m, k);
  d.leftCols(n_identity).topRows(n_identity).setIdentity();
  {
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    Eigen::Index filled = n_identity;
    for (int attempt = 0; filled < k; ++attempt) {
      if (attempt > 1000 * k) {
        throw Error(ErrorCode::kInvalidArgument, "not enough distinct training columns");
      }
      const Eigen::VectorXd cand = training.col(pick(rng)).normalized();
      const double max_cos = (d.leftCols(filled).transpose() * cand).cwiseAbs().maxCoeff();
      if (max_cos < 1.0 - 1e-6) d.col(filled++) = cand;
    }
  }

  Eigen::MatrixXd a_stat = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd b_stat = Eigen::MatrixXd::Zero(m, k);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const double eta = cfg.batch_size;
  long batch_no = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Finite training set: drop statistics gathered with older dictionaries.
    a_stat.setZero();
    b_stat.setZero();
    batch_no = 0;
    std::shuffle(order.begin(), order.end(), rng);
    double l1_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd x(m, bs);
      for (Eigen::Index i = 0; i < bs; ++i) x.col(i) = training.col(order[static_cast<std::size_t>(start + i)]);

      const SparseCoder coder(d);
      const auto codes = sparse_code_batch(coder, x, cfg.epsilon);
      Eigen::MatrixXd c(k, bs);
      for (Eigen::Index i = 0; i < bs; ++i) {
        c.col(i) = codes[static_cast<std::size_t>(i)].c;
        l1_sum += codes[static_cast<std::size_t>(i)].l1;
      }

      // Forgetting factor for mini-batch sufficient statistics.
      ++batch_no;
      const double t = static_cast<double>(batch_no);
      const double theta = t < eta ? t * eta : eta * eta + t - eta;
      const double beta = (theta + 1.0 - eta) / (theta + 1.0);
      a_stat = beta * a_stat + c * c.transpose();
      b_stat = beta * b_stat + x * c.transpose();

      // Block-coordinate descent over atoms, each renormalized to unit norm.
      for (Eigen::Index j = 0; j < k; ++j) {
        const double ajj = a_stat(j, j);
        if (!(ajj > 1e-12)) continue;
        Eigen::VectorXd u = (b_stat.col(j) - d * a_stat.col(j)) / ajj + d.col(j);
        const double un = u.norm();
        if (un > 1e-12) d.col(j) = u / un;
      }
    }
    if (trace) trace->mean_l1_per_epoch.push_back(l1_sum / static_cast<double>(n));
  }
  return d;
}

Dictionary assemble_dictionary(const Eigen::MatrixXd& learned, const SPFBasisSpec& spec,
                               double d0) {
  spec.validate();
  if (learned.rows() != spec.stripped_size()) {
    throw Error(ErrorCode::kShapeMismatch, "learned atoms have " + std::to_string(learned.rows()) +
                                               " rows, basis spec needs " +
                                               std::to_string(spec.stripped_size()));
  }
  Dictionary d;
  d.spec = spec.with_zeta(adaptive_scale(d0, spec.tau));
  d.d0 = d0;
  d.learned_count = static_cast<int>(learned.cols());
  d.atoms.resize(learned.rows(), learned.cols() + spec.radial_order);
  d.atoms.leftCols(learned.cols()) = learned;
  for (int nn = 1; nn <= spec.radial_order; ++nn) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(learned.rows());
    e[spec.stripped_index(nn, 0, 0)] = 1.0;
    d.atoms.col(learned.cols() + nn - 1) = e;
  }
  d.energies = d.atoms.colwise().squaredNorm().transpose();
  return d;
}

void save_dictionary(const Dictionary& d, const std::filesystem::path& path) {
  nlohmann::json j = {
      {"format", "dlspfi-dictionary"},
      {"version", 1},
      {"rows", d.atoms.rows()},
      {"atoms", d.atoms.cols()},
      {"learned", d.learned_count},
      {"zeta0", d.zeta0()},
      {"d0", d.d0},
      {"spec", spec_to_json(d.spec)},
      {"energies", std::vector<double>(d.energies.data(), d.energies.data() + d.energies.size())},
      {"values", std::vector<double>(d.atoms.data(), d.atoms.data() + d.atoms.size())},
  };
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write dictionary file: " + path.string());
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Dictionary load_dictionary(const std::filesystem::path& path,
                           const std::optional<SPFBasisSpec>& expected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dictionary file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "malformed dictionary file " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format") != "dlspfi-dictionary") {
      throw Error(ErrorCode::kParse, "not a dictionary file: " + path.string());
    }
    if (j.at("version") != 1) {
      throw Error(ErrorCode::kVersion, "unsupported dictionary version " +
                                           j.at("version").dump() + " in " + path.string());
    }
    Dictionary d;
    d.spec = spec_from_json(j.at("spec"));
    d.d0 = j.at("d0").get<double>();
    d.learned_count = j.at("learned").get<int>();
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto atoms = j.at("atoms").get<Eigen::Index>();
    if (rows != d.spec.stripped_size()) {
      throw Error(ErrorCode::kShapeMismatch, "dictionary rows " + std::to_string(rows) +
                                                 " do not match its spec (" +
                                                 std::to_string(d.spec.stripped_size()) + ")");
    }
    if (expected && !expected->same_layout(d.spec)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "dictionary layout N=" + std::to_string(d.spec.radial_order) +
                      " L=" + std::to_string(d.spec.angular_order) + " does not match requested N=" +
                      std::to_string(expected->radial_order) +
                      " L=" + std::to_string(expected->angular_order));
    }
    const auto values = j.at("values").get<std::vector<double>>();
    const auto energies = j.at("energies").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * atoms ||
        static_cast<Eigen::Index>(energies.size()) != atoms) {
      throw Error(ErrorCode::kShapeMismatch, "dictionary payload size does not match its header");
    }
    d.atoms = Eigen::Map<const Eigen::MatrixXd>(values.data(), rows, atoms);
    d.energies = Eigen::Map<const Eigen::VectorXd>(energies.data(), atoms);
    if ((d.energies.array() <= 0.0).any()) {
      throw Error(ErrorCode::kParse, "dictionary energies must be positive");
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "malformed dictionary file " + path.string() + ": " + e.what());
  }
}

}  // namespace dlspfi
