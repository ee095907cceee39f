#pragma once

// Dictionary over stripped SPF coefficients: learning, sparse coding and
// persistence.

#include "dlspfi/spf_basis.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace dlspfi {

inline constexpr double kReferenceMD = 0.7e-3;  // d0, mm^2/s

/// zeta = 1 / (8 pi^2 tau md)
double adaptive_scale(double md, double tau);

struct Dictionary {
  SPFBasisSpec spec;          // spec.zeta is the reference scale zeta0
  double d0 = kReferenceMD;   // reference MD
  Eigen::MatrixXd atoms;      // stripped_size x K
  Eigen::VectorXd energies;   // K, positive
  int learned_count = 0;      // leading learned atoms; the rest are isotropic

  Eigen::Index atom_count() const { return atoms.cols(); }
  double zeta0() const { return spec.zeta; }
};

struct DLConfig {
  double epsilon = 0.01;
  int n_atoms = 250;
  int batch_size = 256;
  int epochs = 12;
  std::uint64_t seed = 1;
};

struct SparseCode {
  Eigen::VectorXd c;
  double l1 = 0.0;
  double residual = 0.0;     // ||D c - a'||
  double multiplier = 0.0;   // penalty level mu at which the bound is met
};

/// Residual-constrained sparse coder:
///   min ||c||_1  s.t.  ||D c - a'||_2 <= epsilon
/// solved on the l1 regularization path. Holds D^T D; immutable and safe to
/// share across threads.
class SparseCoder {
 public:
  explicit SparseCoder(Eigen::MatrixXd atoms);

  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  /// Throws InfeasibleError when epsilon is below the best reachable residual.
  SparseCode code(const Eigen::VectorXd& a_prime, double epsilon) const;

 private:
  Eigen::MatrixXd atoms_;
  Eigen::MatrixXd gram_;
};

/// Convenience wrapper over SparseCoder for a single vector.
SparseCode sparse_code(const CoefficientVector& a_prime, const Dictionary& d, double epsilon);

/// Codes every column; column-parallel. Infeasible columns are coded at their
/// best reachable residual.
std::vector<SparseCode> sparse_code_batch(const SparseCoder& coder,
                                          const Eigen::MatrixXd& columns, double epsilon);
/// Single-threaded reference for sparse_code_batch.
std::vector<SparseCode> sparse_code_batch_serial(const SparseCoder& coder,
                                                 const Eigen::MatrixXd& columns,
                                                 double epsilon);

/// Largest violation of the constrained-coding optimality conditions at c:
/// D^T r = mu sign(c) on the support, |D^T r| <= mu off it, ||r|| = epsilon,
/// with r = a' - D c.
double sparse_code_kkt_residual(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& a_prime,
                                const SparseCode& code, double epsilon);

struct LearningTrace {
  std::vector<double> mean_l1_per_epoch;
};

/// Online dictionary learning with mini-batches. Sufficient statistics are
/// reset at the start of every epoch. Atoms start as the identity
/// on the first min(rows, n_atoms) columns; the rest are distinct training
/// columns drawn with the seed. Throws Error(kInvalidArgument) for zero
/// training columns or fewer columns than atoms.
Eigen::MatrixXd learn_dictionary(const Eigen::MatrixXd& training, const DLConfig& cfg,
                                 LearningTrace* trace = nullptr);

/// Appends the N isotropic indicator atoms (n, 0, 0), n = 1..N, and sets the
/// reference scale from d0. Energies default to the squared column norms.
Dictionary assemble_dictionary(const Eigen::MatrixXd& learned, const SPFBasisSpec& spec,
                               double d0 = kReferenceMD);

// JSON file: {format, version, rows, atoms, learned, zeta0, d0, spec, energies,
// values (column-major)}. Doubles round-trip exactly.
void save_dictionary(const Dictionary& d, const std::filesystem::path& path);
/// When `expected` is given, a layout (N, L) mismatch is an error naming both.
Dictionary load_dictionary(const std::filesystem::path& path,
                           const std::optional<SPFBasisSpec>& expected = std::nullopt);

}  // namespace dlspfi
