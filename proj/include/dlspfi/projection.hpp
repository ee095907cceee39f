#pragma once

// Analysis of continuous signals onto the SPF basis by numerical inner
// product, and the training-set front end for dictionary learning.

#include "dlspfi/phantom.hpp"
#include "dlspfi/quadrature.hpp"
#include "dlspfi/spf_basis.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>

namespace dlspfi {

/// Radial rule in x = q^2 / zeta: integral f(q) q^2 dq is
/// zeta^{3/2} / 2 * sum_k radial_weights[k] f(sqrt(zeta x_k)).
/// The spherical rule integrates over S^2 (or a hemisphere, see SphereRule).
struct QuadratureRule {
  Eigen::VectorXd radial_nodes;
  Eigen::VectorXd radial_weights;
  SphereRule sphere;

  std::size_t node_count() const {
    return static_cast<std::size_t>(radial_nodes.size()) * sphere.directions.size();
  }
};

struct QuadratureOptions {
  int radial_order = 24;
  int polar_order = 32;
  int azimuthal_order = 64;
  /// Half the angular nodes; exact only for antipodally symmetric signals.
  bool hemisphere = true;
};

QuadratureRule make_quadrature(const QuadratureOptions& opts = {});

/// Projects signals onto one basis spec with one rule. Immutable after
/// construction; project() may be called concurrently.
class SPFProjector {
 public:
  SPFProjector(const SPFBasisSpec& spec, QuadratureRule rule);

  const SPFBasisSpec& spec() const { return spec_; }
  const QuadratureRule& rule() const { return rule_; }

  /// Full coefficient vector a_nlm = <E, G_n Y_l^m>.
  CoefficientVector project(const SignalFunction& signal) const;

  /// Same for a mixture of tensors, with the per-node quadratic forms
  /// evaluated once per direction.
  CoefficientVector project(const MixtureSpec& mixture) const;

 private:
  CoefficientVector finish(const Eigen::MatrixXd& values) const;

  SPFBasisSpec spec_;
  QuadratureRule rule_;
  Eigen::VectorXd node_q_;           // q at each radial node
  Eigen::MatrixXd radial_weighted_;  // nr x (N+1): W_k zeta^{3/2}/2 G_n(q_k)
  Eigen::MatrixXd angular_weighted_; // na x block: w_j Y_lm(u_j)
};

CoefficientVector project_signal(const SignalFunction& signal, const SPFBasisSpec& spec,
                                 const QuadratureRule& rule);

/// Grid of single-tensor training signals.
struct TrainingGrid {
  double md_min = 0.5e-3;
  double md_max = 0.9e-3;
  int n_md = 5;
  double fa_min = 0.0;
  double fa_max = 0.9;
  int n_fa = 10;
  int directions = 321;

  std::vector<double> md_values() const;
  std::vector<double> fa_values() const;
};

/// Unit-norm stripped coefficient columns, one per (MD, FA, direction).
/// Grid points whose stripped coefficients vanish (isotropic tensors at the
/// basis scale, represented exactly by the n >= 1 isotropic atoms) are
/// skipped and counted in `skipped`.
struct TrainingSet {
  SPFBasisSpec spec;
  TrainingGrid grid;
  Eigen::MatrixXd columns;  // stripped_size x count
  int skipped = 0;
};

TrainingSet build_training_set(const TrainingGrid& grid, const SPFBasisSpec& spec,
                               const QuadratureRule& rule);
/// Single-threaded reference for build_training_set.
TrainingSet build_training_set_serial(const TrainingGrid& grid, const SPFBasisSpec& spec,
                                      const QuadratureRule& rule);

/// Relative size below which a stripped vector is treated as zero.
inline constexpr double kNegligibleStripped = 1e-10;

/// ||a'|| <= kNegligibleStripped * ||a||
bool stripped_is_negligible(const CoefficientVector& full);

// Array file: one JSON header line, then column-major little-endian doubles.
void save_training_set(const std::filesystem::path& path, const TrainingSet& set);
TrainingSet load_training_set(const std::filesystem::path& path);

}  // namespace dlspfi
