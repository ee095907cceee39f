#pragma once

// Per-voxel signal reconstruction from (undersampled) q-space measurements.

#include "dlspfi/acquisition.hpp"
#include "dlspfi/dictionary.hpp"
#include "dlspfi/lasso.hpp"
#include "dlspfi/spf_basis.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace dlspfi {

struct ReconConfig {
  double lambda = 1e-8;     // DL-SPFI atom penalty scale
  double lambda_l = 1e-8;   // L1-SPFI angular weight
  double lambda_n = 1e-8;   // L1-SPFI radial weight
  double md_floor = 0.1e-3;
  double md_ceiling = 3.0e-3;
  LassoOptions solver{};

  /// Defaults for noisy data: lambda = lambda_l = lambda_n = 1e-5, KKT tol 1e-6.
  static ReconConfig noisy();
};

/// Mono-exponential MD: least-squares slope of -ln E against b = 4 pi^2 tau q^2
/// through the origin, over samples with q > 0 and 0 < E, then refined by
/// least squares on E = exp(-b d) over all q > 0 samples, clamped to
/// [floor, ceiling]. Throws Error(kInvalidArgument) with fewer than three
/// usable samples.
double estimate_md(const AcquisitionScheme& scheme, std::span<const double> signal,
                   double md_floor = 0.1e-3, double md_ceiling = 3.0e-3);

/// Lambda_i = S lambda / h_i with h_i the squared norm of column i.
Eigen::VectorXd atom_penalties(const Eigen::MatrixXd& sampled_atoms, double lambda);

/// Lambda_nlm = lambda_l l^2 (l+1)^2 + lambda_n n^2 (n+1)^2 over the stripped layout.
Eigen::VectorXd spf_penalties(const SPFBasisSpec& spec, double lambda_l, double lambda_n);

struct VoxelResult {
  CoefficientVector coefficients;  // full layout at the adapted scale
  double md = 0.0;
  double zeta = 0.0;
  Eigen::VectorXd code;      // LASSO solution: atom codes, or scale-free a' for L1-SPFI
  int nonzeros = 0;          // nonzero LASSO coefficients
  double residual = 0.0;     // ||A x - e'||
  double kkt_residual = 0.0;
};

// Both solvers work on the scale-free design zeta^{3/4} M', so codes and
// penalties are the same for any length unit and for any pair of scenes
// related by q-scaling. Returned coefficients are converted back.

/// DL-SPFI: estimate MD, adapt zeta, weighted LASSO over zeta^{3/4} M' D, then complete.
VoxelResult reconstruct_voxel(const AcquisitionScheme& scheme, std::span<const double> signal,
                              const Dictionary& dict, const ReconConfig& cfg);

/// L1-SPFI baseline over the SPF basis itself, same MD-adapted scale.
VoxelResult l1_spfi(const AcquisitionScheme& scheme, std::span<const double> signal,
                    const SPFBasisSpec& spec, const ReconConfig& cfg);

enum class ReconMethod { kDictionary, kL1Spfi };

/// Voxel-parallel batch over a shared read-only dictionary.
std::vector<VoxelResult> reconstruct_batch(const AcquisitionScheme& scheme,
                                           const std::vector<std::vector<double>>& voxels,
                                           const Dictionary& dict, const ReconConfig& cfg,
                                           ReconMethod method = ReconMethod::kDictionary);
/// Single-threaded reference for reconstruct_batch.
std::vector<VoxelResult> reconstruct_batch_serial(const AcquisitionScheme& scheme,
                                                  const std::vector<std::vector<double>>& voxels,
                                                  const Dictionary& dict, const ReconConfig& cfg,
                                                  ReconMethod method = ReconMethod::kDictionary);

/// ||E_hat - E||_2 / sqrt(S) over the reference samples.
double predict_and_rmse(const CoefficientVector& a, const AcquisitionScheme& reference,
                        std::span<const double> reference_signal);

double rmse(std::span<const double> estimate, std::span<const double> truth);

}  // namespace dlspfi
