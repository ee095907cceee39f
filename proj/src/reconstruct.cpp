#include "dlspfi/reconstruct.hpp"

#include "dlspfi/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace dlspfi {

ReconConfig ReconConfig::noisy() {
  ReconConfig c;
  c.lambda = c.lambda_l = c.lambda_n = 1e-5;
  c.solver.tolerance = 1e-6;
  return c;
}

double estimate_md(const AcquisitionScheme& scheme, std::span<const double> signal,
                   double md_floor, double md_ceiling) {
  if (signal.size() != scheme.size()) {
    throw Error(ErrorCode::kShapeMismatch, "signal and scheme sizes differ");
  }
  if (!(md_floor > 0.0) || md_ceiling < md_floor) {
    throw Error(ErrorCode::kDomain, "invalid MD clamp range");
  }
  double sxy = 0.0, sxx = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double e = signal[i];
    if (!(scheme[i].q > 0.0) || !(e > 0.0)) continue;
    const double b = b_value(scheme[i].q, scheme.tau());
    const double y = -std::log(std::min(e, 1.0));
    sxy += b * y;
    sxx += b * b;
    ++used;
  }
  if (used < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "MD estimate needs >= 3 samples with q > 0 and E > 0, got " + std::to_string(used));
  }
  // Gauss-Newton on E = exp(-b d) in the signal domain. The log fit is
  // biased low at high b where the Rician floor dominates.
  double d = sxy / sxx;
  for (int it = 0; it < 50; ++it) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < signal.size(); ++i) {
      if (!(scheme[i].q > 0.0)) continue;
      const double b = b_value(scheme[i].q, scheme.tau());
      const double f = std::exp(-b * d);
      num -= b * f * (signal[i] - f);
      den += b * b * f * f;
    }
    if (!(den > 0.0)) break;
    const double next = d + num / den;
    if (!std::isfinite(next) || next <= 0.0) break;
    const bool done = std::abs(next - d) <= 1e-13 * d;
    d = next;
    if (done) break;
  }
  return std::clamp(d, md_floor, md_ceiling);
}

Eigen::VectorXd atom_penalties(const Eigen::MatrixXd& sampled_atoms, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kDomain, "lambda must be >= 0");
  const Eigen::VectorXd h = sampled_atoms.colwise().squaredNorm().transpose();
  const double s = static_cast<double>(sampled_atoms.rows());
  Eigen::VectorXd w(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "atom " + std::to_string(i) + " has zero energy on this scheme");
    }
    w[i] = s * lambda / h[i];
  }
  return w;
}

Eigen::VectorXd spf_penalties(const SPFBasisSpec& spec, double lambda_l, double lambda_n) {
  if (!(lambda_l >= 0.0) || !(lambda_n >= 0.0)) {
    throw Error(ErrorCode::kDomain, "lambda_l and lambda_n must be >= 0");
  }
  Eigen::VectorXd w(spec.stripped_size());
  for (int n = 1; n <= spec.radial_order; ++n)
    for (int l = 0; l <= spec.angular_order; l += 2)
      for (int m = -l; m <= l; ++m) {
        const double ll = double(l) * (l + 1);
        const double nn = double(n) * (n + 1);
        w[spec.stripped_index(n, l, m)] = lambda_l * ll * ll + lambda_n * nn * nn;
      }
  return w;
}

namespace {

VoxelResult finish(const Eigen::VectorXd& a_prime, const SPFBasisSpec& spec, double md,
                   const LassoResult& sol, const Eigen::MatrixXd& a, const Eigen::VectorXd& e) {
  VoxelResult r{complete_coefficients(CoefficientVector(CoefficientKind::kStripped, a_prime, spec)),
                md,
                spec.zeta,
                sol.x,
                static_cast<int>((sol.x.array() != 0.0).count()),
                (a * sol.x - e).norm(),
                sol.kkt_residual};
  return r;
}

SPFBasisSpec adapted_spec(const SPFBasisSpec& base, const AcquisitionScheme& scheme,
                          std::span<const double> signal, const ReconConfig& cfg,
                          double& md) {
  if (std::abs(scheme.tau() - base.tau) > 1e-12 * base.tau) {
    throw Error(ErrorCode::kInvalidArgument, "scheme and basis use different diffusion times");
  }
  md = estimate_md(scheme, signal, cfg.md_floor, cfg.md_ceiling);
  return base.with_zeta(adaptive_scale(md, base.tau));
}

}  // namespace

VoxelResult reconstruct_voxel(const AcquisitionScheme& scheme, std::span<const double> signal,
                              const Dictionary& dict, const ReconConfig& cfg) {
  double md = 0.0;
  const SPFBasisSpec spec = adapted_spec(dict.spec, scheme, signal, cfg, md);
  const double k = scale_free_factor(spec.zeta);
  const Eigen::MatrixXd a = k * (constrained_design_serial(scheme, spec).entries * dict.atoms);
  const Eigen::VectorXd e = shifted_measurements(scheme, signal, spec.zeta);
  const Eigen::VectorXd w = atom_penalties(a, cfg.lambda);
  const LassoResult sol = weighted_lasso(a, e, w, cfg.solver);
  return finish(k * (dict.atoms * sol.x), spec, md, sol, a, e);
}

VoxelResult l1_spfi(const AcquisitionScheme& scheme, std::span<const double> signal,
                    const SPFBasisSpec& base, const ReconConfig& cfg) {
  double md = 0.0;
  const SPFBasisSpec spec = adapted_spec(base, scheme, signal, cfg, md);
  const double k = scale_free_factor(spec.zeta);
  const Eigen::MatrixXd m = k * constrained_design_serial(scheme, spec).entries;
  const Eigen::VectorXd e = shifted_measurements(scheme, signal, spec.zeta);
  const Eigen::VectorXd w = spf_penalties(spec, cfg.lambda_l, cfg.lambda_n);
  const LassoResult sol = weighted_lasso(m, e, w, cfg.solver);
  return finish(k * sol.x, spec, md, sol, m, e);
}

namespace {

VoxelResult run_one(const AcquisitionScheme& scheme, const std::vector<double>& v,
                    const Dictionary& dict, const ReconConfig& cfg, ReconMethod method) {
  return method == ReconMethod::kDictionary ? reconstruct_voxel(scheme, v, dict, cfg)
                                            : l1_spfi(scheme, v, dict.spec, cfg);
}

}  // namespace

std::vector<VoxelResult> reconstruct_batch(const AcquisitionScheme& scheme,
                                           const std::vector<std::vector<double>>& voxels,
                                           const Dictionary& dict, const ReconConfig& cfg,
                                           ReconMethod method) {
  std::vector<std::optional<VoxelResult>> tmp(voxels.size());
  std::vector<std::string> errors(voxels.size());
  const auto n = static_cast<std::ptrdiff_t>(voxels.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      tmp[k] = run_one(scheme, voxels[k], dict, cfg, method);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  std::vector<VoxelResult> out;
  out.reserve(voxels.size());
  for (std::size_t k = 0; k < voxels.size(); ++k) {
    if (!tmp[k]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "voxel " + std::to_string(k) + ": " + errors[k]);
    }
    out.push_back(std::move(*tmp[k]));
  }
  return out;
}

std::vector<VoxelResult> reconstruct_batch_serial(const AcquisitionScheme& scheme,
                                                  const std::vector<std::vector<double>>& voxels,
                                                  const Dictionary& dict, const ReconConfig& cfg,
                                                  ReconMethod method) {
  std::vector<VoxelResult> out;
  out.reserve(voxels.size());
  for (std::size_t k = 0; k < voxels.size(); ++k) {
    try {
      out.push_back(run_one(scheme, voxels[k], dict, cfg, method));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, "voxel " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

double rmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size() || truth.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "RMSE inputs must be non-empty and equally sized");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(truth.size()));
}

double predict_and_rmse(const CoefficientVector& a, const AcquisitionScheme& reference,
                        std::span<const double> reference_signal) {
  const Eigen::VectorXd est = evaluate_signal(a, reference);
  return rmse(std::span<const double>(est.data(), static_cast<std::size_t>(est.size())),
              reference_signal);
}

}  // namespace dlspfi
