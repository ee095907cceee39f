#pragma once

// Ground-truth signal generators and acquisition schemes.

#include "dlspfi/acquisition.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <vector>

namespace dlspfi {

/// Continuous q-space signal E(q, u); the plug-in interface for phantoms.
using SignalFunction = std::function<double(double q, const Eigen::Vector3d& u)>;

using Rng = std::mt19937_64;

/// Prolate diffusion tensor lambda1 >= lambda2 = lambda3 > 0 about `axis`.
struct TensorSpec {
  double lambda_parallel = 0.0;       // mm^2/s
  double lambda_perpendicular = 0.0;  // mm^2/s
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();

  double md() const { return (lambda_parallel + 2.0 * lambda_perpendicular) / 3.0; }
  double fa() const;
  Eigen::Matrix3d matrix() const;
  /// u^T T u
  double apparent_diffusivity(const Eigen::Vector3d& u) const {
    const double c = axis.dot(u);
    return lambda_perpendicular + (lambda_parallel - lambda_perpendicular) * c * c;
  }
};

/// Prolate tensor with exactly the requested MD and FA. Throws Error(kDomain)
/// for md <= 0, fa outside [0, 1) or a non-unit axis.
TensorSpec tensor_from_md_fa(double md, double fa, const Eigen::Vector3d& axis);

/// exp(-4 pi^2 tau q^2 u^T T u)
double tensor_signal(const TensorSpec& t, double q, const Eigen::Vector3d& u, double tau);

struct MixtureComponent {
  double weight = 1.0;
  TensorSpec tensor;
};

class MixtureSpec {
 public:
  /// Throws Error(kInvalidArgument) on negative weights or sum != 1 (1e-10).
  explicit MixtureSpec(std::vector<MixtureComponent> components);

  const std::vector<MixtureComponent>& components() const { return components_; }

 private:
  std::vector<MixtureComponent> components_;
};

double mixture_signal(const MixtureSpec& m, double q, const Eigen::Vector3d& u, double tau);

SignalFunction as_signal(const MixtureSpec& m, double tau);
SignalFunction as_signal(const TensorSpec& t, double tau);

/// Cartesian DSI lattice: integer points 0 < |k| <= radius, scaled so that
/// |k| = radius reaches b_max.
AcquisitionScheme dsi_grid(int radius = 5, double b_max = 8000.0, double tau = kDefaultTau);

/// Variable-density subsampling without replacement. Sampling density is
/// (1 - |q|/q_max)^exponent; the lowest nonzero |q| shell is always kept.
/// Output keeps the order of the input scheme.
AcquisitionScheme undersample(const AcquisitionScheme& scheme, double exponent, int count,
                              std::uint64_t seed);

/// Indices (into `scheme`) that `undersample` would select.
std::vector<std::size_t> undersample_indices(const AcquisitionScheme& scheme, double exponent,
                                             int count, std::uint64_t seed);

/// Well-spread axes: hemisphere Fibonacci points relaxed under a repulsion
/// that treats u and -u as the same point, returned with z >= 0.
std::vector<Eigen::Vector3d> sphere_directions(int n = 321);

/// Uniformly distributed random unit vector.
Eigen::Vector3d random_direction(Rng& rng);

/// sqrt((E + n1)^2 + n2^2), n1, n2 ~ N(0, 1/snr). Infinite snr returns E.
double add_rician_noise(double value, double snr, Rng& rng);

/// Parsed phantom description.
struct PhantomConfig {
  std::vector<MixtureComponent> tensors;
  double snr = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  int voxels = 1;

  MixtureSpec mixture() const { return MixtureSpec(tensors); }
};

// Flat key-value text:
//   tensor        = <md> <fa> <ax> <ay> <az> <weight>
//   tensor_angles = <md> <fa> <theta_deg> <phi_deg> <weight>
//   snr = 20        (optional, "inf" for noise-free)
//   seed = 1
//   voxels = 1      (noise realizations)
PhantomConfig read_phantom_config(std::istream& in);
PhantomConfig read_phantom_config(const std::filesystem::path& path);

/// Noisy (or noise-free) signals for every voxel of a phantom on a scheme;
/// voxel v uses the stream seeded with (seed, v).
std::vector<std::vector<double>> synthesize(const PhantomConfig& cfg,
                                            const AcquisitionScheme& scheme);

}  // namespace dlspfi
