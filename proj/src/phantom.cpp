#include "dlspfi/phantom.hpp"

#include "dlspfi/error.hpp"
#include "dlspfi/io.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

namespace dlspfi {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double TensorSpec::fa() const {
  const double m = md();
  const double num = (lambda_parallel - m) * (lambda_parallel - m) +
                     2.0 * (lambda_perpendicular - m) * (lambda_perpendicular - m);
  const double den = lambda_parallel * lambda_parallel +
                     2.0 * lambda_perpendicular * lambda_perpendicular;
  return std::sqrt(1.5 * num / den);
}

Eigen::Matrix3d TensorSpec::matrix() const {
  return lambda_perpendicular * Eigen::Matrix3d::Identity() +
         (lambda_parallel - lambda_perpendicular) * axis * axis.transpose();
}

TensorSpec tensor_from_md_fa(double md, double fa, const Eigen::Vector3d& axis) {
  if (!(md > 0.0)) throw Error(ErrorCode::kDomain, "MD must be positive");
  if (!(fa >= 0.0 && fa < 1.0)) throw Error(ErrorCode::kDomain, "FA must lie in [0, 1)");
  if (std::abs(axis.norm() - 1.0) > 1e-8) {
    throw Error(ErrorCode::kDomain, "tensor axis is not unit-norm");
  }
  // lambda1 = md (1 + 2 d), lambda2 = md (1 - d) gives FA^2 = 3 d^2 / (1 + 2 d^2).
  const double d = fa / std::sqrt(3.0 - 2.0 * fa * fa);
  return TensorSpec{md * (1.0 + 2.0 * d), md * (1.0 - d), axis};
}

double tensor_signal(const TensorSpec& t, double q, const Eigen::Vector3d& u, double tau) {
  return std::exp(-4.0 * kPi * kPi * tau * q * q * t.apparent_diffusivity(u));
}

MixtureSpec::MixtureSpec(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mixture needs at least one component");
  }
  double sum = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "mixture weights must be non-negative");
    }
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw Error(ErrorCode::kInvalidArgument, "mixture weights must sum to 1");
  }
}

double mixture_signal(const MixtureSpec& m, double q, const Eigen::Vector3d& u, double tau) {
  double s = 0.0;
  for (const auto& c : m.components()) s += c.weight * tensor_signal(c.tensor, q, u, tau);
  return s;
}

SignalFunction as_signal(const MixtureSpec& m, double tau) {
  return [m, tau](double q, const Eigen::Vector3d& u) { return mixture_signal(m, q, u, tau); };
}

SignalFunction as_signal(const TensorSpec& t, double tau) {
  return [t, tau](double q, const Eigen::Vector3d& u) { return tensor_signal(t, q, u, tau); };
}

AcquisitionScheme dsi_grid(int radius, double b_max, double tau) {
  if (radius < 1) throw Error(ErrorCode::kDomain, "DSI radius must be >= 1");
  if (!(b_max > 0.0)) throw Error(ErrorCode::kDomain, "b_max must be positive");
  const double scale = q_from_b(b_max, tau) / radius;
  std::vector<Eigen::Vector3d> pts;
  const int r2 = radius * radius;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j)
      for (int k = -radius; k <= radius; ++k) {
        const int n2 = i * i + j * j + k * k;
        if (n2 == 0 || n2 > r2) continue;
        pts.emplace_back(scale * i, scale * j, scale * k);
      }
  return AcquisitionScheme::from_vectors(pts, tau);
}

std::vector<std::size_t> undersample_indices(const AcquisitionScheme& scheme, double exponent,
                                             int count, std::uint64_t seed) {
  const std::size_t total = scheme.size();
  if (count < 0 || static_cast<std::size_t>(count) > total) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot draw " + std::to_string(count) + " samples from " +
                    std::to_string(total));
  }
  if (!(exponent >= 0.0)) throw Error(ErrorCode::kDomain, "density exponent must be >= 0");
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (static_cast<std::size_t>(count) == total) return all;

  const double q_max = scheme.max_q();
  double q_low = std::numeric_limits<double>::infinity();
  for (const auto& s : scheme)
    if (s.q > 0.0) q_low = std::min(q_low, s.q);

  std::vector<std::size_t> chosen;
  std::vector<std::pair<double, std::size_t>> keyed;
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < total; ++i) {
    const double q = scheme[i].q;
    if (q > 0.0 && std::abs(q - q_low) <= 1e-9 * q_low) {
      chosen.push_back(i);
      continue;
    }
    const double w = std::pow(std::max(0.0, 1.0 - q / q_max), exponent);
    const double r = unif(rng);  // drawn for every candidate to keep streams aligned
    if (w > 0.0) keyed.emplace_back(std::log(std::max(r, 1e-300)) / w, i);
  }
  if (chosen.size() > static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::kInvalidArgument,
                "count is smaller than the retained low-q shell (" +
                    std::to_string(chosen.size()) + ")");
  }
  const std::size_t need = static_cast<std::size_t>(count) - chosen.size();
  if (keyed.size() < need) {
    throw Error(ErrorCode::kInvalidArgument, "not enough samples with nonzero density");
  }
  // Efraimidis-Spirakis weighted sampling: keep the largest log(r)/w keys.
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(need),
                    keyed.end(), [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  for (std::size_t k = 0; k < need; ++k) chosen.push_back(keyed[k].second);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

AcquisitionScheme undersample(const AcquisitionScheme& scheme, double exponent, int count,
                              std::uint64_t seed) {
  const auto idx = undersample_indices(scheme, exponent, count, seed);
  std::vector<QSample> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(scheme[i]);
  return AcquisitionScheme(std::move(out), scheme.tau());
}

std::vector<Eigen::Vector3d> sphere_directions(int n) {
  if (n < 1) throw Error(ErrorCode::kDomain, "direction count must be >= 1");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    Eigen::Vector3d u(r * std::cos(phi), r * std::sin(phi), z);
    dirs.push_back(u.normalized());
  }
  // Fibonacci points crowd across the equator once antipodes are identified;
  // relax with an axis-symmetric Coulomb energy.
  const double spacing = std::sqrt(2.0 * kPi / n);
  for (int it = 0; it < 300 && n > 1; ++it) {
    std::vector<Eigen::Vector3d> force(dirs.size(), Eigen::Vector3d::Zero());
    for (std::size_t i = 0; i < dirs.size(); ++i)
      for (std::size_t j = i + 1; j < dirs.size(); ++j)
        for (double sign : {1.0, -1.0}) {
          const Eigen::Vector3d d = dirs[i] - sign * dirs[j];
          const Eigen::Vector3d f = d / std::pow(d.squaredNorm(), 1.5);
          force[i] += f;
          force[j] -= sign * f;
        }
    double fmax = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      force[i] -= force[i].dot(dirs[i]) * dirs[i];
      fmax = std::max(fmax, force[i].norm());
    }
    if (fmax == 0.0) break;
    const double step = 0.1 * spacing * (1.0 - it / 300.0) / fmax;
    for (std::size_t i = 0; i < dirs.size(); ++i) dirs[i] = (dirs[i] + step * force[i]).normalized();
  }
  for (auto& u : dirs)
    if (u.z() < 0.0 || (u.z() == 0.0 && u.y() < 0.0)) u = -u;
  return dirs;
}

Eigen::Vector3d random_direction(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

double add_rician_noise(double value, double snr, Rng& rng) {
  if (!(snr > 0.0)) throw Error(ErrorCode::kDomain, "SNR must be positive");
  if (std::isinf(snr)) return value;
  std::normal_distribution<double> g(0.0, 1.0 / snr);
  const double re = value + g(rng);
  const double im = g(rng);
  return std::hypot(re, im);
}

PhantomConfig read_phantom_config(std::istream& in) {
  PhantomConfig cfg;
  for (const auto& [key, value] : read_key_values(in)) {
    std::istringstream vs(value);
    auto numbers = [&](std::size_t expected) {
      std::vector<double> v;
      double x;
      while (vs >> x) v.push_back(x);
      if (v.size() != expected || !vs.eof()) {
        throw Error(ErrorCode::kParse, "phantom key '" + key + "' expects " +
                                           std::to_string(expected) + " numbers");
      }
      return v;
    };
    if (key == "tensor") {
      const auto v = numbers(6);
      const Eigen::Vector3d axis = Eigen::Vector3d(v[2], v[3], v[4]);
      if (axis.norm() == 0.0) throw Error(ErrorCode::kParse, "tensor axis is zero");
      cfg.tensors.push_back({v[5], tensor_from_md_fa(v[0], v[1], axis.normalized())});
    } else if (key == "tensor_angles") {
      const auto v = numbers(5);
      const double th = v[2] * kPi / 180.0;
      const double ph = v[3] * kPi / 180.0;
      const Eigen::Vector3d axis(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                 std::cos(th));
      cfg.tensors.push_back({v[4], tensor_from_md_fa(v[0], v[1], axis)});
    } else if (key == "snr") {
      cfg.snr = (value == "inf") ? std::numeric_limits<double>::infinity() : numbers(1)[0];
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(numbers(1)[0]);
    } else if (key == "voxels") {
      cfg.voxels = static_cast<int>(numbers(1)[0]);
      if (cfg.voxels < 1) throw Error(ErrorCode::kParse, "voxels must be >= 1");
    } else {
      throw Error(ErrorCode::kParse, "unknown phantom key '" + key + "'");
    }
  }
  if (cfg.tensors.empty()) throw Error(ErrorCode::kParse, "phantom lists no tensors");
  MixtureSpec check(cfg.tensors);
  return cfg;
}

PhantomConfig read_phantom_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open phantom file: " + path.string());
  return read_phantom_config(in);
}

std::vector<std::vector<double>> synthesize(const PhantomConfig& cfg,
                                            const AcquisitionScheme& scheme) {
  const MixtureSpec mix = cfg.mixture();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(cfg.voxels));
  for (int v = 0; v < cfg.voxels; ++v) {
    std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(v)};
    Rng rng(seq);
    auto& row = out[static_cast<std::size_t>(v)];
    row.reserve(scheme.size());
    for (const auto& s : scheme) {
      row.push_back(add_rician_noise(mixture_signal(mix, s.q, s.u, scheme.tau()), cfg.snr, rng));
    }
  }
  return out;
}

}  // namespace dlspfi
