#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <vector>

namespace dlspfi {

/// Diffusion time that makes b = q^2 numerically (b in s/mm^2, q in mm^-1).
inline constexpr double kDefaultTau = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

/// b = 4 pi^2 tau q^2
inline double b_value(double q, double tau) {
  return 4.0 * std::numbers::pi * std::numbers::pi * tau * q * q;
}

inline double q_from_b(double b, double tau) {
  return std::sqrt(b / (4.0 * std::numbers::pi * std::numbers::pi * tau));
}

struct QSample {
  double q = 0.0;                                   // magnitude, mm^-1
  Eigen::Vector3d u = Eigen::Vector3d::UnitZ();     // unit direction

  Eigen::Vector3d vector() const { return q * u; }
};

/// Ordered list of q-space samples. Directions are unit-norm, magnitudes are
/// non-negative and no two samples coincide. A sample at q = 0 carries the
/// conventional direction +z.
class AcquisitionScheme {
 public:
  AcquisitionScheme() = default;
  explicit AcquisitionScheme(std::vector<QSample> samples, double tau = kDefaultTau);

  /// Builds a scheme from q-vectors; the direction of each vector is its
  /// normalized value.
  static AcquisitionScheme from_vectors(const std::vector<Eigen::Vector3d>& qvecs,
                                        double tau = kDefaultTau);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double tau() const { return tau_; }
  const QSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<QSample>& samples() const { return samples_; }

  double max_q() const;
  double max_b() const;

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

 private:
  std::vector<QSample> samples_;
  double tau_ = kDefaultTau;
};

// Text format: one sample per line. Three columns "qx qy qz" (mm^-1) or four
// columns "b ux uy uz" (s/mm^2 and a direction, normalized on read). '#'
// starts a comment.
AcquisitionScheme read_scheme(std::istream& in, double tau = kDefaultTau);
AcquisitionScheme read_scheme(const std::filesystem::path& path, double tau = kDefaultTau);
void write_scheme(std::ostream& out, const AcquisitionScheme& scheme);
void write_scheme(const std::filesystem::path& path, const AcquisitionScheme& scheme);

}  // namespace dlspfi
