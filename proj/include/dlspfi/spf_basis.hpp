#pragma once

// Spherical Polar Fourier (SPF) basis: B_nlm(q u) = G_n(q|zeta) Y_l^m(u).
//
// Coefficient layout is n-major, then even degrees l = 0, 2, ..., L ascending,
// then m = -l..l. One radial block holds (L+1)(L+2)/2 entries. The "stripped"
// layout drops the n = 0 block; those entries are recovered from E(0) = 1.
//
// Real spherical harmonics (orthonormal on S^2, no Condon-Shortley phase):
//   Y_l^m = sqrt(2) K_l^m P_l^m(cos th) cos(m phi)       m > 0
//   Y_l^0 =         K_l^0 P_l(cos th)
//   Y_l^m = sqrt(2) K_l^|m| P_l^|m|(cos th) sin(|m| phi) m < 0
// with K_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!).

#include "dlspfi/acquisition.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace dlspfi {

struct SPFBasisSpec {
  int radial_order = 4;    // N
  int angular_order = 8;   // L, even
  double zeta = 1.0;       // scale, mm^-2
  double tau = kDefaultTau;

  /// Throws Error(kDomain) when any field is out of range.
  void validate() const;

  int block_size() const { return (angular_order + 1) * (angular_order + 2) / 2; }
  int full_size() const { return (radial_order + 1) * block_size(); }
  int stripped_size() const { return radial_order * block_size(); }

  /// Offset of (l, m) inside one radial block.
  static int angular_index(int l, int m) { return l * (l - 1) / 2 + m + l; }
  int full_index(int n, int l, int m) const { return n * block_size() + angular_index(l, m); }
  /// Index in the stripped layout; n >= 1.
  int stripped_index(int n, int l, int m) const {
    return (n - 1) * block_size() + angular_index(l, m);
  }

  SPFBasisSpec with_zeta(double z) const {
    SPFBasisSpec s = *this;
    s.zeta = z;
    return s;
  }

  bool same_layout(const SPFBasisSpec& o) const {
    return radial_order == o.radial_order && angular_order == o.angular_order;
  }
};

struct NLM {
  int n, l, m;
};

/// (n, l, m) triples in layout order for the full (n >= 0) index space.
std::vector<NLM> full_layout(const SPFBasisSpec& spec);

enum class CoefficientKind { kFull, kStripped, kDictionary };

/// A coefficient vector tagged with its layout. Full and stripped vectors
/// carry the basis spec; dictionary vectors carry the atom count in size().
class CoefficientVector {
 public:
  CoefficientVector(CoefficientKind kind, Eigen::VectorXd values, const SPFBasisSpec& spec);

  static CoefficientVector zeros(CoefficientKind kind, const SPFBasisSpec& spec, int atoms = 0);

  CoefficientKind kind() const { return kind_; }
  const SPFBasisSpec& spec() const { return spec_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

  /// Drops the n = 0 block of a full vector.
  CoefficientVector stripped() const;

 private:
  CoefficientKind kind_;
  Eigen::VectorXd values_;
  SPFBasisSpec spec_;
};

/// Generalized Laguerre polynomial L_n^alpha(x) by three-term recurrence.
double laguerre(int n, double alpha, double x);

/// G_n(q|zeta). Throws Error(kDomain) for n < 0, q < 0 or zeta <= 0.
double radial_basis(int n, double q, double zeta);

/// zeta^{3/4}. G_n(q|zeta) times this factor is a function of q^2/zeta
/// alone, so coefficients divided by it do not depend on the length unit.
double scale_free_factor(double zeta);

/// All G_0..G_N at q.
Eigen::VectorXd radial_basis_all(int radial_order, double q, double zeta);

/// Real SH Y_l^m(u). Throws Error(kDomain) for odd l, |m| > l or non-unit u.
double sh_basis(int l, int m, const Eigen::Vector3d& u);

/// All even-degree real SH up to `angular_order`, in block layout.
Eigen::VectorXd sh_basis_all(int angular_order, const Eigen::Vector3d& u);

/// Constrained design matrix M' (S x stripped_size): column (n, l, m) holds
/// (G_n(q_i) - G_n(0)/G_0(0) G_0(q_i)) Y_l^m(u_i).
struct DesignMatrix {
  Eigen::MatrixXd entries;
  SPFBasisSpec spec;
};

DesignMatrix constrained_design(const AcquisitionScheme& scheme, const SPFBasisSpec& spec);
/// Single-threaded reference for `constrained_design`.
DesignMatrix constrained_design_serial(const AcquisitionScheme& scheme, const SPFBasisSpec& spec);

/// e'_i = E_i - G_0(q_i)/G_0(0) = E_i - exp(-q_i^2 / (2 zeta)).
Eigen::VectorXd shifted_measurements(const AcquisitionScheme& scheme,
                                     std::span<const double> signal, double zeta);

/// Recovers the n = 0 block from a stripped vector so that E(0) = 1.
CoefficientVector complete_coefficients(const CoefficientVector& a_prime);

/// E(q u) = sum a_nlm G_n(q) Y_l^m(u) for a full vector.
double evaluate_signal(const CoefficientVector& a, double q, const Eigen::Vector3d& u);

/// evaluate_signal at every sample of a scheme.
Eigen::VectorXd evaluate_signal(const CoefficientVector& a, const AcquisitionScheme& scheme);

}  // namespace dlspfi
