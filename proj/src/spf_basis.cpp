#include "dlspfi/spf_basis.hpp"

#include "dlspfi/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace dlspfi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitTolerance = 1e-8;

void require_unit(const Eigen::Vector3d& u) {
  if (std::abs(u.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kDomain, "direction is not unit-norm");
  }
}

// sqrt(2 / zeta^{3/2} * n! / Gamma(n + 3/2)), through log-gamma.
double radial_norm(int n, double zeta) {
  return std::exp(0.5 * (std::log(2.0) - 1.5 * std::log(zeta) + std::lgamma(n + 1.0) -
                         std::lgamma(n + 1.5)));
}

// Normalized associated Legendre values with the sin^m(theta) factor removed,
// for even l only, written in block layout next to the azimuthal parts.
void fill_sh(int angular_order, const Eigen::Vector3d& u, double* out) {
  const double x = u.z();
  const std::complex<double> z(u.x(), u.y());
  std::complex<double> zm(1.0, 0.0);  // z^m = sin^m(th) e^{i m phi}
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m <= angular_order; ++m) {
    if (m > 0) {
      pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      zm *= z;
    }
    // Walk l = m, m+1, ..., L with the normalized three-term recurrence.
    auto coef = [m](int l) {
      return std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
    };
    double p_prev2 = 0.0;
    double p_prev = 0.0;
    for (int l = m; l <= angular_order; ++l) {
      double p;
      if (l == m) {
        p = pmm;
      } else if (l == m + 1) {
        p = x * std::sqrt(2.0 * m + 3.0) * pmm;
      } else {
        p = coef(l) * (x * p_prev - p_prev2 / coef(l - 1));
      }
      p_prev2 = p_prev;
      p_prev = p;
      if (l % 2 != 0) continue;
      if (m == 0) {
        out[SPFBasisSpec::angular_index(l, 0)] = p;
      } else {
        out[SPFBasisSpec::angular_index(l, m)] = std::numbers::sqrt2 * p * zm.real();
        out[SPFBasisSpec::angular_index(l, -m)] = std::numbers::sqrt2 * p * zm.imag();
      }
    }
  }
}

void design_row(const QSample& s, const SPFBasisSpec& spec, const Eigen::VectorXd& g0,
                Eigen::VectorXd& ybuf, double* row, Eigen::Index stride) {
  const Eigen::VectorXd g = radial_basis_all(spec.radial_order, s.q, spec.zeta);
  fill_sh(spec.angular_order, s.u, ybuf.data());
  const int block = spec.block_size();
  for (int n = 1; n <= spec.radial_order; ++n) {
    const double radial = g[n] - g0[n] / g0[0] * g[0];
    for (int k = 0; k < block; ++k) {
      row[((n - 1) * block + k) * stride] = radial * ybuf[k];
    }
  }
}

}  // namespace

void SPFBasisSpec::validate() const {
  if (radial_order < 0) throw Error(ErrorCode::kDomain, "radial order N must be >= 0");
  if (angular_order < 0 || angular_order % 2 != 0) {
    throw Error(ErrorCode::kDomain, "angular order L must be even and >= 0");
  }
  if (!(zeta > 0.0) || !std::isfinite(zeta)) {
    throw Error(ErrorCode::kDomain, "scale zeta must be positive");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kDomain, "diffusion time tau must be positive");
  }
}

std::vector<NLM> full_layout(const SPFBasisSpec& spec) {
  std::vector<NLM> out;
  out.reserve(spec.full_size());
  for (int n = 0; n <= spec.radial_order; ++n)
    for (int l = 0; l <= spec.angular_order; l += 2)
      for (int m = -l; m <= l; ++m) out.push_back({n, l, m});
  return out;
}

CoefficientVector::CoefficientVector(CoefficientKind kind, Eigen::VectorXd values,
                                     const SPFBasisSpec& spec)
    : kind_(kind), values_(std::move(values)), spec_(spec) {
  spec_.validate();
  const Eigen::Index expected = kind == CoefficientKind::kFull       ? spec_.full_size()
                                : kind == CoefficientKind::kStripped ? spec_.stripped_size()
                                                                     : values_.size();
  if (values_.size() != expected) {
    throw Error(ErrorCode::kShapeMismatch,
                "coefficient vector has length " + std::to_string(values_.size()) +
                    ", layout requires " + std::to_string(expected));
  }
}

CoefficientVector CoefficientVector::zeros(CoefficientKind kind, const SPFBasisSpec& spec,
                                           int atoms) {
  const Eigen::Index n = kind == CoefficientKind::kFull       ? spec.full_size()
                         : kind == CoefficientKind::kStripped ? spec.stripped_size()
                                                              : atoms;
  return CoefficientVector(kind, Eigen::VectorXd::Zero(n), spec);
}

CoefficientVector CoefficientVector::stripped() const {
  if (kind_ != CoefficientKind::kFull) {
    throw Error(ErrorCode::kInvalidArgument, "only a full vector can be stripped");
  }
  return CoefficientVector(CoefficientKind::kStripped,
                           values_.tail(spec_.stripped_size()), spec_);
}

double laguerre(int n, double alpha, double x) {
  if (n == 0) return 1.0;
  double l_prev = 1.0;
  double l = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * l - (k + alpha) * l_prev) / (k + 1.0);
    l_prev = l;
    l = next;
  }
  return l;
}

double radial_basis(int n, double q, double zeta) {
  if (n < 0) throw Error(ErrorCode::kDomain, "radial index n must be >= 0");
  if (!(q >= 0.0)) throw Error(ErrorCode::kDomain, "q must be >= 0");
  if (!(zeta > 0.0)) throw Error(ErrorCode::kDomain, "zeta must be positive");
  const double x = q * q / zeta;
  return radial_norm(n, zeta) * std::exp(-0.5 * x) * laguerre(n, 0.5, x);
}

double scale_free_factor(double zeta) {
  if (!(zeta > 0.0)) throw Error(ErrorCode::kDomain, "scale zeta must be positive");
  return std::pow(zeta, 0.75);
}

Eigen::VectorXd radial_basis_all(int radial_order, double q, double zeta) {
  if (radial_order < 0) throw Error(ErrorCode::kDomain, "radial order must be >= 0");
  if (!(q >= 0.0)) throw Error(ErrorCode::kDomain, "q must be >= 0");
  if (!(zeta > 0.0)) throw Error(ErrorCode::kDomain, "zeta must be positive");
  const double x = q * q / zeta;
  const double envelope = std::exp(-0.5 * x);
  Eigen::VectorXd out(radial_order + 1);
  double l_prev = 0.0;
  double l = 1.0;
  for (int n = 0; n <= radial_order; ++n) {
    if (n == 1) {
      l_prev = 1.0;
      l = 1.5 - x;
    } else if (n > 1) {
      const int k = n - 1;
      const double next = ((2.0 * k + 1.5 - x) * l - (k + 0.5) * l_prev) / (k + 1.0);
      l_prev = l;
      l = next;
    }
    out[n] = radial_norm(n, zeta) * envelope * l;
  }
  return out;
}

double sh_basis(int l, int m, const Eigen::Vector3d& u) {
  if (l < 0 || l % 2 != 0) throw Error(ErrorCode::kDomain, "degree l must be even and >= 0");
  if (std::abs(m) > l) throw Error(ErrorCode::kDomain, "|m| must not exceed l");
  require_unit(u);
  Eigen::VectorXd buf((l + 1) * (l + 2) / 2);
  fill_sh(l, u, buf.data());
  return buf[SPFBasisSpec::angular_index(l, m)];
}

Eigen::VectorXd sh_basis_all(int angular_order, const Eigen::Vector3d& u) {
  if (angular_order < 0 || angular_order % 2 != 0) {
    throw Error(ErrorCode::kDomain, "angular order must be even and >= 0");
  }
  require_unit(u);
  Eigen::VectorXd out((angular_order + 1) * (angular_order + 2) / 2);
  fill_sh(angular_order, u, out.data());
  return out;
}

DesignMatrix constrained_design(const AcquisitionScheme& scheme, const SPFBasisSpec& spec) {
  spec.validate();
  if (scheme.empty()) throw Error(ErrorCode::kInvalidArgument, "scheme is empty");
  const Eigen::VectorXd g0 = radial_basis_all(spec.radial_order, 0.0, spec.zeta);
  const Eigen::Index rows = static_cast<Eigen::Index>(scheme.size());
  Eigen::MatrixXd m(rows, spec.stripped_size());
#pragma omp parallel
  {
    Eigen::VectorXd ybuf(spec.block_size());
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i) {
      design_row(scheme[i], spec, g0, ybuf, m.data() + i, m.outerStride());
    }
  }
  return {std::move(m), spec};
}

DesignMatrix constrained_design_serial(const AcquisitionScheme& scheme,
                                       const SPFBasisSpec& spec) {
  spec.validate();
  if (scheme.empty()) throw Error(ErrorCode::kInvalidArgument, "scheme is empty");
  const Eigen::VectorXd g0 = radial_basis_all(spec.radial_order, 0.0, spec.zeta);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(scheme.size()), spec.stripped_size());
  Eigen::VectorXd ybuf(spec.block_size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    design_row(scheme[i], spec, g0, ybuf, m.data() + i, m.outerStride());
  }
  return {std::move(m), spec};
}

Eigen::VectorXd shifted_measurements(const AcquisitionScheme& scheme,
                                     std::span<const double> signal, double zeta) {
  if (signal.size() != scheme.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "signal has " + std::to_string(signal.size()) + " values, scheme has " +
                    std::to_string(scheme.size()) + " samples");
  }
  Eigen::VectorXd e(static_cast<Eigen::Index>(signal.size()));
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double q = scheme[i].q;
    e[static_cast<Eigen::Index>(i)] = signal[i] - std::exp(-q * q / (2.0 * zeta));
  }
  return e;
}

CoefficientVector complete_coefficients(const CoefficientVector& a_prime) {
  if (a_prime.kind() != CoefficientKind::kStripped) {
    throw Error(ErrorCode::kInvalidArgument, "complete_coefficients needs a stripped vector");
  }
  const SPFBasisSpec& spec = a_prime.spec();
  const int block = spec.block_size();
  const Eigen::VectorXd g0 = radial_basis_all(spec.radial_order, 0.0, spec.zeta);
  Eigen::VectorXd full(spec.full_size());
  full.tail(spec.stripped_size()) = a_prime.values();
  for (int k = 0; k < block; ++k) {
    double acc = (k == 0) ? std::sqrt(4.0 * kPi) : 0.0;
    for (int n = 1; n <= spec.radial_order; ++n) acc -= a_prime[(n - 1) * block + k] * g0[n];
    full[k] = acc / g0[0];
  }
  return CoefficientVector(CoefficientKind::kFull, std::move(full), spec);
}

double evaluate_signal(const CoefficientVector& a, double q, const Eigen::Vector3d& u) {
  if (a.kind() != CoefficientKind::kFull) {
    throw Error(ErrorCode::kInvalidArgument, "evaluate_signal needs a full vector");
  }
  const SPFBasisSpec& spec = a.spec();
  const Eigen::VectorXd g = radial_basis_all(spec.radial_order, q, spec.zeta);
  const Eigen::VectorXd y = sh_basis_all(spec.angular_order, u);
  const int block = spec.block_size();
  double sum = 0.0;
  for (int n = 0; n <= spec.radial_order; ++n) {
    sum += g[n] * a.values().segment(n * block, block).dot(y);
  }
  return sum;
}

Eigen::VectorXd evaluate_signal(const CoefficientVector& a, const AcquisitionScheme& scheme) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(scheme.size()));
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = evaluate_signal(a, scheme[i].q, scheme[i].u);
  }
  return out;
}

}  // namespace dlspfi
