#include "dlspfi/projection.hpp"

#include "dlspfi/error.hpp"
#include "dlspfi/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace dlspfi {

QuadratureRule make_quadrature(const QuadratureOptions& opts) {
  const GaussRule lag = gauss_laguerre(opts.radial_order, 0.5);
  QuadratureRule rule;
  rule.radial_nodes = lag.nodes;
  rule.radial_weights = (lag.weights.array().log() + lag.nodes.array()).exp();
  rule.sphere = product_sphere_rule(opts.polar_order, opts.azimuthal_order, opts.hemisphere);
  return rule;
}

SPFProjector::SPFProjector(const SPFBasisSpec& spec, QuadratureRule rule)
    : spec_(spec), rule_(std::move(rule)) {
  spec_.validate();
  const Eigen::Index nr = rule_.radial_nodes.size();
  const Eigen::Index na = static_cast<Eigen::Index>(rule_.sphere.directions.size());
  if (nr == 0 || na == 0) throw Error(ErrorCode::kInvalidArgument, "empty quadrature rule");
  node_q_.resize(nr);
  radial_weighted_.resize(nr, spec_.radial_order + 1);
  const double jacobian = std::pow(spec_.zeta, 1.5) / 2.0;
  for (Eigen::Index k = 0; k < nr; ++k) {
    const double x = rule_.radial_nodes[k];
    node_q_[k] = std::sqrt(spec_.zeta * x);
    const Eigen::VectorXd g = radial_basis_all(spec_.radial_order, node_q_[k], spec_.zeta);
    radial_weighted_.row(k) = (jacobian * rule_.radial_weights[k]) * g.transpose();
  }
  angular_weighted_.resize(na, spec_.block_size());
  for (Eigen::Index j = 0; j < na; ++j) {
    angular_weighted_.row(j) =
        rule_.sphere.weights[j] *
        sh_basis_all(spec_.angular_order, rule_.sphere.directions[static_cast<std::size_t>(j)])
            .transpose();
  }
}

CoefficientVector SPFProjector::finish(const Eigen::MatrixXd& values) const {
  const Eigen::MatrixXd blocks = radial_weighted_.transpose() * values * angular_weighted_;
  Eigen::VectorXd a(spec_.full_size());
  const int block = spec_.block_size();
  for (int n = 0; n <= spec_.radial_order; ++n) a.segment(n * block, block) = blocks.row(n);
  return CoefficientVector(CoefficientKind::kFull, std::move(a), spec_);
}

CoefficientVector SPFProjector::project(const SignalFunction& signal) const {
  const auto& dirs = rule_.sphere.directions;
  Eigen::MatrixXd values(node_q_.size(), static_cast<Eigen::Index>(dirs.size()));
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const Eigen::Vector3d& u = dirs[static_cast<std::size_t>(j)];
    for (Eigen::Index k = 0; k < values.rows(); ++k) values(k, j) = signal(node_q_[k], u);
  }
  return finish(values);
}

CoefficientVector SPFProjector::project(const MixtureSpec& mixture) const {
  // exp(-4 pi^2 tau q^2 g) with q^2 = zeta x.
  const double rate = 4.0 * std::numbers::pi * std::numbers::pi * spec_.tau * spec_.zeta;
  const auto& dirs = rule_.sphere.directions;
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(node_q_.size(),
                                                 static_cast<Eigen::Index>(dirs.size()));
  for (const auto& c : mixture.components()) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double g = rate * c.tensor.apparent_diffusivity(dirs[static_cast<std::size_t>(j)]);
      for (Eigen::Index k = 0; k < values.rows(); ++k) {
        values(k, j) += c.weight * std::exp(-g * rule_.radial_nodes[k]);
      }
    }
  }
  return finish(values);
}

CoefficientVector project_signal(const SignalFunction& signal, const SPFBasisSpec& spec,
                                 const QuadratureRule& rule) {
  return SPFProjector(spec, rule).project(signal);
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw Error(ErrorCode::kDomain, "grid resolution must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

struct GridPoint {
  double md, fa;
  Eigen::Vector3d axis;
};

std::vector<GridPoint> enumerate(const TrainingGrid& grid) {
  if (!(grid.md_min > 0.0) || grid.md_max < grid.md_min) {
    throw Error(ErrorCode::kDomain, "invalid MD range");
  }
  if (!(grid.fa_min >= 0.0) || grid.fa_max < grid.fa_min || !(grid.fa_max < 1.0)) {
    throw Error(ErrorCode::kDomain, "invalid FA range");
  }
  const auto dirs = sphere_directions(grid.directions);
  std::vector<GridPoint> pts;
  for (double md : grid.md_values())
    for (double fa : grid.fa_values())
      for (const auto& d : dirs) pts.push_back({md, fa, d});
  return pts;
}

TrainingSet collect(const TrainingGrid& grid, const SPFBasisSpec& spec,
                    const Eigen::MatrixXd& raw, const std::vector<char>& keep) {
  TrainingSet set{spec, grid, {}, 0};
  Eigen::Index kept = 0;
  for (char k : keep) kept += k ? 1 : 0;
  set.columns.resize(raw.rows(), kept);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    if (keep[static_cast<std::size_t>(i)]) set.columns.col(c++) = raw.col(i);
  }
  set.skipped = static_cast<int>(raw.cols() - kept);
  return set;
}

void project_column(const SPFProjector& proj, const GridPoint& p, Eigen::MatrixXd& raw, std::vector<char>& keep, Eigen::Index i) {
  const MixtureSpec m({{1.0, tensor_from_md_fa(p.md, p.fa, p.axis)}});
  const CoefficientVector a = proj.project(m);
  if (stripped_is_negligible(a)) {
    keep[static_cast<std::size_t>(i)] = 0;
    raw.col(i).setZero();
    return;
  }
  const Eigen::VectorXd s = a.values().tail(proj.spec().stripped_size());
  raw.col(i) = s / s.norm();
  keep[static_cast<std::size_t>(i)] = 1;
}

}  // namespace

std::vector<double> TrainingGrid::md_values() const { return linspace(md_min, md_max, n_md); }
std::vector<double> TrainingGrid::fa_values() const { return linspace(fa_min, fa_max, n_fa); }

bool stripped_is_negligible(const CoefficientVector& full) {
  const Eigen::Index ns = full.spec().stripped_size();
  return full.values().tail(ns).norm() <= kNegligibleStripped * full.values().norm();
}

TrainingSet build_training_set(const TrainingGrid& grid, const SPFBasisSpec& spec,
                               const QuadratureRule& rule) {
  const auto pts = enumerate(grid);
  const SPFProjector proj(spec, rule);
  const auto count = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd raw(spec.stripped_size(), count);
  std::vector<char> keep(pts.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < count; ++i) {
    project_column(proj, pts[static_cast<std::size_t>(i)], raw, keep, i);
  }
  return collect(grid, spec, raw, keep);
}

TrainingSet build_training_set_serial(const TrainingGrid& grid, const SPFBasisSpec& spec,
                                      const QuadratureRule& rule) {
  const auto pts = enumerate(grid);
  const SPFProjector proj(spec, rule);
  const auto count = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd raw(spec.stripped_size(), count);
  std::vector<char> keep(pts.size(), 0);
  for (Eigen::Index i = 0; i < count; ++i) {
    project_column(proj, pts[static_cast<std::size_t>(i)], raw, keep, i);
  }
  return collect(grid, spec, raw, keep);
}

void save_training_set(const std::filesystem::path& path, const TrainingSet& set) {
  nlohmann::json header = {
      {"format", "dlspfi-training"},
      {"version", 1},
      {"spec", spec_to_json(set.spec)},
      {"grid",
       {{"md_min", set.grid.md_min},
        {"md_max", set.grid.md_max},
        {"n_md", set.grid.n_md},
        {"fa_min", set.grid.fa_min},
        {"fa_max", set.grid.fa_max},
        {"n_fa", set.grid.n_fa},
        {"directions", set.grid.directions}}},
      {"skipped", set.skipped},
  };
  write_array_file(path, header, set.columns);
}

TrainingSet load_training_set(const std::filesystem::path& path) {
  auto [header, data] = read_array_file(path);
  try {
    if (header.at("format") != "dlspfi-training") {
      throw Error(ErrorCode::kParse, "not a training-set file: " + path.string());
    }
    if (header.at("version") != 1) {
      throw Error(ErrorCode::kVersion, "unsupported training-set version in " + path.string());
    }
    TrainingSet set;
    set.spec = spec_from_json(header.at("spec"));
    const auto& g = header.at("grid");
    set.grid = TrainingGrid{g.at("md_min"), g.at("md_max"), g.at("n_md"), g.at("fa_min"),
                            g.at("fa_max"), g.at("n_fa"), g.at("directions")};
    set.skipped = header.at("skipped");
    if (data.rows() != set.spec.stripped_size()) {
      throw Error(ErrorCode::kShapeMismatch, "training rows do not match the basis spec");
    }
    set.columns = std::move(data);
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "malformed training header in " + path.string() + ": " + e.what());
  }
}

}  // namespace dlspfi
