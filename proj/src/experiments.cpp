#include "dlspfi/experiments.hpp"

#include "dlspfi/error.hpp"
#include "dlspfi/io.hpp"
#include "dlspfi/phantom.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace dlspfi {

int sparsity_count(const Eigen::VectorXd& v, double fraction) {
  if (!(fraction >= 0.0)) throw Error(ErrorCode::kDomain, "fraction must be >= 0");
  const double thr = fraction * v.norm();
  if (!(thr > 0.0) && v.isZero(0.0)) return 0;
  return static_cast<int>((v.array().abs() > thr).count());
}

int sparsity_count(const CoefficientVector& v, double fraction) {
  return sparsity_count(v.values(), fraction);
}

SparsityPoint mean_sparsity(const std::vector<MixtureSpec>& signals, double zeta,
                            const Dictionary& dict, const SparsityConfig& cfg) {
  if (signals.empty()) return {};
  const SPFProjector projector(dict.spec.with_zeta(zeta), make_quadrature(cfg.quadrature));
  const SparseCoder coder(dict.atoms);
  const auto n = static_cast<std::ptrdiff_t>(signals.size());
  std::vector<int> spf(signals.size(), 0), dl(signals.size(), 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const CoefficientVector full = projector.project(signals[k]);
    if (stripped_is_negligible(full)) continue;
    const Eigen::VectorXd a = full.stripped().values();
    const SparseCode c = [&] {
      const Eigen::VectorXd unit = a / a.norm();
      try {
        return coder.code(unit, cfg.epsilon);
      } catch (const InfeasibleError& e) {
        return coder.code(unit, e.best_residual() * (1.0 + 1e-9));
      }
    }();
    spf[k] = sparsity_count(a, cfg.fraction);
    dl[k] = sparsity_count(c.c, cfg.fraction);
  }
  SparsityPoint p;
  for (std::size_t k = 0; k < signals.size(); ++k) {
    p.spf_count += spf[k];
    p.dl_count += dl[k];
  }
  p.spf_count /= static_cast<double>(signals.size());
  p.dl_count /= static_cast<double>(signals.size());
  return p;
}

namespace {

std::vector<MixtureSpec> single_tensors(double md, double fa, int directions) {
  std::vector<MixtureSpec> out;
  for (const auto& u : sphere_directions(directions)) {
    out.emplace_back(std::vector<MixtureComponent>{{1.0, tensor_from_md_fa(md, fa, u)}});
  }
  return out;
}

// Equal-weight pairs at random orientations; stream per (scenario, FA bin).
std::vector<MixtureSpec> random_pairs(double md, double fa, int draws, std::uint64_t seed,
                                      std::uint64_t scenario, std::uint64_t bin) {
  std::seed_seq seq{seed, scenario, bin};
  Rng rng(seq);
  std::vector<MixtureSpec> out;
  for (int i = 0; i < draws; ++i) {
    const Eigen::Vector3d u1 = random_direction(rng);
    const Eigen::Vector3d u2 = random_direction(rng);
    out.emplace_back(std::vector<MixtureComponent>{{0.5, tensor_from_md_fa(md, fa, u1)},
                                                   {0.5, tensor_from_md_fa(md, fa, u2)}});
  }
  return out;
}

}  // namespace

std::vector<SparsityRow> run_sparsity_experiment(const Dictionary& dict, const SparsityConfig& cfg) {
  const double tau = dict.spec.tau;
  const double zeta0 = dict.zeta0();
  const double zeta2 = adaptive_scale(cfg.md_out_of_range, tau);
  std::vector<SparsityRow> rows;
  for (std::size_t b = 0; b < cfg.fa_values.size(); ++b) {
    const double fa = cfg.fa_values[b];
    const auto singles = single_tensors(cfg.md_in_range, fa, cfg.directions);
    const auto pairs1 = random_pairs(cfg.md_in_range, fa, cfg.mixture_draws, cfg.seed, 1, b);
    const auto pairs2 = random_pairs(cfg.md_out_of_range, fa, cfg.mixture_draws, cfg.seed, 2, b);
    auto add = [&](const char* name, const std::vector<MixtureSpec>& sig, double zeta) {
      const SparsityPoint p = mean_sparsity(sig, zeta, dict, cfg);
      rows.push_back({name, fa, p.spf_count, p.dl_count, static_cast<int>(sig.size())});
    };
    add("single_d1_zeta0", singles, zeta0);
    add("mixture_d1_zeta0", pairs1, zeta0);
    add("mixture_d2_zeta0", pairs2, zeta0);
    add("mixture_d2_adaptive", pairs2, zeta2);
  }
  return rows;
}

MixtureSpec crossing_phantom(double md, double fa, double angle_deg) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d u1 = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d u2(std::cos(a), std::sin(a), 0.0);
  return MixtureSpec({{0.5, tensor_from_md_fa(md, fa, u1)}, {0.5, tensor_from_md_fa(md, fa, u2)}});
}

std::vector<RmseRow> run_rmse_experiment(const Dictionary& dict, const RmseConfig& cfg) {
  if (cfg.seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "rmse experiment needs a seed");
  const double tau = dict.spec.tau;
  const AcquisitionScheme full = dsi_grid(cfg.grid_radius, cfg.b_max, tau);
  const auto idx = undersample_indices(full, cfg.exponent, cfg.samples, cfg.scheme_seed);
  const AcquisitionScheme sub = undersample(full, cfg.exponent, cfg.samples, cfg.scheme_seed);

  struct Job {
    std::size_t angle;
    std::uint64_t seed;
    int method;  // 0 dl, 1 l1
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < cfg.angles_deg.size(); ++a)
    for (const auto s : cfg.seeds)
      for (int m = 0; m < (cfg.run_l1 ? 2 : 1); ++m) jobs.push_back({a, s, m});

  std::vector<RmseRow> rows(jobs.size());
  std::vector<std::string> errors(jobs.size());
  const auto nj = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < nj; ++j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    try {
      const MixtureSpec phantom =
          crossing_phantom(cfg.md, cfg.fa, cfg.angles_deg[job.angle]);
      std::vector<double> truth(full.size());
      for (std::size_t i = 0; i < full.size(); ++i) {
        truth[i] = mixture_signal(phantom, full[i].q, full[i].u, tau);
      }
      // Same noise realization for both methods.
      std::seed_seq seq{job.seed, static_cast<std::uint64_t>(job.angle)};
      Rng rng(seq);
      std::vector<double> measured(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        measured[i] = add_rician_noise(truth[idx[i]], cfg.snr, rng);
      }
      const VoxelResult r = job.method == 0 ? reconstruct_voxel(sub, measured, dict, cfg.recon)
                                            : l1_spfi(sub, measured, dict.spec, cfg.recon);
      RmseRow& row = rows[static_cast<std::size_t>(j)];
      row.angle_deg = cfg.angles_deg[job.angle];
      row.method = job.method == 0 ? "dl-spfi" : "l1-spfi";
      row.snr = cfg.snr;
      row.seed = job.seed;
      row.rmse = predict_and_rmse(r.coefficients, full, truth);
      row.e0_error = std::abs(evaluate_signal(r.coefficients, 0.0, Eigen::Vector3d::UnitZ()) - 1.0);
      row.kkt = r.kkt_residual;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(j)] = e.what();
    }
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) {
      throw Error(ErrorCode::kNotConverged,
                  "angle " + std::to_string(cfg.angles_deg[jobs[j].angle]) + ": " + errors[j]);
    }
  }
  return rows;
}

double mean_rmse(const std::vector<RmseRow>& rows, const std::string& method) {
  double s = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.method == method) {
      s += r.rmse;
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "no rows for method " + method);
  return s / n;
}

namespace {

void header(std::ostream& out, const std::string& kind, const std::string& config_text,
            std::uint64_t seed) {
  out << "# dlspfi " << kVersion << " " << kind << "\n"
      << "# seed " << seed << "\n"
      << "# config " << hex64(fnv1a(config_text)) << "\n";
}

}  // namespace

void write_sparsity_csv(std::ostream& out, const std::vector<SparsityRow>& rows,
                        const std::string& config_text, std::uint64_t seed) {
  header(out, "sparsity", config_text, seed);
  out << "scenario,fa,spf_count,dl_count,samples\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.fa << ',' << r.spf_count << ',' << r.dl_count << ','
        << r.samples << '\n';
  }
}

void write_rmse_csv(std::ostream& out, const std::vector<RmseRow>& rows,
                    const std::string& config_text, std::uint64_t seed) {
  header(out, "rmse", config_text, seed);
  out << "# phantom: two equal-weight tensors crossing in the xy-plane\n";
  out << "angle_deg,method,snr,seed,rmse,e0_error,kkt\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.angle_deg << ',' << r.method << ',' << r.snr << ',' << r.seed << ',' << r.rmse << ','
        << r.e0_error << ',' << r.kkt << '\n';
  }
}

}  // namespace dlspfi

namespace dlspfi {

Dictionary train_dictionary(const TrainingGrid& grid, const DLConfig& cfg,
                            const SPFBasisSpec& basis, const QuadratureOptions& quadrature,
                            TrainingReport* report, double d0) {
  const SPFBasisSpec spec = basis.with_zeta(adaptive_scale(d0, basis.tau));
  const TrainingSet set = build_training_set(grid, spec, make_quadrature(quadrature));
  LearningTrace trace;
  const Eigen::MatrixXd learned = learn_dictionary(set.columns, cfg, &trace);
  if (report) {
    report->columns = static_cast<long>(set.columns.cols());
    report->skipped = static_cast<long>(set.skipped);
    report->mean_l1_per_epoch = trace.mean_l1_per_epoch;
  }
  return assemble_dictionary(learned, spec, d0);
}

}  // namespace dlspfi
