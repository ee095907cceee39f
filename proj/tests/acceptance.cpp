// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fail.
//
//   dlspfi_acceptance [--dict FILE] [--readme FILE]
//
// Without --dict the dictionary is trained here and its training time counts
// towards the sparsity criterion.

#include "solver_oracles.hpp"

#include "dlspfi/dictionary.hpp"
#include "dlspfi/error.hpp"
#include "dlspfi/experiments.hpp"
#include "dlspfi/io.hpp"
#include "dlspfi/lasso.hpp"
#include "dlspfi/phantom.hpp"
#include "dlspfi/projection.hpp"
#include "dlspfi/reconstruct.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dlspfi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  if (!pass) ++failures;
  std::printf("criterion %2d  %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SPFBasisSpec reference_spec() {
  SPFBasisSpec s;
  return s.with_zeta(adaptive_scale(kReferenceMD, s.tau));
}

void optimal_scale() {
  const auto t0 = Clock::now();
  const SPFBasisSpec spec = reference_spec();
  const SPFProjector p(spec, make_quadrature());
  const CoefficientVector a =
      p.project(MixtureSpec({{1.0, tensor_from_md_fa(kReferenceMD, 0.0, Eigen::Vector3d::UnitZ())}}));
  const double a000 = std::abs(a[spec.full_index(0, 0, 0)]);
  double worst = 0.0;
  for (const NLM& k : full_layout(spec)) {
    if (k.n == 0 && k.l == 0) continue;
    worst = std::max(worst, std::abs(a[spec.full_index(k.n, k.l, k.m)]));
  }
  const double t = seconds_since(t0);
  report(1, worst < 1e-6 * a000 && t < 1.0,
         fmt("optimal scale: max |a_nlm| / |a000| = %.2e (< 1e-6), %.2f s (< 1 s)", worst / a000, t));
}

void scale_pairs() {
  const auto t0 = Clock::now();
  const SPFBasisSpec base;
  Rng rng(11);
  std::uniform_real_distribution<double> ufa(0.0, 0.9);
  double worst = 0.0;
  int pairs = 0;
  for (auto [d1, d2] : {std::pair{0.5e-3, 1.1e-3}, {0.7e-3, 2.0e-3}}) {
    const SPFProjector p1(base.with_zeta(adaptive_scale(d1, base.tau)), make_quadrature());
    const SPFProjector p2(base.with_zeta(adaptive_scale(d2, base.tau)), make_quadrature());
    const double k1 = scale_free_factor(p1.spec().zeta), k2 = scale_free_factor(p2.spec().zeta);
    for (int i = 0; i < 20; ++i, ++pairs) {
      const double fa = ufa(rng);
      const Eigen::Vector3d u = random_direction(rng);
      const Eigen::VectorXd a1 =
          p1.project(MixtureSpec({{1.0, tensor_from_md_fa(d1, fa, u)}})).stripped().values() / k1;
      const Eigen::VectorXd a2 =
          p2.project(MixtureSpec({{1.0, tensor_from_md_fa(d2, fa, u)}})).stripped().values() / k2;
      worst = std::max(worst, (a1 - a2).cwiseAbs().maxCoeff() / a1.cwiseAbs().maxCoeff());
    }
  }
  const double t = seconds_since(t0);
  report(2, worst <= 1e-8 && t < 10.0,
         fmt("scale pairs: %d (FA, direction) x MD pairs, max relative difference of "
             "scale-free a' = %.2e (<= 1e-8), %.2f s (< 10 s)",
             pairs, worst, t));
}

void mixture_bound(const Dictionary& dict) {
  const auto t0 = Clock::now();
  const SPFBasisSpec spec = dict.spec;
  const SPFProjector proj(spec, make_quadrature());
  const SparseCoder coder(dict.atoms);
  const double eps = 0.01;
  Rng rng(21);
  std::uniform_real_distribution<double> umd(0.5e-3, 0.9e-3), ufa(0.0, 0.9), uw(0.0, 1.0);
  int trials = 0;
  double worst = -std::numeric_limits<double>::infinity();
  while (trials < 120) {
    const int p = 2 + trials % 2;
    std::vector<Eigen::VectorXd> parts;
    std::vector<double> w;
    for (int i = 0; i < p; ++i) {
      const auto t = tensor_from_md_fa(umd(rng), ufa(rng), random_direction(rng));
      Eigen::VectorXd a = proj.project(MixtureSpec({{1.0, t}})).stripped().values();
      if (a.norm() < 1e-12) continue;
      parts.push_back(a.normalized());
      w.push_back(-std::log(1.0 - uw(rng)));
    }
    if (static_cast<int>(parts.size()) < 2) continue;
    double sw = 0.0;
    for (double v : w) sw += v;
    Eigen::VectorXd mix = Eigen::VectorXd::Zero(parts[0].size());
    double bound = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      mix += (w[i] / sw) * parts[i];
      bound = std::max(bound, coder.code(parts[i], eps).l1);
    }
    const double l1 = coder.code(mix, eps).l1;
    worst = std::max(worst, l1 - bound);
    ++trials;
  }
  const double t = seconds_since(t0);
  report(3, worst <= 1e-6 && t < 120.0,
         fmt("mixture l1 bound: %d trials (p = 2, 3), max(||c*||_1 - max_i ||c_i||_1) = %.2e "
             "(<= 1e-6), %.1f s (< 120 s)",
             trials, worst, t));
}

void sparsity(const Dictionary& dict, double training_seconds) {
  const auto t0 = Clock::now();
  const std::vector<SparsityRow> rows = run_sparsity_experiment(dict, SparsityConfig{});
  const double t = seconds_since(t0) + training_seconds;
  auto at = [&](const std::string& scenario, double fa) -> const SparsityRow* {
    for (const auto& r : rows)
      if (r.scenario == scenario && std::abs(r.fa - fa) < 1e-9) return &r;
    return nullptr;
  };

  const SparsityRow* top = at("single_d1_zeta0", 0.9);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    if (r.scenario != "single_d1_zeta0" || r.fa < 0.1 - 1e-9) continue;
    lo = std::min(lo, r.dl_count);
    hi = std::max(hi, r.dl_count);
  }
  const bool ok4 = top && top->spf_count >= 90.0 && top->dl_count <= 30.0 && hi <= 2.0 * lo &&
                   t < 600.0;
  report(4, ok4,
         fmt("sparsity at MD 0.6e-3, FA 0.9: SPF %.1f (>= 90), DL %.1f (<= 30); DL over FA "
             "0.1-0.9 spans %.1f-%.1f (ratio %.2f <= 2); %.0f s incl. training (< 600 s)",
             top ? top->spf_count : -1.0, top ? top->dl_count : -1.0, lo, hi, hi / lo, t));

  const SparsityRow* fixed = at("mixture_d2_zeta0", 0.8);
  const SparsityRow* adapt = at("mixture_d2_adaptive", 0.8);
  double adapt_max = 0.0;
  for (const auto& r : rows)
    if (r.scenario == "mixture_d2_adaptive") adapt_max = std::max(adapt_max, r.dl_count);
  const bool ok5 = fixed && adapt && fixed->dl_count >= 2.0 * adapt->dl_count && adapt_max <= 30.0;
  report(5, ok5,
         fmt("adaptive scale at MD 1.1e-3 mixtures, FA 0.8: fixed zeta0 DL %.1f vs adaptive %.1f "
             "(ratio %.2f >= 2); adaptive max over FA %.1f (<= 30)",
             fixed ? fixed->dl_count : -1.0, adapt ? adapt->dl_count : -1.0,
             (fixed && adapt) ? fixed->dl_count / adapt->dl_count : 0.0, adapt_max));
}

struct RecoveryRuns {
  std::vector<RmseRow> clean, noisy;
  double clean_seconds = 0.0, noisy_seconds = 0.0;
};

RecoveryRuns reconstruction(const Dictionary& dict) {
  RecoveryRuns out;
  RmseConfig clean;
  auto t0 = Clock::now();
  out.clean = run_rmse_experiment(dict, clean);
  out.clean_seconds = seconds_since(t0);

  double worst = 0.0;
  for (const auto& r : out.clean)
    if (r.method == "dl-spfi") worst = std::max(worst, r.rmse);
  report(6, worst <= 0.05 && out.clean_seconds < 300.0,
         fmt("noise-free crossings 30-90 deg, 170/514 samples, lambda 1e-8: max DL-SPFI RMSE "
             "%.4f (<= 0.05), mean %.4f, L1-SPFI mean %.4f; %.0f s (< 300 s)",
             worst, mean_rmse(out.clean, "dl-spfi"), mean_rmse(out.clean, "l1-spfi"),
             out.clean_seconds));

  RmseConfig noisy;
  noisy.snr = 20.0;
  noisy.seeds = {1, 2, 3, 4, 5};
  noisy.recon = ReconConfig::noisy();
  t0 = Clock::now();
  out.noisy = run_rmse_experiment(dict, noisy);
  out.noisy_seconds = seconds_since(t0);
  const double dl = mean_rmse(out.noisy, "dl-spfi");
  const double l1 = mean_rmse(out.noisy, "l1-spfi");
  report(7, dl < l1 && dl <= 0.22 && out.noisy_seconds < 900.0,
         fmt("SNR 20 crossings, 5 seeds, lambda 1e-5: mean RMSE DL-SPFI %.4f vs L1-SPFI %.4f "
             "(DL < L1, DL <= 0.22); %.0f s (< 900 s)",
             dl, l1, out.noisy_seconds));
  return out;
}

void constraint(const RecoveryRuns& runs) {
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto* rows : {&runs.clean, &runs.noisy})
    for (const auto& r : *rows) {
      worst = std::max(worst, r.e0_error);
      ++n;
    }
  report(8, n > 0 && worst <= 1e-10,
         fmt("E(0) = 1 on %zu reconstructions (both methods): max |E(0) - 1| = %.2e (<= 1e-10)", n,
             worst));
}

void solvers(const RecoveryRuns& runs) {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> uw(1.0, 6.0);
  int lasso_checked = 0, code_checked = 0;
  double lasso_gap = 0.0, code_gap = 0.0;
  for (int trial = 0; trial < 2000 && lasso_checked < 60; ++trial) {
    const int rows = 6 + trial % 5, cols = 4 + trial % 5;
    Eigen::MatrixXd a(rows, cols);
    for (auto& v : a.reshaped()) v = g(rng);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(cols);
    x0[trial % cols] = g(rng);
    x0[(trial * 5 + 1) % cols] += g(rng);
    Eigen::VectorXd y = a * x0;
    for (auto& v : y) v += 0.3 * g(rng);
    Eigen::VectorXd w(cols);
    for (auto& v : w) v = uw(rng);
    LassoOptions opts;
    opts.tolerance = 1e-9;
    const LassoResult r = weighted_lasso(a, y, w, opts);
    if ((r.x.array() != 0.0).count() > 3) continue;
    lasso_gap = std::max(lasso_gap, std::abs(r.objective - oracle::lasso_min(a, y, w, 3)));
    ++lasso_checked;
  }
  for (int trial = 0; trial < 2000 && code_checked < 60; ++trial) {
    const int rows = 6 + trial % 5;
    Eigen::MatrixXd d(rows, 8);
    for (auto& v : d.reshaped()) v = g(rng);
    d.colwise().normalize();
    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(8);
    c0[trial % 8] = 1.0 + g(rng);
    c0[(trial * 3 + 1) % 8] += 0.5 * g(rng);
    const Eigen::VectorXd clean = d * c0;
    Eigen::VectorXd noise(rows);
    for (auto& v : noise) v = g(rng);
    const Eigen::VectorXd a = clean + 0.05 * clean.norm() * noise.normalized();
    const double eps = 0.1 * clean.norm();
    const SparseCode code = SparseCoder(d).code(a, eps);
    if ((code.c.array() != 0.0).count() > 3) continue;
    code_gap = std::max(code_gap, std::abs(code.l1 - oracle::constrained_l1_min(d, a, eps, 3)));
    ++code_checked;
  }
  double kkt = 0.0;
  std::size_t solves = 0;
  for (const auto* rows : {&runs.clean, &runs.noisy})
    for (const auto& r : *rows) {
      kkt = std::max(kkt, r.kkt);
      ++solves;
    }
  report(9,
         lasso_checked >= 50 && code_checked >= 50 && lasso_gap <= 1e-8 && code_gap <= 1e-8 &&
             kkt <= 1e-6,
         fmt("solver oracles: LASSO %d instances, max gap %.1e; sparse coding %d instances, max "
             "gap %.1e (<= 1e-8); max KKT over %zu production solves %.1e (<= 1e-6)",
             lasso_checked, lasso_gap, code_checked, code_gap, solves, kkt));
}

void real_data(const std::string& readme) {
  // Not reproducible without the scanner data; the criterion is that the
  // repository says so.
  std::ifstream in(readme);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const bool documented = text.find("Real-data results are not reproduced") != std::string::npos;
  report(10, documented,
         documented ? "real-data figures: not reproducible here (no scanner data); documented in "
                      "README.md, criteria 6-7 substitute"
                    : "real-data figures: README.md lacks the required note (" + readme + ")");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string dict_path;
  std::string readme = DLSPFI_README;
  app.add_option("--dict", dict_path, "use this dictionary instead of training one");
  app.add_option("--readme", readme);
  CLI11_PARSE(app, argc, argv);

  try {
    optimal_scale();
    scale_pairs();

    double training_seconds = 0.0;
    std::optional<Dictionary> dict;
    if (dict_path.empty()) {
      const auto t0 = Clock::now();
      dict = train_dictionary(TrainingGrid{}, DLConfig{}, SPFBasisSpec{});
      training_seconds = seconds_since(t0);
      std::printf("trained dictionary: %d atoms in %.0f s\n", static_cast<int>(dict->atom_count()), training_seconds);
    } else {
      dict = load_dictionary(dict_path);
      std::printf("loaded dictionary %s (training time not counted)\n", dict_path.c_str());
    }

    mixture_bound(*dict);
    sparsity(*dict, training_seconds);
    const RecoveryRuns runs = reconstruction(*dict);
    constraint(runs);
    solvers(runs);
    real_data(readme);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
