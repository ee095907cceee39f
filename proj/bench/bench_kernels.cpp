// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include "dlspfi/dictionary.hpp"
#include "dlspfi/phantom.hpp"
#include "dlspfi/projection.hpp"
#include "dlspfi/reconstruct.hpp"
#include "dlspfi/spf_basis.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dlspfi;

namespace {

SPFBasisSpec ref_spec() {
  SPFBasisSpec s;
  return s.with_zeta(adaptive_scale(kReferenceMD, s.tau));
}

TrainingGrid small_grid() {
  TrainingGrid g;
  g.n_md = 2;
  g.n_fa = 4;
  g.directions = 40;
  return g;
}

const TrainingSet& training() {
  static const TrainingSet set = build_training_set(small_grid(), ref_spec(), make_quadrature());
  return set;
}

const Dictionary& dictionary() {
  static const Dictionary d = [] {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(180, 250);
    for (auto& v : x.reshaped()) v = g(rng);
    x.colwise().normalize();
    return assemble_dictionary(x, ref_spec());
  }();
  return d;
}

std::vector<std::vector<double>> voxels(const AcquisitionScheme& s, int n) {
  Rng rng(8);
  std::vector<std::vector<double>> out;
  for (int v = 0; v < n; ++v) {
    const MixtureSpec m({{0.5, tensor_from_md_fa(0.7e-3, 0.7, random_direction(rng))},
                         {0.5, tensor_from_md_fa(0.7e-3, 0.7, random_direction(rng))}});
    std::vector<double> e;
    for (const auto& x : s) e.push_back(mixture_signal(m, x.q, x.u, s.tau()));
    out.push_back(std::move(e));
  }
  return out;
}

void BM_DesignSerial(benchmark::State& st) {
  const AcquisitionScheme g = dsi_grid();
  for (auto _ : st) benchmark::DoNotOptimize(constrained_design_serial(g, ref_spec()));
}
void BM_DesignOmp(benchmark::State& st) {
  const AcquisitionScheme g = dsi_grid();
  for (auto _ : st) benchmark::DoNotOptimize(constrained_design(g, ref_spec()));
}

void BM_TrainingSetSerial(benchmark::State& st) {
  const QuadratureRule rule = make_quadrature();
  for (auto _ : st) benchmark::DoNotOptimize(build_training_set_serial(small_grid(), ref_spec(), rule));
}
void BM_TrainingSetOmp(benchmark::State& st) {
  const QuadratureRule rule = make_quadrature();
  for (auto _ : st) benchmark::DoNotOptimize(build_training_set(small_grid(), ref_spec(), rule));
}

void BM_SparseCodeSerial(benchmark::State& st) {
  const SparseCoder coder(dictionary().atoms);
  for (auto _ : st) benchmark::DoNotOptimize(sparse_code_batch_serial(coder, training().columns.leftCols(64), 0.01));
}
void BM_SparseCodeOmp(benchmark::State& st) {
  const SparseCoder coder(dictionary().atoms);
  for (auto _ : st) benchmark::DoNotOptimize(sparse_code_batch(coder, training().columns.leftCols(64), 0.01));
}

void BM_ReconstructSerial(benchmark::State& st) {
  const AcquisitionScheme sub = undersample(dsi_grid(), 3.0, 170, 7);
  const auto v = voxels(sub, 16);
  for (auto _ : st) benchmark::DoNotOptimize(reconstruct_batch_serial(sub, v, dictionary(), ReconConfig{}));
}
void BM_ReconstructOmp(benchmark::State& st) {
  const AcquisitionScheme sub = undersample(dsi_grid(), 3.0, 170, 7);
  const auto v = voxels(sub, 16);
  for (auto _ : st) benchmark::DoNotOptimize(reconstruct_batch(sub, v, dictionary(), ReconConfig{}));
}

}  // namespace

BENCHMARK(BM_DesignSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DesignOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TrainingSetSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainingSetOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SparseCodeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SparseCodeOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ReconstructSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReconstructOmp)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
