#pragma once

// Synthetic experiment drivers: coefficient sparsity curves and undersampled
// reconstruction RMSE sweeps. Output is CSV.

#include "dlspfi/dictionary.hpp"
#include "dlspfi/projection.hpp"
#include "dlspfi/reconstruct.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace dlspfi {

inline constexpr const char* kVersion = "0.1.0";

/// Entries with |v_i| > fraction * ||v||_2.
int sparsity_count(const Eigen::VectorXd& v, double fraction = 0.01);
int sparsity_count(const CoefficientVector& v, double fraction = 0.01);

struct SparsityConfig {
  std::vector<double> fa_values{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double md_in_range = 0.6e-3;
  double md_out_of_range = 1.1e-3;
  int directions = 321;     // single-tensor orientations
  int mixture_draws = 100;  // per FA value
  double epsilon = 0.01;
  double fraction = 0.01;
  std::uint64_t seed = 1;
  QuadratureOptions quadrature{};
};

struct SparsityRow {
  std::string scenario;  // single_d1_zeta0 | mixture_d1_zeta0 | mixture_d2_zeta0 | mixture_d2_adaptive
  double fa = 0.0;
  double spf_count = 0.0;  // mean over samples
  double dl_count = 0.0;
  int samples = 0;
};

std::vector<SparsityRow> run_sparsity_experiment(const Dictionary& dict, const SparsityConfig& cfg);

/// Mean counts for one batch of signals projected at `zeta`. Signals whose
/// stripped coefficients vanish count as zero in both bases.
struct SparsityPoint {
  double spf_count = 0.0;
  double dl_count = 0.0;
};
SparsityPoint mean_sparsity(const std::vector<MixtureSpec>& signals, double zeta,
                            const Dictionary& dict, const SparsityConfig& cfg);

struct RmseConfig {
  std::vector<double> angles_deg{30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90};
  double md = 0.7e-3;
  double fa = 0.7;
  int grid_radius = 5;
  double b_max = 8000.0;
  int samples = 170;
  double exponent = 3.0;
  std::uint64_t scheme_seed = 7;
  double snr = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> seeds{1};  // noise seeds; one suffices without noise
  ReconConfig recon{};
  bool run_l1 = true;
};

struct RmseRow {
  double angle_deg = 0.0;
  std::string method;  // dl-spfi | l1-spfi
  double snr = 0.0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double e0_error = 0.0;  // |E_hat(0) - 1|
  double kkt = 0.0;
};

/// Two equal-weight tensors in the xy-plane, the first along x, the second at
/// `angle_deg` from it.
MixtureSpec crossing_phantom(double md, double fa, double angle_deg);

std::vector<RmseRow> run_rmse_experiment(const Dictionary& dict, const RmseConfig& cfg);

/// Mean RMSE of one method over the rows.
double mean_rmse(const std::vector<RmseRow>& rows, const std::string& method);

// CSV writers. The first lines are '#' comments with version, seed and config hash.
void write_sparsity_csv(std::ostream& out, const std::vector<SparsityRow>& rows,
                        const std::string& config_text, std::uint64_t seed);
void write_rmse_csv(std::ostream& out, const std::vector<RmseRow>& rows,
                    const std::string& config_text, std::uint64_t seed);

struct TrainingReport {
  long columns = 0;
  long skipped = 0;
  std::vector<double> mean_l1_per_epoch;
};

/// Builds the single-tensor training set at zeta0 = adaptive_scale(d0) and
/// learns the dictionary; returns it with the isotropic atoms appended.
Dictionary train_dictionary(const TrainingGrid& grid, const DLConfig& cfg,
                            const SPFBasisSpec& basis, const QuadratureOptions& quadrature = {},
                            TrainingReport* report = nullptr, double d0 = kReferenceMD);

/// Subcommand front-end; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace dlspfi
