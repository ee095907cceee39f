#include "dlspfi/error.hpp"
#include "dlspfi/experiments.hpp"
#include "dlspfi/io.hpp"
#include "dlspfi/phantom.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace dlspfi {
namespace {

namespace fs = std::filesystem;

// Config keys become "--key value" unless the flag is already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args, std::string& config_text) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (std::next(it) == args.end()) throw Error(ErrorCode::kInvalidArgument, "--config needs a path");
  const fs::path path = *std::next(it);
  args.erase(it, std::next(it, 2));
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  config_text = buf.str();
  std::istringstream kv(config_text);
  for (const auto& [key, value] : read_key_values(kv)) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    args.push_back(flag);
    if (value != "true") args.push_back(value);
  }
  return args;
}

std::string canonical_args(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) s += a + '\n';
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file: " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

struct Options {
  std::uint64_t seed = 1;
  std::string out;

  // learn
  TrainingGrid grid;
  DLConfig dl;
  int radial_order = 4;
  int angular_order = 8;

  // scheme
  int radius = 5;
  double b_max = 8000.0;
  std::string scheme_in;
  int count = 170;
  double exponent = 3.0;

  // synth / reconstruct
  std::string phantom;
  std::string scheme;
  std::string signals;
  std::string dict;
  std::string method = "dl";
  ReconConfig recon;

  // eval
  int draws = 100;
  int directions = 321;
  std::string snr = "inf";
  int seeds = 1;
  double md = 0.7e-3;
  double fa = 0.7;
  bool no_l1 = false;
};

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "snr must be a number or 'inf', got '" + s + "'");
  }
}

void run_learn(const Options& o) {
  SPFBasisSpec basis;
  basis.radial_order = o.radial_order;
  basis.angular_order = o.angular_order;
  basis.validate();
  DLConfig cfg = o.dl;
  cfg.seed = o.seed;
  TrainingReport report;
  const Dictionary d = train_dictionary(o.grid, cfg, basis, {}, &report);
  save_dictionary(d, o.out);
  std::cout << "training columns " << report.columns << " (skipped " << report.skipped
            << ")\natoms " << d.atom_count() << " (" << d.learned_count << " learned)\n";
  for (std::size_t e = 0; e < report.mean_l1_per_epoch.size(); ++e) {
    std::cout << "epoch " << e + 1 << " mean l1 " << report.mean_l1_per_epoch[e] << "\n";
  }
  std::cout << "wrote " << o.out << "\n";
}

void run_scheme_dsi(const Options& o) {
  write_scheme(fs::path(o.out), dsi_grid(o.radius, o.b_max));
  std::cout << "wrote " << o.out << "\n";
}

void run_scheme_undersample(const Options& o) {
  const AcquisitionScheme full = read_scheme(fs::path(o.scheme_in));
  write_scheme(fs::path(o.out), undersample(full, o.exponent, o.count, o.seed));
  std::cout << "wrote " << o.out << " (" << o.count << " of " << full.size() << ")\n";
}

void run_synth(const Options& o, bool seed_given) {
  PhantomConfig cfg = read_phantom_config(fs::path(o.phantom));
  if (seed_given) cfg.seed = o.seed;
  const AcquisitionScheme scheme = read_scheme(fs::path(o.scheme));
  SignalFile f{o.scheme, synthesize(cfg, scheme)};
  write_signal_file(o.out, f);
  std::cout << "wrote " << o.out << " (" << f.voxels.size() << " voxels)\n";
}

void run_reconstruct(const Options& o) {
  const SignalFile signals = read_signal_file(o.signals);
  const fs::path scheme_path = o.scheme.empty() ? fs::path(signals.scheme_ref) : fs::path(o.scheme);
  const AcquisitionScheme scheme = read_scheme(scheme_path);
  if (signals.sample_count() != scheme.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "signal rows have " + std::to_string(signals.sample_count()) +
                    " samples, scheme " + scheme_path.string() + " has " +
                    std::to_string(scheme.size()));
  }
  ReconMethod method;
  if (o.method == "dl") method = ReconMethod::kDictionary;
  else if (o.method == "l1") method = ReconMethod::kL1Spfi;
  else throw Error(ErrorCode::kInvalidArgument, "method must be dl or l1, got " + o.method);

  Dictionary dict;
  if (method == ReconMethod::kDictionary || !o.dict.empty()) {
    dict = load_dictionary(o.dict);
  } else {
    dict.spec = SPFBasisSpec{}.with_zeta(adaptive_scale(kReferenceMD, kDefaultTau));
  }
  const auto results = reconstruct_batch(scheme, signals.voxels, dict, o.recon, method);
  nlohmann::json voxels = nlohmann::json::array();
  for (const auto& r : results) {
    voxels.push_back({{"coefficients", coefficients_to_json(r.coefficients)},
                      {"md", r.md},
                      {"zeta", r.zeta},
                      {"nonzeros", r.nonzeros},
                      {"residual", r.residual},
                      {"kkt_residual", r.kkt_residual}});
  }
  const nlohmann::json doc = {{"format", "dlspfi-reconstruction"},
                              {"version", 1},
                              {"method", o.method},
                              {"voxels", voxels}};
  write_text(o.out, doc.dump(1) + "\n");
  std::cout << "wrote " << o.out << " (" << results.size() << " voxels)\n";
}

void run_eval_sparsity(const Options& o, const std::string& config_text) {
  const Dictionary dict = load_dictionary(o.dict);
  SparsityConfig cfg;
  cfg.seed = o.seed;
  cfg.mixture_draws = o.draws;
  cfg.directions = o.directions;
  const auto rows = run_sparsity_experiment(dict, cfg);
  std::ostringstream csv;
  write_sparsity_csv(csv, rows, config_text, o.seed);
  write_text(o.out, csv.str());
  std::cout << csv.str();
}

void run_eval_rmse(const Options& o, const std::string& config_text) {
  const Dictionary dict = load_dictionary(o.dict);
  RmseConfig cfg;
  cfg.snr = parse_snr(o.snr);
  cfg.md = o.md;
  cfg.fa = o.fa;
  cfg.samples = o.count;
  cfg.exponent = o.exponent;
  cfg.recon = o.recon;
  cfg.run_l1 = !o.no_l1;
  if (o.seeds < 1) throw Error(ErrorCode::kInvalidArgument, "--seeds must be >= 1");
  cfg.seeds.clear();
  for (int s = 0; s < o.seeds; ++s) cfg.seeds.push_back(o.seed + static_cast<std::uint64_t>(s));
  const auto rows = run_rmse_experiment(dict, cfg);
  std::ostringstream csv;
  write_rmse_csv(csv, rows, config_text, o.seed);
  write_text(o.out, csv.str());
  std::cout << "mean rmse dl-spfi " << mean_rmse(rows, "dl-spfi");
  if (cfg.run_l1) std::cout << "  l1-spfi " << mean_rmse(rows, "l1-spfi");
  std::cout << "\nwrote " << o.out << "\n";
}

}  // namespace

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_text;
  try {
    args = expand_config(std::move(args), config_text);
  } catch (const Error& e) {
    std::cerr << "error " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
  if (config_text.empty()) config_text = canonical_args(args);

  Options o;
  CLI::App app{"Dictionary-learned SPF signal reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();
  auto* seed_opt = app.add_option("--seed", o.seed, "random seed")->capture_default_str();

  auto* learn = app.add_subcommand("learn", "train a dictionary and save it");
  learn->add_option("--out", o.out, "dictionary file")->required();
  learn->add_option("--n-md", o.grid.n_md)->capture_default_str();
  learn->add_option("--n-fa", o.grid.n_fa)->capture_default_str();
  learn->add_option("--md-min", o.grid.md_min)->capture_default_str();
  learn->add_option("--md-max", o.grid.md_max)->capture_default_str();
  learn->add_option("--fa-max", o.grid.fa_max)->capture_default_str();
  learn->add_option("--directions", o.grid.directions)->capture_default_str();
  learn->add_option("--atoms", o.dl.n_atoms)->capture_default_str();
  learn->add_option("--epsilon", o.dl.epsilon)->capture_default_str();
  learn->add_option("--batch", o.dl.batch_size)->capture_default_str();
  learn->add_option("--epochs", o.dl.epochs)->capture_default_str();
  learn->add_option("--radial-order", o.radial_order)->capture_default_str();
  learn->add_option("--angular-order", o.angular_order)->capture_default_str();

  auto* scheme = app.add_subcommand("scheme", "build acquisition schemes");
  scheme->require_subcommand(1);
  auto* dsi = scheme->add_subcommand("dsi", "Cartesian DSI lattice");
  dsi->add_option("--radius", o.radius)->capture_default_str();
  dsi->add_option("--b-max", o.b_max)->capture_default_str();
  dsi->add_option("--out", o.out)->required();
  auto* under = scheme->add_subcommand("undersample", "power-law undersampling");
  under->add_option("--in", o.scheme_in)->required();
  under->add_option("--count", o.count)->capture_default_str();
  under->add_option("--exponent", o.exponent)->capture_default_str();
  under->add_option("--out", o.out)->required();

  auto* synth = app.add_subcommand("synth", "phantom + scheme -> signal file");
  synth->add_option("--phantom", o.phantom)->required();
  synth->add_option("--scheme", o.scheme)->required();
  synth->add_option("--out", o.out)->required();

  auto* recon = app.add_subcommand("reconstruct", "signal file -> SPF coefficients");
  recon->add_option("--signals", o.signals)->required();
  recon->add_option("--scheme", o.scheme, "defaults to the scheme named in the signal file");
  recon->add_option("--dict", o.dict, "dictionary file (required for --method dl)");
  recon->add_option("--method", o.method, "dl | l1")
      ->check(CLI::IsMember({"dl", "l1"}))
      ->capture_default_str();
  recon->add_option("--lambda", o.recon.lambda)->capture_default_str();
  recon->add_option("--lambda-l", o.recon.lambda_l)->capture_default_str();
  recon->add_option("--lambda-n", o.recon.lambda_n)->capture_default_str();
  recon->add_option("--tolerance", o.recon.solver.tolerance)->capture_default_str();
  recon->add_option("--out", o.out)->required();

  auto* eval = app.add_subcommand("eval", "experiment drivers");
  eval->require_subcommand(1);
  auto* sparsity = eval->add_subcommand("sparsity", "coefficient counts against FA");
  sparsity->add_option("--dict", o.dict)->required();
  sparsity->add_option("--draws", o.draws, "mixture draws per FA")->capture_default_str();
  sparsity->add_option("--directions", o.directions)->capture_default_str();
  sparsity->add_option("--out", o.out)->required();
  auto* rmse_cmd = eval->add_subcommand("rmse", "crossing-angle sweep, DL-SPFI vs L1-SPFI");
  rmse_cmd->add_option("--dict", o.dict)->required();
  rmse_cmd->add_option("--snr", o.snr, "number or inf")->capture_default_str();
  rmse_cmd->add_option("--seeds", o.seeds, "noise seeds seed..seed+n-1")->capture_default_str();
  rmse_cmd->add_option("--count", o.count)->capture_default_str();
  rmse_cmd->add_option("--exponent", o.exponent)->capture_default_str();
  rmse_cmd->add_option("--md", o.md)->capture_default_str();
  rmse_cmd->add_option("--fa", o.fa)->capture_default_str();
  rmse_cmd->add_option("--lambda", o.recon.lambda)->capture_default_str();
  rmse_cmd->add_option("--lambda-l", o.recon.lambda_l)->capture_default_str();
  rmse_cmd->add_option("--lambda-n", o.recon.lambda_n)->capture_default_str();
  rmse_cmd->add_option("--tolerance", o.recon.solver.tolerance)->capture_default_str();
  rmse_cmd->add_flag("--no-l1", o.no_l1, "skip the L1-SPFI baseline");
  rmse_cmd->add_option("--out", o.out)->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*learn) run_learn(o);
    else if (*dsi) run_scheme_dsi(o);
    else if (*under) run_scheme_undersample(o);
    else if (*synth) run_synth(o, seed_opt->count() > 0);
    else if (*recon) run_reconstruct(o);
    else if (*sparsity) run_eval_sparsity(o, config_text);
    else if (*rmse_cmd) run_eval_rmse(o, config_text);
  } catch (const Error& e) {
    std::cerr << "error " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dlspfi
