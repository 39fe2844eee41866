#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ntklab/verify.hpp"

namespace ntklab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNonSeparable = 2;
inline constexpr int kExitBoundViolation = 3;
inline constexpr int kExitDivergence = 4;

struct ExperimentConfig {
  // [data]
  std::string source = "generate";  // generate | csv
  std::string csv_path;
  std::string teacher = "linear_bias";  // linear_bias | two_layer_tangent
  std::size_t n = 200;
  std::size_t d = 10;
  std::uint64_t data_seed = 1;
  double margin_floor = 0.0;
  bool bias_coord = false;
  double bias_s = 0.1;
  long teacher_width = 64;
  std::uint64_t teacher_seed = 0;
  double heldout_fraction = 0.0;  // 0 disables the split
  std::uint64_t split_seed = 11;

  // [model]
  std::string activation = "tanh";
  double beta = 0.0;
  std::string init = "gaussian";  // gaussian | uniform_ball
  double init_scale = 1.0;
  std::size_t m = 0;
  bool m_auto = true;

  // [train]
  double eta = 0.0;
  bool eta_auto = true;
  std::size_t T = 0;
  bool t_auto = true;
  std::size_t t_cap = 4000;  // cap applied to auto-resolved T
  std::uint64_t train_seed = 1;
  std::size_t log_every = 10;
  std::vector<double> gamma_list{0.0};
  double divergence_factor = 10.0;

  // [certify]
  bool certify_enabled = true;
  std::size_t certify_m = 1000;
  std::size_t certify_iters = 1200;
  double certify_tol = 1e-9;
  std::uint64_t certify_seed = 3;

  // [budget]
  std::string variant = "margin";  // margin | l1_rate | loss_rate
  double epsilon = 0.1;
  double delta = 0.05;
  double c_m = 1.0, c_t = 1.0, c_eta = 1.0, c_n = 1.0;
  double alpha = 0.0;  // 0 resolves from rho_hat

  // [verify]
  std::vector<std::string> checks;  // empty = default set for the variant
  double bound_c = 1.0;
  double gen_gamma = 0.5;
  std::string kvariant = "both";  // quadratic | quartic | both

  // [out]
  std::string out_dir = "runs";
};

ExperimentConfig config_from_json(const nlohmann::json& j);

// TOML by default, JSON for *.json paths.
ExperimentConfig load_config(const std::string& path);

struct ExperimentOutcome {
  int exit_code = kExitOk;
  std::string run_dir;
  double rho_hat = 0.0;
  double final_loss = 0.0;
  double mean_grad_l1_sq = 0.0;
  std::vector<BoundReport> reports;
  std::string message;
};

// certify -> budget -> train -> verify -> report. Writes manifest.json,
// certificate.json, trajectory.csv, bounds.json and bounds.txt into a run
// directory named by the manifest content hash.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// File-level wrapper with the documented exit-code contract (1 = config error).
int run_experiment_file(const std::string& config_path, const std::string& out_override,
                        std::optional<std::uint64_t> seed_override,
                        std::string* run_dir = nullptr, std::string* error = nullptr);

// One experiment per value of a numeric config field ("train.T", "model.m",
// "train.eta", "data.n", "budget.epsilon"); failures are recorded per row.
int sweep(const ExperimentConfig& base, const std::string& axis,
          const std::vector<double>& values, const std::string& summary_csv_path);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace ntklab
