#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ntklab/experiment.hpp"
#include "ntklab/linalg.hpp"
#include "ntklab/parallel.hpp"
#include "ntklab/tangent.hpp"
#include "ntklab/teacher.hpp"

namespace fs = std::filesystem;
using namespace ntklab;

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(std::stod(cell));
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  std::string run_dir, error;
  const int code = run_experiment_file(config_path, out_dir, seed, &run_dir, &error);
  if (code == kExitConfigError) {
    std::cerr << "config error: " << error << "\n";
    return code;
  }
  if (!run_dir.empty()) {
    std::cout << "run directory: " << run_dir << "\n";
    std::ifstream table(fs::path(run_dir) / "bounds.txt");
    std::cout << table.rdbuf();
  }
  if (!error.empty()) std::cout << error << "\n";
  return code;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_csv, const std::string& out_dir) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  fs::create_directories(cfg.out_dir);
  const std::string summary = (fs::path(cfg.out_dir) / "sweep_summary.csv").string();
  try {
    const int code = sweep(cfg, axis, parse_values(values_csv), summary);
    std::cout << "sweep summary: " << summary << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_certify(const std::string& data_path, const std::string& activation,
                std::size_t m, std::size_t iters, std::uint64_t seed,
                const std::string& out_dir, bool dump_v) {
  try {
    const Dataset data = load_csv(data_path);
    data.validate();
    const ActivationSpec act = ActivationSpec::parse(activation);
    const NetParams params0 =
        init_symmetric(m, data.dim(), InitDistribution::gaussian(1.0), act, seed);
    const MarginCertificate cert = estimate_margin(params0, data, iters, 1e-9);
    std::cout << cert.to_json_string() << "\n";
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream(fs::path(out_dir) / "certificate.json")
          << cert.to_json_string() << "\n";
      if (dump_v) cert.save_v_csv((fs::path(out_dir) / "certificate_v.csv").string());
    }
    return cert.rho_hat > 0.0 ? kExitOk : kExitNonSeparable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_gram(const std::string& data_path, const std::string& kernel,
             const std::string& activation, std::size_t samples, std::size_t m,
             double beta, bool scaled, std::uint64_t seed, const std::string& out_file) {
  try {
    const Dataset data = load_csv(data_path);
    data.validate();
    if (data.n() > 5000) {
      std::cerr << "error: gram is capped at n = 5000 (got " << data.n() << ")\n";
      return kExitConfigError;
    }
    const ActivationSpec act = ActivationSpec::parse(activation);
    GramMatrix g;
    if (kernel == "ntk") {
      g = gram_ntk_mc(data, InitDistribution::gaussian(1.0), act, samples, seed);
    } else if (kernel == "empirical") {
      const NetParams params =
          init_symmetric(m, data.dim(), InitDistribution::gaussian(1.0), act, seed);
      NetParams with_beta = params;
      with_beta.beta = beta;
      g = gram_empirical(with_beta, data, scaled);
    } else {
      std::cerr << "error: --kernel must be ntk or empirical\n";
      return kExitConfigError;
    }
    std::printf("min eigenvalue: %.17g\n", min_eigenvalue(g));
    if (!out_file.empty()) {
      save_gram_csv(g, out_file);
      std::cout << "gram written to " << out_file << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();

  CLI::App app{"two-layer network training, margin certification, and bound reports"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values_csv;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "TOML or JSON experiment config")->required();
  run->add_option("--out", out_dir, "output directory (overrides [out].dir)");
  run->add_option("--seed", seed, "override the training seed");

  auto* sw = app.add_subcommand("sweep", "run one experiment per axis value");
  sw->add_option("config", config_path, "TOML or JSON experiment config")->required();
  sw->add_option("--axis", axis, "numeric config field, e.g. train.T")->required();
  sw->add_option("--values", values_csv, "comma-separated values")->required();
  sw->add_option("--out", out_dir, "output directory");

  std::string data_path, activation = "tanh";
  std::size_t cert_m = 1000, cert_iters = 1200;
  std::uint64_t cert_seed = 3;
  bool dump_v = false;
  auto* certify = app.add_subcommand("certify", "estimate the tangent margin of a dataset");
  certify->add_option("data", data_path, "dataset CSV")->required();
  certify->add_option("--activation", activation, "activation name");
  certify->add_option("--m", cert_m, "certification width");
  certify->add_option("--iters", cert_iters, "ascent iterations");
  certify->add_option("--seed", cert_seed, "init seed");
  certify->add_option("--out", out_dir, "directory for certificate.json");
  certify->add_flag("--dump-v", dump_v, "also write the witness matrix as CSV");

  std::string kernel = "ntk", gram_out;
  std::size_t samples = 10000, gram_m = 2000;
  double gram_beta = 0.0;
  bool scaled = false;
  std::uint64_t gram_seed = 1;
  auto* gr = app.add_subcommand("gram", "assemble a kernel Gram matrix");
  gr->add_option("data", data_path, "dataset CSV")->required();
  gr->add_option("--kernel", kernel, "ntk | empirical")->required();
  gr->add_option("--activation", activation, "activation name");
  gr->add_option("--samples", samples, "MC samples (ntk kernel)");
  gr->add_option("--m", gram_m, "width (empirical kernel)");
  gr->add_option("--beta", gram_beta, "scaling exponent (empirical kernel)");
  gr->add_flag("--scaled", scaled, "multiply the empirical gram by m^(2 beta - 1)");
  gr->add_option("--seed", gram_seed, "sampling/init seed");
  gr->add_option("--out", gram_out, "CSV output path");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, out_dir, seed);
  if (sw->parsed()) return cmd_sweep(config_path, axis, values_csv, out_dir);
  if (certify->parsed()) {
    return cmd_certify(data_path, activation, cert_m, cert_iters, cert_seed, out_dir,
                       dump_v);
  }
  if (gr->parsed()) {
    return cmd_gram(data_path, kernel, activation, samples, gram_m, gram_beta, scaled,
                    gram_seed, gram_out);
  }
  return kExitConfigError;
}
