#include "ntklab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "ntklab/teacher.hpp"
#include "ntklab/tomllite.hpp"

namespace ntklab {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

[[noreturn]] void cfg_fail(const std::string& where, const std::string& what) {
  throw std::runtime_error("config field [" + where + "]: " + what);
}

const nlohmann::json* find(const nlohmann::json& j, const std::string& section,
                           const std::string& key) {
  auto sit = j.find(section);
  if (sit == j.end()) return nullptr;
  auto kit = sit->find(key);
  return kit == sit->end() ? nullptr : &*kit;
}

void get_string(const nlohmann::json& j, const std::string& sec, const std::string& key,
                std::string& out) {
  if (const auto* v = find(j, sec, key)) {
    if (!v->is_string()) cfg_fail(sec + "." + key, "expected a string");
    out = v->get<std::string>();
  }
}

void get_bool(const nlohmann::json& j, const std::string& sec, const std::string& key,
              bool& out) {
  if (const auto* v = find(j, sec, key)) {
    if (!v->is_boolean()) cfg_fail(sec + "." + key, "expected a boolean");
    out = v->get<bool>();
  }
}

void get_double(const nlohmann::json& j, const std::string& sec, const std::string& key,
                double& out) {
  if (const auto* v = find(j, sec, key)) {
    if (!v->is_number()) cfg_fail(sec + "." + key, "expected a number");
    out = v->get<double>();
  }
}

void get_size(const nlohmann::json& j, const std::string& sec, const std::string& key,
              std::size_t& out) {
  if (const auto* v = find(j, sec, key)) {
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      cfg_fail(sec + "." + key, "expected a non-negative integer");
    }
    out = static_cast<std::size_t>(v->get<long long>());
  }
}

void get_seed(const nlohmann::json& j, const std::string& sec, const std::string& key,
              std::uint64_t& out) {
  if (const auto* v = find(j, sec, key)) {
    if (!v->is_number_integer()) cfg_fail(sec + "." + key, "expected an integer seed");
    out = static_cast<std::uint64_t>(v->get<long long>());
  }
}

// m / eta / T accept the literal "auto" or a number
template <class T>
void get_auto(const nlohmann::json& j, const std::string& sec, const std::string& key,
              T& value, bool& is_auto, bool integer) {
  const auto* v = find(j, sec, key);
  if (v == nullptr) return;
  if (v->is_string()) {
    if (v->get<std::string>() != "auto") {
      cfg_fail(sec + "." + key, "expected a number or \"auto\"");
    }
    is_auto = true;
    return;
  }
  if (integer) {
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      cfg_fail(sec + "." + key, "expected a non-negative integer or \"auto\"");
    }
    value = static_cast<T>(v->get<long long>());
  } else {
    if (!v->is_number()) cfg_fail(sec + "." + key, "expected a number or \"auto\"");
    value = static_cast<T>(v->get<double>());
  }
  is_auto = false;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  get_string(j, "data", "source", c.source);
  get_string(j, "data", "path", c.csv_path);
  get_string(j, "data", "teacher", c.teacher);
  get_size(j, "data", "n", c.n);
  get_size(j, "data", "d", c.d);
  get_seed(j, "data", "seed", c.data_seed);
  get_double(j, "data", "margin_floor", c.margin_floor);
  get_bool(j, "data", "bias_coord", c.bias_coord);
  get_double(j, "data", "bias_s", c.bias_s);
  if (const auto* v = find(j, "data", "teacher_width")) {
    if (!v->is_number_integer()) cfg_fail("data.teacher_width", "expected an integer");
    c.teacher_width = v->get<long>();
  }
  get_seed(j, "data", "teacher_seed", c.teacher_seed);
  get_double(j, "data", "heldout_fraction", c.heldout_fraction);
  get_seed(j, "data", "split_seed", c.split_seed);

  get_string(j, "model", "activation", c.activation);
  get_double(j, "model", "beta", c.beta);
  get_string(j, "model", "init", c.init);
  get_double(j, "model", "init_scale", c.init_scale);
  get_auto(j, "model", "m", c.m, c.m_auto, true);

  get_auto(j, "train", "eta", c.eta, c.eta_auto, false);
  get_auto(j, "train", "T", c.T, c.t_auto, true);
  get_size(j, "train", "t_cap", c.t_cap);
  get_seed(j, "train", "seed", c.train_seed);
  get_size(j, "train", "log_every", c.log_every);
  if (const auto* v = find(j, "train", "gamma_list")) {
    if (!v->is_array()) cfg_fail("train.gamma_list", "expected an array of numbers");
    c.gamma_list.clear();
    for (const auto& e : *v) {
      if (!e.is_number()) cfg_fail("train.gamma_list", "expected an array of numbers");
      c.gamma_list.push_back(e.get<double>());
    }
  }
  get_double(j, "train", "divergence_factor", c.divergence_factor);

  get_bool(j, "certify", "enabled", c.certify_enabled);
  get_size(j, "certify", "m", c.certify_m);
  get_size(j, "certify", "iters", c.certify_iters);
  get_double(j, "certify", "tol", c.certify_tol);
  get_seed(j, "certify", "seed", c.certify_seed);

  get_string(j, "budget", "variant", c.variant);
  get_double(j, "budget", "epsilon", c.epsilon);
  get_double(j, "budget", "delta", c.delta);
  get_double(j, "budget", "c_m", c.c_m);
  get_double(j, "budget", "c_T", c.c_t);
  get_double(j, "budget", "c_eta", c.c_eta);
  get_double(j, "budget", "c_n", c.c_n);
  get_double(j, "budget", "alpha", c.alpha);

  if (const auto* v = find(j, "verify", "checks")) {
    if (!v->is_array()) cfg_fail("verify.checks", "expected an array of strings");
    c.checks.clear();
    for (const auto& e : *v) {
      if (!e.is_string()) cfg_fail("verify.checks", "expected an array of strings");
      c.checks.push_back(e.get<std::string>());
    }
  }
  get_double(j, "verify", "C", c.bound_c);
  get_double(j, "verify", "gamma", c.gen_gamma);
  get_string(j, "verify", "kvariant", c.kvariant);

  get_string(j, "out", "dir", c.out_dir);

  // cross-field validation
  if (c.source != "generate" && c.source != "csv") {
    cfg_fail("data.source", "must be \"generate\" or \"csv\", got \"" + c.source + "\"");
  }
  if (c.source == "csv" && c.csv_path.empty()) cfg_fail("data.path", "required for csv source");
  if (c.teacher != "linear_bias" && c.teacher != "two_layer_tangent") {
    cfg_fail("data.teacher", "unknown teacher \"" + c.teacher + "\"");
  }
  if (!(c.beta >= 0.0 && c.beta < 1.0)) cfg_fail("model.beta", "must be in [0, 1)");
  if (c.init != "gaussian" && c.init != "uniform_ball") {
    cfg_fail("model.init", "must be \"gaussian\" or \"uniform_ball\"");
  }
  if (c.variant != "margin" && c.variant != "l1_rate" && c.variant != "loss_rate") {
    cfg_fail("budget.variant", "must be margin | l1_rate | loss_rate");
  }
  if (c.variant == "loss_rate" && c.beta != 0.0) {
    cfg_fail("model.beta", "the loss_rate schedule requires beta = 0");
  }
  if (c.kvariant != "quadratic" && c.kvariant != "quartic" && c.kvariant != "both") {
    cfg_fail("verify.kvariant", "must be quadratic | quartic | both");
  }
  if (c.log_every == 0) cfg_fail("train.log_every", "must be >= 1");
  if ((c.m_auto || c.eta_auto || c.t_auto) && !c.certify_enabled) {
    cfg_fail("certify.enabled", "auto m/eta/T need margin certification enabled");
  }
  if (!c.m_auto && (c.m < 2 || c.m % 2 != 0)) cfg_fail("model.m", "must be even and >= 2");
  try {
    ActivationSpec::parse(c.activation);
  } catch (const std::exception& e) {
    cfg_fail("model.activation", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json tree;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    tree = nlohmann::json::parse(text);
  } else {
    tree = toml_parse(text);
  }
  return config_from_json(tree);
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["data"] = {{"source", c.source},
               {"path", c.csv_path},
               {"teacher", c.teacher},
               {"n", c.n},
               {"d", c.d},
               {"seed", c.data_seed},
               {"margin_floor", c.margin_floor},
               {"bias_coord", c.bias_coord},
               {"bias_s", c.bias_s},
               {"teacher_width", c.teacher_width},
               {"teacher_seed", c.teacher_seed},
               {"heldout_fraction", c.heldout_fraction},
               {"split_seed", c.split_seed}};
  j["model"] = {{"activation", c.activation}, {"beta", c.beta},     {"init", c.init},
                {"init_scale", c.init_scale}, {"m_auto", c.m_auto}, {"m", c.m}};
  j["train"] = {{"eta_auto", c.eta_auto},
                {"eta", c.eta},
                {"T_auto", c.t_auto},
                {"T", c.T},
                {"t_cap", c.t_cap},
                {"seed", c.train_seed},
                {"log_every", c.log_every},
                {"gamma_list", c.gamma_list},
                {"divergence_factor", c.divergence_factor}};
  j["certify"] = {{"enabled", c.certify_enabled},
                  {"m", c.certify_m},
                  {"iters", c.certify_iters},
                  {"tol", c.certify_tol},
                  {"seed", c.certify_seed}};
  j["budget"] = {{"variant", c.variant}, {"epsilon", c.epsilon}, {"delta", c.delta},
                 {"c_m", c.c_m},         {"c_T", c.c_t},         {"c_eta", c.c_eta},
                 {"c_n", c.c_n},         {"alpha", c.alpha}};
  j["verify"] = {{"checks", c.checks},
                 {"C", c.bound_c},
                 {"gamma", c.gen_gamma},
                 {"kvariant", c.kvariant}};
  return j;
}

std::vector<std::string> default_checks(const std::string& variant) {
  if (variant == "loss_rate") {
    return {"l1_rate", "markov", "kernel_positivity", "descent", "loss_rate", "distance"};
  }
  if (variant == "l1_rate") return {"l1_rate", "markov", "kernel_positivity", "descent", "loss_rate"};
  return {"l1_rate", "markov", "kernel_positivity", "descent"};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutcome outcome;
  const ActivationSpec act = ActivationSpec::parse(cfg.activation);
  const InitDistribution dist = cfg.init == "gaussian"
                                    ? InitDistribution::gaussian(cfg.init_scale)
                                    : InitDistribution::uniform_ball(cfg.init_scale);

  // --- data ---
  Dataset all;
  nlohmann::json gen_manifest;
  if (cfg.source == "generate") {
    TeacherSpec spec;
    spec.kind = cfg.teacher == "linear_bias" ? TeacherKind::LinearBias
                                             : TeacherKind::TwoLayerTangent;
    spec.width = static_cast<int>(cfg.teacher_width);
    spec.teacher_seed = cfg.teacher_seed;
    spec.activation = act;
    spec.margin_floor = cfg.margin_floor;
    spec.bias_coord = cfg.bias_coord;
    spec.s = cfg.bias_s;
    const GenReport gen = generate(spec, cfg.n, cfg.d, cfg.data_seed);
    all = gen.data;
    gen_manifest = {{"teacher", cfg.teacher},
                    {"n", cfg.n},
                    {"d", cfg.d},
                    {"seed", cfg.data_seed},
                    {"margin_floor", cfg.margin_floor},
                    {"bias_coord", cfg.bias_coord},
                    {"bias_s", cfg.bias_s},
                    {"acceptance_rate", gen.acceptance_rate},
                    {"n_pos", gen.n_pos},
                    {"n_neg", gen.n_neg}};
  } else {
    all = load_csv(cfg.csv_path);
    all.validate();
  }

  Dataset train = all;
  Dataset heldout;
  bool have_heldout = false;
  if (cfg.heldout_fraction > 0.0) {
    auto parts = split(all, cfg.heldout_fraction, cfg.split_seed);
    train = std::move(parts.first);
    heldout = std::move(parts.second);
    have_heldout = true;
  }

  // --- certify ---
  MarginCertificate cert;
  bool certified = false;
  if (cfg.certify_enabled) {
    const NetParams probe =
        init_symmetric(cfg.certify_m, train.dim(), dist, act, cfg.certify_seed);
    cert = estimate_margin(probe, train, cfg.certify_iters, cfg.certify_tol);
    certified = true;
    outcome.rho_hat = cert.rho_hat;
  }

  // --- budget resolution ---
  std::size_t m = cfg.m;
  double eta = cfg.eta;
  std::size_t T = cfg.T;
  nlohmann::json budget_json;
  const double rho = certified ? cert.rho_hat : 0.0;
  const bool separable = !certified || rho > 0.0;
  if (!certified && (cfg.m_auto || cfg.eta_auto || cfg.t_auto)) {
    throw std::runtime_error(
        "config field [certify.enabled]: auto m/eta/T need margin certification");
  }

  if (certified && separable) {
    if (cfg.variant == "margin") {
      if (cfg.m_auto) m = min_width_for_margin(rho, act.k1, train.n(), cfg.delta);
      const DescentBudget budget = descent_budget(m, cfg.beta, rho, act.k1, act.k2);
      if (cfg.eta_auto) eta = budget.eta_max;
      if (cfg.t_auto) {
        T = budget.t_unbounded ? cfg.t_cap : std::min(budget.t_max, cfg.t_cap);
      }
      budget_json = {{"variant", "margin"},
                     {"eta_max", budget.eta_max},
                     {"t_max", budget.t_unbounded ? 0 : budget.t_max},
                     {"t_unbounded", budget.t_unbounded},
                     {"m_min_for_margin",
                      certified ? min_width_for_margin(rho, act.k1, train.n(), cfg.delta)
                                : 0}};
    } else {
      const ScheduleVariant variant =
          cfg.variant == "l1_rate" ? ScheduleVariant::L1Rate : ScheduleVariant::LossRate;
      const ScheduleMultipliers mult{cfg.c_m, cfg.c_t, cfg.c_eta, cfg.c_n};
      const ScheduleSetting setting =
          rate_schedule(variant, cfg.epsilon, rho, cfg.beta, mult);
      if (cfg.m_auto) m = setting.m;
      if (cfg.eta_auto) eta = setting.eta;
      if (cfg.t_auto) T = std::min(setting.T, cfg.t_cap);
      budget_json = {{"variant", cfg.variant}, {"m", setting.m},
                     {"T", setting.T},         {"eta", setting.eta},
                     {"n_prescribed", setting.n},
                     {"multipliers", {{"c_m", cfg.c_m},
                                      {"c_T", cfg.c_t},
                                      {"c_eta", cfg.c_eta},
                                      {"c_n", cfg.c_n}}}};
    }
  } else {
    budget_json = {{"variant", cfg.variant}, {"certified", certified}};
  }

  double alpha = cfg.alpha;
  if (separable && certified && alpha <= 0.0) {
    // the loss-rate analysis wants alpha of order rho * eps^(3/2), capped by
    // the almost-convexity range rho/(4 K2)
    alpha = rho * std::pow(cfg.epsilon, 1.5);
    if (act.k2 > 0.0) alpha = std::min(alpha, rho / (4.0 * act.k2));
  }

  // --- manifest (hash decides the run directory) ---
  const auto [tail_a, tail_b] = dist.tail_params(train.dim());
  nlohmann::json manifest;
  manifest["config"] = config_to_json(cfg);
  manifest["activation"] = {{"name", act.name()}, {"K1", act.k1}, {"K2", act.k2}};
  manifest["tail"] = {{"A", tail_a}, {"b", tail_b}};
  manifest["data"] = {{"n_train", train.n()},
                      {"n_heldout", have_heldout ? heldout.n() : 0},
                      {"d", train.dim()}};
  if (!gen_manifest.is_null()) manifest["generation"] = gen_manifest;
  if (certified) {
    manifest["certificate"] = nlohmann::json::parse(cert.to_json_string());
  }
  manifest["budget"] = budget_json;
  manifest["resolved"] = {{"m", m}, {"eta", eta}, {"T", T}, {"alpha", alpha}};

  const std::string manifest_text = manifest.dump(2) + "\n";
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(manifest_text)));
  const fs::path run_dir = fs::path(cfg.out_dir) / hash_hex;
  fs::create_directories(run_dir);
  outcome.run_dir = run_dir.string();

  write_text(run_dir / "manifest.json", manifest_text);
  if (certified) {
    write_text(run_dir / "certificate.json", cert.to_json_string() + "\n");
  }
  if (cfg.source == "generate") {
    save_csv(train, (run_dir / "train.csv").string());
    if (have_heldout) save_csv(heldout, (run_dir / "heldout.csv").string());
  }

  if (!separable) {
    outcome.exit_code = kExitNonSeparable;
    outcome.message = "certified margin rho_hat = " + std::to_string(rho) +
                      " is not positive: dataset is not tangent-separable";
    write_text(run_dir / "bounds.txt", outcome.message + "\n");
    return outcome;
  }

  // --- train ---
  const NetParams params0 = init_symmetric(m, train.dim(), dist, act, cfg.train_seed);
  GDConfig gd;
  gd.eta = eta;
  gd.T = T;
  gd.seed = cfg.train_seed;
  gd.log_every = cfg.log_every;
  gd.gamma_list = cfg.gamma_list;
  gd.divergence_factor = cfg.divergence_factor;
  NetParams final_params;
  const TrajectoryLog log =
      gd_run_capture(params0, train, gd, have_heldout ? &heldout : nullptr, final_params);
  write_trajectory_csv(log, (run_dir / "trajectory.csv").string());
  if (!log.rows.empty()) outcome.final_loss = log.rows.back().loss;
  if (log.steps_completed > 0) {
    outcome.mean_grad_l1_sq =
        log.sum_grad_l1_sq / static_cast<double>(log.steps_completed);
  }

  // --- verify ---
  std::vector<std::string> checks =
      cfg.checks.empty() ? default_checks(cfg.variant) : cfg.checks;
  if (have_heldout) {
    bool listed = false;
    for (const auto& c : checks) listed = listed || c == "generalization";
    if (cfg.checks.empty() && !listed) checks.push_back("generalization");
  }

  std::vector<BoundReport>& reports = outcome.reports;
  for (const auto& check : checks) {
    const bool needs_rho = check == "l1_rate" || check == "kernel_positivity" ||
                           check == "loss_rate" || check == "distance" ||
                           check == "generalization";
    if (needs_rho && !certified) {
      BoundReport skip;
      skip.bound_id = check;
      skip.comparable = false;
      skip.note = "skipped: no margin certificate";
      reports.push_back(std::move(skip));
      continue;
    }
    if (check == "l1_rate") {
      const bool both = cfg.kvariant == "both";
      const double k_quad = smoothness_k(SmoothnessK::Quadratic, act.k1, act.k2);
      const double k_quart = smoothness_k(SmoothnessK::Quartic, act.k1, act.k2);
      const SmoothnessK weaker =
          k_quart >= k_quad ? SmoothnessK::Quartic : SmoothnessK::Quadratic;
      if (both || cfg.kvariant == "quadratic") {
        auto r = check_l1_rate(log, m, cfg.beta, eta, rho, act.k1, act.k2,
                               SmoothnessK::Quadratic);
        if (both && weaker != SmoothnessK::Quadratic) r.advisory = true;
        reports.push_back(std::move(r));
      }
      if (both || cfg.kvariant == "quartic") {
        auto r = check_l1_rate(log, m, cfg.beta, eta, rho, act.k1, act.k2,
                               SmoothnessK::Quartic);
        if (both && weaker != SmoothnessK::Quartic) r.advisory = true;
        reports.push_back(std::move(r));
      }
    } else if (check == "markov") {
      reports.push_back(check_markov(log));
    } else if (check == "kernel_positivity") {
      reports.push_back(check_kernel_positivity(final_params, params0, train, rho));
    } else if (check == "descent") {
      auto bundle = check_descent_lemma(log, eta, m);
      for (auto& r : bundle) reports.push_back(std::move(r));
    } else if (check == "loss_rate") {
      reports.push_back(
          check_loss_rate(log, m, cfg.beta, eta, rho, alpha, cfg.bound_c, act.k2));
    } else if (check == "distance") {
      reports.push_back(check_distance_diagnostic(log, cfg.epsilon, rho, cfg.bound_c));
    } else if (check == "generalization") {
      GenBoundInputs in;
      in.gamma = cfg.gen_gamma;
      in.delta = cfg.delta;
      in.n = train.n();
      in.m = m;
      in.T = log.steps_completed;
      in.d = train.dim();
      in.beta = cfg.beta;
      in.eta = eta;
      in.rho = rho;
      in.epsilon = cfg.epsilon;
      in.big_c = cfg.bound_c;
      in.k1 = act.k1;
      in.k2 = act.k2;
      in.tail_a = tail_a;
      in.tail_b = tail_b;
      in.latter_case = cfg.variant == "loss_rate";
      reports.push_back(check_generalization_rhs(log, GenBoundVariant::WithDim, in));
      reports.push_back(check_generalization_rhs(log, GenBoundVariant::DimFree, in));
    } else {
      throw std::runtime_error("config field [verify.checks]: unknown check \"" + check +
                               "\"");
    }
  }

  write_text(run_dir / "bounds.json", reports_to_json_string(reports));
  write_text(run_dir / "bounds.txt", render_table(reports));

  if (log.diverged || log.aborted_nonfinite) {
    outcome.exit_code = kExitDivergence;
    outcome.message = log.abort_note;
    return outcome;
  }
  for (const auto& r : reports) {
    if (r.comparable && r.precondition_ok && !r.advisory && !r.holds) {
      outcome.exit_code = kExitBoundViolation;
      outcome.message = "bound violated: " + r.bound_id;
      return outcome;
    }
  }
  return outcome;
}

int run_experiment_file(const std::string& config_path, const std::string& out_override,
                        std::optional<std::uint64_t> seed_override, std::string* run_dir,
                        std::string* error) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    if (error != nullptr) *error = e.what();
    return kExitConfigError;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_override.has_value()) cfg.train_seed = *seed_override;
  try {
    const ExperimentOutcome outcome = run_experiment(cfg);
    if (run_dir != nullptr) *run_dir = outcome.run_dir;
    if (error != nullptr) *error = outcome.message;
    return outcome.exit_code;
  } catch (const std::exception& e) {
    // anything thrown before training starts (bad data, exhausted generation
    // budget, unknown check name) is a configuration problem
    if (error != nullptr) *error = e.what();
    return kExitConfigError;
  }
}

int sweep(const ExperimentConfig& base, const std::string& axis,
          const std::vector<double>& values, const std::string& summary_csv_path) {
  auto apply = [&](ExperimentConfig& cfg, double value) {
    if (axis == "train.T") {
      cfg.T = static_cast<std::size_t>(std::llround(value));
      cfg.t_auto = false;
    } else if (axis == "train.eta") {
      cfg.eta = value;
      cfg.eta_auto = false;
    } else if (axis == "model.m") {
      cfg.m = static_cast<std::size_t>(std::llround(value));
      cfg.m_auto = false;
    } else if (axis == "data.n") {
      cfg.n = static_cast<std::size_t>(std::llround(value));
    } else if (axis == "budget.epsilon") {
      cfg.epsilon = value;
    } else if (axis == "data.margin_floor") {
      cfg.margin_floor = value;
    } else {
      throw std::runtime_error("config field [sweep.axis]: unsupported axis \"" + axis +
                               "\"");
    }
  };

  std::FILE* out = std::fopen(summary_csv_path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot write sweep summary: " + summary_csv_path);

  bool wrote_header = false;
  std::vector<std::string> bound_order;
  for (double value : values) {
    ExperimentConfig cfg = base;
    apply(cfg, value);
    int code = kExitOk;
    ExperimentOutcome outcome;
    try {
      outcome = run_experiment(cfg);
      code = outcome.exit_code;
    } catch (const std::exception& e) {
      outcome.message = e.what();
      code = kExitConfigError;
    }

    if (!wrote_header) {
      for (const auto& r : outcome.reports) bound_order.push_back(r.bound_id);
      std::fprintf(out, "%s,exit_code,final_loss,mean_grad_l1_sq", axis.c_str());
      for (const auto& id : bound_order) std::fprintf(out, ",slack_%s", id.c_str());
      std::fprintf(out, "\n");
      wrote_header = true;
    }

    std::fprintf(out, "%.17g,%d,%.17g,%.17g", value, code, outcome.final_loss,
                 outcome.mean_grad_l1_sq);
    for (const auto& id : bound_order) {
      bool found = false;
      for (const auto& r : outcome.reports) {
        if (r.bound_id == id) {
          std::fprintf(out, ",%.17g", r.slack);
          found = true;
          break;
        }
      }
      if (!found) std::fprintf(out, ",");
    }
    std::fprintf(out, "\n");
  }
  if (!wrote_header) {
    std::fprintf(out, "%s,exit_code,final_loss,mean_grad_l1_sq\n", axis.c_str());
  }
  std::fclose(out);
  return kExitOk;
}

}  // namespace ntklab
