#include "ntklab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ntklab/parallel.hpp"

namespace ntklab {

bool bound_holds(double lhs, double rhs) {
  return lhs <= rhs + 1e-9 * std::max(1.0, std::abs(rhs));
}

double smoothness_k(SmoothnessK variant, double k1, double k2) {
  switch (variant) {
    case SmoothnessK::Quadratic:
      return k1 * k1 + 2.0 * k2 + k1 * k1 * k2 * k2;
    case SmoothnessK::Quartic:
      return std::pow(k1, 4.0) + 2.0 * k1 * k1 * k2 + std::pow(k1, 4.0) * k2 * k2;
  }
  return 0.0;
}

namespace {

BoundReport make_report(std::string id, double lhs, double rhs) {
  BoundReport r;
  r.bound_id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.holds = bound_holds(lhs, rhs);
  return r;
}

double frob_sq(const Matrix& a) {
  const auto flat = a.data();
  return blocked_sum(flat.size(), [&](std::size_t k) { return flat[k] * flat[k]; });
}

}  // namespace

BoundReport check_l1_rate(const TrajectoryLog& log, std::size_t m, double beta,
                           double eta, double rho, double k1, double k2,
                           SmoothnessK kvariant) {
  const double md = static_cast<double>(m);
  const std::size_t T = log.steps_completed;
  const double big_k = smoothness_k(kvariant, k1, k2);

  BoundReport r;
  r.bound_id = kvariant == SmoothnessK::Quadratic ? "l1_rate[K=quadratic]"
                                           : "l1_rate[K=quartic]";
  if (T == 0) {
    r.comparable = false;
    r.note = "no completed iterations";
    return r;
  }
  const double lhs = log.sum_grad_l1_sq / static_cast<double>(T);
  const double rhs = 16.0 * std::log(2.0) / (rho * rho * static_cast<double>(T)) *
                     (std::pow(md, 2.0 * beta - 1.0) / eta + big_k);
  r = make_report(r.bound_id, lhs, rhs);

  const double eta_cap =
      std::min(std::pow(md, beta), 4.0 * std::pow(md, 2.0 * beta - 1.0) / (k1 * k1 + k2));
  bool budget_ok = eta > 0.0 && eta <= eta_cap * (1.0 + 1e-12);
  if (k2 > 0.0) {
    const double t_cap = md * rho * rho / (32.0 * eta * k2 * k2 * std::log(2.0));
    budget_ok = budget_ok && static_cast<double>(T) <= std::floor(t_cap);
  }
  if (!budget_ok) {
    r.precondition_ok = false;
    r.note = "eta/T outside the stated budget";
  }
  r.inputs = {{"m", md},   {"beta", beta}, {"eta", eta}, {"rho", rho},
              {"K1", k1},  {"K2", k2},     {"K", big_k}, {"T", static_cast<double>(T)}};
  return r;
}

BoundReport check_loss_rate(const TrajectoryLog& log, std::size_t m, double beta,
                           double eta, double rho, double alpha, double big_c,
                           double k2) {
  const double md = static_cast<double>(m);
  const std::size_t T = log.steps_completed;
  BoundReport r;
  r.bound_id = "loss_rate";
  if (T == 0) {
    r.comparable = false;
    r.note = "no completed iterations";
    return r;
  }
  const double td = static_cast<double>(T);
  const double lhs = log.sum_loss / td;
  const double t1 = 1.0 / td;
  const double t2 = alpha * alpha * md / (eta * td);
  const double t3 = std::exp(-alpha * rho * std::pow(md, 1.0 - beta) / 4.0);
  const double t4 = alpha * alpha / rho * std::sqrt(md / (eta * td));
  const double t5 = 1.0 / rho * std::sqrt(eta * td / md);
  const double term_sum = t1 + t2 + t3 + t4 + t5;
  r = make_report(r.bound_id, lhs, big_c * term_sum);
  r.terms = {{"1/T", t1},
             {"alpha^2 m/(eta T)", t2},
             {"exp(-alpha rho m^(1-beta)/4)", t3},
             {"(alpha^2/rho) sqrt(m/(eta T))", t4},
             {"(1/rho) sqrt(eta T/m)", t5},
             {"implied_C_star", lhs / term_sum}};
  r.inputs = {{"m", md},     {"beta", beta},   {"eta", eta}, {"rho", rho},
              {"alpha", alpha}, {"C", big_c},  {"K2", k2},   {"T", td}};
  if (!(alpha > 0.0) || (k2 > 0.0 && alpha > rho / (4.0 * k2) * (1.0 + 1e-12))) {
    r.precondition_ok = false;
    r.note = "alpha outside (0, rho/(4 K2)]";
  }
  return r;
}

BoundReport check_distance_diagnostic(const TrajectoryLog& log, double epsilon, double rho,
                                 double big_c) {
  const double lhs = log.final_dist_init;
  const double base =
      std::pow(epsilon, 0.75) * std::pow(std::log(1.0 / (rho * rho * epsilon)), 2.0);
  BoundReport r = make_report("distance_diagnostic", lhs, big_c * base);
  r.advisory = true;  // the uniform constant is unknown; C* is the diagnostic
  r.terms = {{"eps^(3/4) log^2(rho^-2 eps^-1)", base}, {"implied_C_star", lhs / base}};
  r.inputs = {{"epsilon", epsilon}, {"rho", rho}, {"C", big_c}};
  return r;
}

BoundReport check_kernel_positivity(const NetParams& params, const NetParams& params0,
                                   const Dataset& data, double rho) {
  const double md = static_cast<double>(params.width());
  const double k2 = params.activation.k2;
  const double grad_l1 = functional_gradient_l1(params, data);
  const double lhs =
      rho * rho / (16.0 * std::pow(md, 2.0 * params.beta - 1.0)) * grad_l1 * grad_l1;
  // <grad_f L, T_k grad_f L> equals ||grad_theta L||^2 exactly
  const double measured = frob_sq(loss_gradient(params, data));

  BoundReport r = make_report("kernel_positivity", lhs, measured);
  r.inputs = {{"m", md},
              {"beta", params.beta},
              {"rho", rho},
              {"K2", k2},
              {"grad_l1", grad_l1}};
  if (k2 > 0.0) {
    const double ball = md * rho / (4.0 * k2);
    const double dist21 = param_distance_21(params, params0);
    r.inputs["dist_21"] = dist21;
    r.inputs["ball_radius_21"] = ball;
    if (dist21 > ball * (1.0 + 1e-12)) {
      r.precondition_ok = false;
      r.note = "parameters left the (2,1) ball of radius m rho / (4 K2)";
    }
  }
  return r;
}

BoundReport check_markov(const TrajectoryLog& log) {
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t worst_t = 0;
  for (const auto& row : log.rows) {
    const double gap = row.train_err - 2.0 * row.grad_l1;
    if (gap > worst) {
      worst = gap;
      worst_t = row.t;
    }
  }
  BoundReport r = make_report("markov_train_err", worst, 0.0);
  r.comparable = !log.rows.empty();
  r.note = "max over logged t of train_err - 2 grad_l1 (worst at t = " +
           std::to_string(worst_t) + ")";
  return r;
}

std::vector<BoundReport> check_descent_lemma(const TrajectoryLog& log, double eta,
                                     std::size_t m) {
  std::vector<BoundReport> out;
  const std::size_t T = log.steps_completed;

  {
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < log.rows.size(); ++k) {
      worst_rise = std::max(worst_rise, log.rows[k].loss - log.rows[k - 1].loss);
    }
    BoundReport r = make_report("descent_monotone_loss",
                                log.rows.size() > 1 ? worst_rise : 0.0, 0.0);
    r.note = "max loss increase between consecutive logged steps";
    out.push_back(std::move(r));
  }
  {
    BoundReport r;
    r.bound_id = "descent_mean_grad_sq";
    if (T == 0) {
      r.comparable = false;
    } else {
      const double lhs = log.sum_grad_param_sq / static_cast<double>(T);
      const double rhs = 2.0 * std::log(2.0) / (eta * static_cast<double>(T));
      r = make_report(r.bound_id, lhs, rhs);
    }
    r.inputs = {{"eta", eta}, {"T", static_cast<double>(T)}};
    out.push_back(std::move(r));
  }
  {
    BoundReport r;
    r.bound_id = "descent_distance";
    if (T == 0) {
      r = make_report(r.bound_id, log.final_dist_init, 0.0);
    } else {
      const double rhs = std::sqrt(2.0 * eta * static_cast<double>(T) * std::log(2.0));
      r = make_report(r.bound_id, log.final_dist_init, rhs);
    }
    out.push_back(std::move(r));
  }
  {
    const double rhs = std::sqrt(static_cast<double>(m)) * log.final_dist_init;
    BoundReport r = make_report("descent_norm21_vs_norm2", log.final_dist_init_21, rhs);
    r.note = "||.||_{2,1} <= sqrt(m) ||.||_2";
    out.push_back(std::move(r));
  }
  return out;
}

BoundReport check_generalization_rhs(const TrajectoryLog& log, GenBoundVariant variant,
                                     const GenBoundInputs& in) {
  BoundReport r;
  r.bound_id = variant == GenBoundVariant::WithDim ? "generalization_dim"
                                                   : "generalization_dimfree";

  const double md = static_cast<double>(in.m);
  const double td = static_cast<double>(in.T);
  const double nd = static_cast<double>(in.n);
  const double big_k = smoothness_k(SmoothnessK::Quartic, in.k1, in.k2);

  double complexity_c, complexity_d;
  if (in.latter_case) {
    complexity_c = in.epsilon + std::pow(in.rho, -2.0) / td *
                                    std::pow(std::log(1.0 / in.epsilon), 2.0);
    complexity_d = std::pow(in.epsilon, 0.75) *
                   std::pow(std::log(1.0 / (in.rho * in.rho * in.epsilon)), 2.0);
  } else {
    complexity_c = 1.0 / in.rho / std::sqrt(td) *
                   (std::pow(md, in.beta - 0.5) / std::sqrt(in.eta) + std::sqrt(big_k));
    complexity_d = std::sqrt(in.eta * td);
  }

  const double t1 = in.big_c * (1.0 + std::exp(in.gamma)) * complexity_c;
  const double t2 = 3.0 * std::sqrt(std::log(2.0 / in.delta) / (2.0 * nd));
  double t3 = 0.0;
  if (variant == GenBoundVariant::WithDim) {
    t3 = in.big_c / in.gamma * std::pow(md, 0.5 - in.beta) * complexity_d *
         (1.0 + in.k1 + in.k2) *
         std::sqrt(static_cast<double>(in.d) / nd *
                   std::log(nd * (1.0 + in.k1 + in.k2) *
                            (std::log(md / in.delta) + complexity_d * complexity_d)));
  } else {
    t3 = in.big_c * in.k1 * std::pow(md, 0.5 - in.beta) / (in.gamma * std::sqrt(nd)) *
         (complexity_d + std::sqrt(std::log(in.tail_a * md / in.delta) / in.tail_b));
  }
  const double rhs = t1 + t2 + t3;

  double lhs = std::numeric_limits<double>::infinity();
  bool have_test = false;
  for (const auto& row : log.rows) {
    if (row.test_err.has_value()) {
      lhs = std::min(lhs, *row.test_err);
      have_test = true;
    }
  }
  if (!have_test) {
    r.lhs = 0.0;
    r.rhs = rhs;
    r.comparable = false;
    r.note = "no held-out error in the trajectory log";
  } else {
    r = make_report(r.bound_id, lhs, rhs);
  }
  r.terms = {{"optimization", t1},
             {"confidence", t2},
             {"complexity", t3},
             {"C_eta_m_T", complexity_c},
             {"D_eta_m_T", complexity_d}};
  r.inputs = {{"gamma", in.gamma}, {"delta", in.delta}, {"n", nd},
              {"m", md},           {"T", td},           {"d", static_cast<double>(in.d)},
              {"beta", in.beta},   {"eta", in.eta},     {"rho", in.rho},
              {"C", in.big_c},     {"K1", in.k1},       {"K2", in.k2},
              {"A", in.tail_a},    {"b", in.tail_b},    {"K", big_k}};
  if (in.latter_case) r.inputs["epsilon"] = in.epsilon;
  if (!(in.gamma > 0.0)) {
    r.precondition_ok = false;
    r.note = "gamma must be positive";
  }
  return r;
}

BoundReport check_smoothness_residuals(std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_smoothness_residuals: samples >= 1");
  Rng rng(seed);
  const ActivationSpec acts[] = {
      ActivationSpec::parse("sigmoid"), ActivationSpec::parse("tanh"),
      ActivationSpec::parse("swish"), ActivationSpec::parse("softplus:2"),
      ActivationSpec::parse("identity")};
  const double betas[] = {0.0, 0.25, 0.5, 0.75};

  double worst_slack_i = std::numeric_limits<double>::infinity();
  double worst_slack_ii = std::numeric_limits<double>::infinity();

  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t m = 2 * (1 + rng.below(16));
    const std::size_t d = 1 + rng.below(6);
    const std::size_t n = 1 + rng.below(16);
    NetParams params;
    params.beta = betas[rng.below(4)];
    params.activation = acts[rng.below(5)];
    params.theta = Matrix(m, d);
    params.signs.resize(m);
    for (auto& e : params.theta.data()) e = rng.normal();
    for (std::size_t r = 0; r < m; ++r) params.signs[r] = rng.uniform01() < 0.5 ? 1.0 : -1.0;

    Dataset data;
    data.x = Matrix(n, d);
    data.y.resize(n);
    const InitDistribution ball = InitDistribution::uniform_ball(1.0);
    for (std::size_t i = 0; i < n; ++i) {
      ball.sample_row(rng, data.x.row(i));
      data.y[i] = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    }

    const double k1 = params.activation.k1;
    const double k2 = params.activation.k2;
    const double md = static_cast<double>(m);
    const double eta = std::pow(md, params.beta) * (0.05 + 0.95 * rng.uniform01());

    // (i) descent identity residual against the smoothness cap
    const double loss = empirical_loss(params, data);
    const Matrix grad = loss_gradient(params, data);
    const double grad_sq = frob_sq(grad);
    NetParams stepped = params;
    {
      auto tflat = stepped.theta.data();
      const auto gflat = grad.data();
      for (std::size_t k = 0; k < tflat.size(); ++k) tflat[k] -= eta * gflat[k];
    }
    const double loss_plus = empirical_loss(stepped, data);
    const double residual = std::abs(loss_plus - (loss - eta * grad_sq));
    const double cap = eta * eta * smoothness_k(SmoothnessK::Quadratic, k1, k2) /
                       (2.0 * std::pow(md, 2.0 * params.beta - 1.0)) * grad_sq;
    worst_slack_i = std::min(worst_slack_i, cap - residual);

    // (ii) almost-convexity against a random reference point
    NetParams ref = params;
    for (auto& e : ref.theta.data()) e += 0.5 * rng.normal();
    double inner = 0.0;
    {
      const auto gflat = grad.data();
      const auto pflat = params.theta.data();
      const auto rflat = ref.theta.data();
      for (std::size_t k = 0; k < gflat.size(); ++k) {
        inner += gflat[k] * (rflat[k] - pflat[k]);
      }
    }
    double dist_sq = 0.0;
    {
      const auto pflat = params.theta.data();
      const auto rflat = ref.theta.data();
      for (std::size_t k = 0; k < pflat.size(); ++k) {
        const double diff = rflat[k] - pflat[k];
        dist_sq += diff * diff;
      }
    }
    const double lhs_ii = loss + inner;
    const double rhs_ii = empirical_loss(ref, data) +
                          k2 / std::pow(md, params.beta) *
                              functional_gradient_l1(params, data) * dist_sq;
    worst_slack_ii = std::min(worst_slack_ii, rhs_ii - lhs_ii);
  }

  const double worst = std::min(worst_slack_i, worst_slack_ii);
  BoundReport r = make_report("smoothness_residuals", -worst, 0.0);
  r.note = "negated worst slack over " + std::to_string(samples) +
           " random states (smoothness and almost-convexity)";
  r.terms = {{"worst_slack_smoothness", worst_slack_i},
             {"worst_slack_almost_convexity", worst_slack_ii}};
  r.inputs = {{"samples", static_cast<double>(samples)},
              {"seed", static_cast<double>(seed)}};
  return r;
}

std::string render_table(std::span<const BoundReport> reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-32s %14s %14s %14s  %s\n", "bound", "lhs", "rhs",
                "slack", "verdict");
  out << line;
  for (const auto& r : reports) {
    const char* verdict = !r.comparable          ? "SKIP"
                          : !r.precondition_ok   ? "PRECOND"
                          : r.holds && r.advisory ? "INFO"
                          : r.holds              ? "PASS"
                          : r.advisory           ? "INFO"
                                                 : "FAIL";
    std::snprintf(line, sizeof(line), "%-32s %14.6e %14.6e %14.6e  %s\n",
                  r.bound_id.c_str(), r.lhs, r.rhs, r.slack, verdict);
    out << line;
  }
  return out.str();
}

std::string reports_to_json_string(std::span<const BoundReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j;
    j["bound_id"] = r.bound_id;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["slack"] = r.slack;
    j["holds"] = r.holds;
    j["precondition_ok"] = r.precondition_ok;
    j["comparable"] = r.comparable;
    j["advisory"] = r.advisory;
    if (!r.note.empty()) j["note"] = r.note;
    j["inputs"] = r.inputs;
    if (!r.terms.empty()) j["terms"] = r.terms;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace ntklab
