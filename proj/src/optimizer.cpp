#include "ntklab/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ntklab/parallel.hpp"

namespace ntklab {

namespace {

double frob_sq(const Matrix& a) {
  const auto flat = a.data();
  return blocked_sum(flat.size(), [&](std::size_t k) { return flat[k] * flat[k]; });
}

}  // namespace

TrajectoryLog gd_run_capture(const NetParams& params0, const Dataset& train,
                             const GDConfig& cfg, const Dataset* heldout,
                             NetParams& final_params) {
  if (cfg.log_every == 0) throw std::invalid_argument("gd_run: log_every must be >= 1");
  if (!(cfg.eta >= 0.0) || !std::isfinite(cfg.eta)) {
    throw std::invalid_argument("gd_run: eta must be finite and >= 0");
  }

  NetParams params = params0;
  TrajectoryLog log;
  log.gamma_list = cfg.gamma_list;
  const double divergence_cap = cfg.divergence_factor * std::log(2.0);
  TrajectoryRow last_finite;
  bool have_last = false;

  for (std::size_t t = 0;; ++t) {
    const auto scores = forward_all(params, train);
    const double loss = loss_from_scores(scores, train.y);

    if (!std::isfinite(loss) || loss > divergence_cap) {
      if (std::isfinite(loss)) {
        log.diverged = true;
        log.abort_note = "loss " + std::to_string(loss) +
                         " exceeded the divergence guard " +
                         std::to_string(divergence_cap) + " at step " + std::to_string(t);
      } else {
        log.aborted_nonfinite = true;
        log.abort_note = "non-finite loss at step " + std::to_string(t) +
                         "; log holds the last finite state";
      }
      if (have_last && (log.rows.empty() || log.rows.back().t != last_finite.t)) {
        log.rows.push_back(last_finite);
      }
      break;
    }

    const Matrix grad = loss_gradient_from_scores(params, train, scores);
    const double grad_sq = frob_sq(grad);
    const double grad_l1 = functional_gradient_l1_from_scores(scores, train.y);

    TrajectoryRow row;
    row.t = t;
    row.loss = loss;
    row.grad_param_sq = grad_sq;
    row.grad_l1 = grad_l1;
    row.dist_init = param_distance(params, params0);
    row.dist_init_21 = param_distance_21(params, params0);
    row.train_err = margin_fraction_from_scores(scores, train.y, 0.0);
    for (double gamma : cfg.gamma_list) {
      row.margin_frac.push_back(margin_fraction_from_scores(scores, train.y, gamma));
    }

    const bool log_now = (t == cfg.T) || (t % cfg.log_every == 0);
    if (log_now) {
      if (heldout != nullptr) {
        const auto test_scores = forward_all(params, *heldout);
        row.test_err = margin_fraction_from_scores(test_scores, heldout->y, 0.0);
      }
      log.rows.push_back(row);
    }
    last_finite = std::move(row);
    have_last = true;

    if (t == cfg.T) break;

    log.sum_loss += loss;
    log.sum_grad_l1_sq += grad_l1 * grad_l1;
    log.sum_grad_param_sq += grad_sq;

    const auto gflat = grad.data();
    auto tflat = params.theta.data();
    const double eta = cfg.eta;
    parallel_for(tflat.size(), [&](std::size_t k) { tflat[k] -= eta * gflat[k]; });
    log.steps_completed = t + 1;
  }

  log.final_dist_init = param_distance(params, params0);
  log.final_dist_init_21 = param_distance_21(params, params0);
  final_params = std::move(params);
  return log;
}

TrajectoryLog gd_run(const NetParams& params0, const Dataset& train, const GDConfig& cfg,
                     const Dataset* heldout) {
  NetParams sink;
  return gd_run_capture(params0, train, cfg, heldout, sink);
}

DescentBudget descent_budget(std::size_t m, double beta, double rho, double k1,
                               double k2) {
  if (!(rho > 0.0)) throw std::invalid_argument("descent_budget: rho must be > 0");
  DescentBudget budget;
  const double md = static_cast<double>(m);
  budget.eta_max =
      std::min(std::pow(md, beta), 4.0 * std::pow(md, 2.0 * beta - 1.0) / (k1 * k1 + k2));
  if (k2 <= 0.0) {
    budget.t_unbounded = true;
    return budget;
  }
  const double t_raw =
      md * rho * rho / (32.0 * budget.eta_max * k2 * k2 * std::log(2.0));
  budget.t_max = static_cast<std::size_t>(std::floor(t_raw));
  return budget;
}

ScheduleSetting rate_schedule(ScheduleVariant variant, double epsilon, double rho,
                                   double beta, const ScheduleMultipliers& c) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("rate_schedule: epsilon must be in (0, 1)");
  }
  if (!(rho > 0.0)) throw std::invalid_argument("rate_schedule: rho must be > 0");

  auto even_ceil = [](double v) {
    auto k = static_cast<std::size_t>(std::ceil(v));
    if (k < 2) k = 2;
    if (k % 2 != 0) ++k;
    return k;
  };
  auto count_ceil = [](double v) {
    auto k = static_cast<std::size_t>(std::ceil(v));
    return k < 1 ? std::size_t{1} : k;
  };

  ScheduleSetting s;
  const double log_inv_eps = std::log(1.0 / epsilon);
  switch (variant) {
    case ScheduleVariant::L1Rate: {
      if (!(beta >= 0.0 && beta < 1.0)) {
        throw std::invalid_argument("rate_schedule: beta must be in [0, 1)");
      }
      s.m = even_ceil(c.c_m * std::pow(rho * epsilon, -1.0 / (1.0 - beta)));
      s.T = count_ceil(c.c_t / (rho * rho * epsilon * epsilon));
      s.eta = c.c_eta * std::pow(static_cast<double>(s.m), 2.0 * beta - 1.0);
      s.n = count_ceil(c.c_n / (rho * rho * std::pow(epsilon, 4.0)));
      return s;
    }
    case ScheduleVariant::LossRate: {
      // beta is pinned to 0 in this regime
      s.m = even_ceil(c.c_m / (rho * rho) * std::pow(epsilon, -1.5) * log_inv_eps);
      s.T = count_ceil(c.c_t / (rho * rho * epsilon) * log_inv_eps * log_inv_eps);
      s.eta = c.c_eta / static_cast<double>(s.m);
      s.n = count_ceil(c.c_n / (epsilon * epsilon));
      return s;
    }
  }
  throw std::invalid_argument("rate_schedule: unknown variant");
}

NetParams build_reference_point(const NetParams& params0, const MarginCertificate& cert,
                                double alpha) {
  if (cert.v.rows() != params0.width() || cert.v.cols() != params0.dim()) {
    throw std::invalid_argument(
        "build_reference_point: certificate width/dim does not match the network");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("build_reference_point: alpha < 0");
  NetParams ref = params0;
  parallel_for(ref.width(), [&](std::size_t r) {
    auto row = ref.theta.row(r);
    axpy(alpha * params0.signs[r], cert.v.row(r), row);
  });
  return ref;
}

void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
  std::fprintf(out, "t,loss,grad_param_sq,grad_l1,dist_init,dist_init_21,train_err");
  for (double gamma : log.gamma_list) std::fprintf(out, ",margin_frac_%.17g", gamma);
  std::fprintf(out, ",test_err\n");
  for (const auto& row : log.rows) {
    std::fprintf(out, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", row.t, row.loss,
                 row.grad_param_sq, row.grad_l1, row.dist_init, row.dist_init_21,
                 row.train_err);
    for (double mf : row.margin_frac) std::fprintf(out, ",%.17g", mf);
    if (row.test_err.has_value()) {
      std::fprintf(out, ",%.17g\n", *row.test_err);
    } else {
      std::fprintf(out, ",\n");
    }
  }
  std::fclose(out);
}

}  // namespace ntklab
