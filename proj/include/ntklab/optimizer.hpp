#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ntklab/dataset.hpp"
#include "ntklab/margin.hpp"
#include "ntklab/model.hpp"

namespace ntklab {

struct GDConfig {
  double eta = 0.1;
  std::size_t T = 100;
  std::uint64_t seed = 0;          // recorded in logs; the loop itself is deterministic
  std::size_t log_every = 1;
  std::vector<double> gamma_list;  // margin_fraction thresholds per logged row
  double divergence_factor = 10.0; // abort when loss > factor * log(2)
};

struct TrajectoryRow {
  std::size_t t = 0;
  double loss = 0.0;
  double grad_param_sq = 0.0;  // ||grad_theta L||_2^2
  double grad_l1 = 0.0;        // L1 functional-gradient norm
  double dist_init = 0.0;      // ||theta(t) - theta(0)||_2
  double dist_init_21 = 0.0;   // sum_r ||theta_r(t) - theta_r(0)||_2
  double train_err = 0.0;      // margin_fraction at gamma = 0
  std::vector<double> margin_frac;
  std::optional<double> test_err;
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;   // t = 0, every log_every, and t = T
  std::size_t steps_completed = 0;   // updates actually applied
  // exact running sums over t = 0 .. steps_completed-1 (all iterations, not
  // just logged ones); the bound checks consume these
  double sum_loss = 0.0;
  double sum_grad_l1_sq = 0.0;
  double sum_grad_param_sq = 0.0;
  double final_dist_init = 0.0;
  double final_dist_init_21 = 0.0;
  bool diverged = false;
  bool aborted_nonfinite = false;
  std::string abort_note;
  std::vector<double> gamma_list;
};

// Runs exactly cfg.T full-batch updates theta <- theta - eta grad L(theta);
// deterministic given inputs. A non-finite or diverging loss aborts with the
// last finite state recorded.
TrajectoryLog gd_run(const NetParams& params0, const Dataset& train, const GDConfig& cfg,
                     const Dataset* heldout = nullptr);

// Same, but also hands back the final parameters.
TrajectoryLog gd_run_capture(const NetParams& params0, const Dataset& train,
                             const GDConfig& cfg, const Dataset* heldout,
                             NetParams& final_params);

struct DescentBudget {
  double eta_max = 0.0;
  std::size_t t_max = 0;
  bool t_unbounded = false;  // K2 = 0 leaves the iteration cap unconstrained
};

// eta_max = min{m^beta, 4 m^(2beta-1) / (K1^2 + K2)},
// t_max = floor(m rho^2 / (32 eta_max K2^2 log 2)).
DescentBudget descent_budget(std::size_t m, double beta, double rho, double k1,
                             double k2);

enum class ScheduleVariant { L1Rate, LossRate };

struct ScheduleMultipliers {
  double c_m = 1.0;
  double c_t = 1.0;
  double c_eta = 1.0;
  double c_n = 1.0;
};

struct ScheduleSetting {
  std::size_t m = 0;
  std::size_t T = 0;
  double eta = 0.0;
  std::size_t n = 0;
};

ScheduleSetting rate_schedule(ScheduleVariant variant, double epsilon, double rho,
                              double beta, const ScheduleMultipliers& c = {});

// theta* = theta0 + alpha * a_r * v_r from the certificate; the stated range
// is 0 < alpha <= rho_hat / (4 K2), checked downstream rather than asserted.
NetParams build_reference_point(const NetParams& params0, const MarginCertificate& cert,
                                double alpha);

void write_trajectory_csv(const TrajectoryLog& log, const std::string& path);

}  // namespace ntklab
