#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ntklab/optimizer.hpp"

namespace ntklab {

struct BoundReport {
  std::string bound_id;
  double lhs = 0.0;  // measured
  double rhs = 0.0;  // theoretical
  double slack = 0.0;
  bool holds = false;
  bool precondition_ok = true;   // a run outside the stated budget is flagged, not asserted
  bool comparable = true;        // false when the measurement is unavailable
  bool advisory = false;         // excluded from pass/fail verdicts
  std::string note;
  std::map<std::string, double> inputs;
  std::map<std::string, double> terms;
};

// lhs <= rhs + 1e-9 * max(1, |rhs|)
bool bound_holds(double lhs, double rhs);

enum class SmoothnessK { Quadratic, Quartic };
double smoothness_k(SmoothnessK variant, double k1, double k2);

// (1/T) sum_t grad_l1(t)^2  vs  (16 log 2 / (rho^2 T)) (m^(2beta-1)/eta + K)
BoundReport check_l1_rate(const TrajectoryLog& log, std::size_t m, double beta,
                           double eta, double rho, double k1, double k2,
                           SmoothnessK kvariant);

// (1/T) sum_t loss(t)  vs  C * (1/T + a^2 m/(eta T) + exp(-a rho m^(1-beta)/4)
//                            + (a^2/rho) sqrt(m/(eta T)) + (1/rho) sqrt(eta T/m))
BoundReport check_loss_rate(const TrajectoryLog& log, std::size_t m, double beta,
                           double eta, double rho, double alpha, double big_c,
                           double k2);

// final ||theta - theta0||_2  vs  C eps^(3/4) log^2(rho^-2 eps^-1); diagnostic,
// the implied C* is always recorded.
BoundReport check_distance_diagnostic(const TrajectoryLog& log, double epsilon, double rho,
                                 double big_c);

// kernel-smoothed alignment <grad_f L, T_k grad_f L> = ||grad_theta L||^2
// must dominate (rho^2 / (16 m^(2beta-1))) grad_l1^2 inside the (2,1) ball.
BoundReport check_kernel_positivity(const NetParams& params, const NetParams& params0,
                                   const Dataset& data, double rho);

// train_err(t) <= 2 grad_l1(t) at every logged step
BoundReport check_markov(const TrajectoryLog& log);

// the three descent-lemma consequences: monotone loss, mean gradient norm,
// and the distance cap sqrt(2 eta T log 2)
std::vector<BoundReport> check_descent_lemma(const TrajectoryLog& log, double eta,
                                              std::size_t m);

enum class GenBoundVariant { WithDim, DimFree };

struct GenBoundInputs {
  double gamma = 0.5;
  double delta = 0.05;
  std::size_t n = 0;       // training-set size
  std::size_t m = 0;
  std::size_t T = 0;
  std::size_t d = 0;
  double beta = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;    // latter case only
  double big_c = 1.0;
  double k1 = 1.0;
  double k2 = 0.0;
  double tail_a = 2.0;
  double tail_b = 1.0;
  bool latter_case = false;
};

// Assembles the three-term generalization RHS term by term and compares
// it against the best held-out error along the trajectory.
BoundReport check_generalization_rhs(const TrajectoryLog& log, GenBoundVariant variant,
                                     const GenBoundInputs& in);

// Random-state sweep of the two smoothness/almost-convexity inequalities;
// reports the worst slack seen.
BoundReport check_smoothness_residuals(std::size_t samples, std::uint64_t seed);

std::string render_table(std::span<const BoundReport> reports);
std::string reports_to_json_string(std::span<const BoundReport> reports);

}  // namespace ntklab
