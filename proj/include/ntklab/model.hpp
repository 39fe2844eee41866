#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ntklab/activation.hpp"
#include "ntklab/dataset.hpp"
#include "ntklab/matrix.hpp"
#include "ntklab/rng.hpp"

namespace ntklab {

// Input-layer initialization distribution with sub-Gaussian tail parameters
// P[||theta|| >= t] <= A exp(-b t^2); (A, b) depend on the dimension.
struct InitDistribution {
  enum class Kind { Gaussian, UniformBall };
  Kind kind = Kind::Gaussian;
  double scale = 1.0;  // per-coordinate stddev, or ball radius

  static InitDistribution gaussian(double scale = 1.0);
  static InitDistribution uniform_ball(double radius);

  void sample_row(Rng& rng, std::span<double> out) const;

  // (A, b) valid for every t >= 0 in dimension d.
  std::pair<double, double> tail_params(std::size_t d) const;
};

// Two-layer network state: theta (m x d), fixed output signs a_r, output
// scale 1/m^beta, and the activation.
struct NetParams {
  Matrix theta;
  std::vector<double> signs;
  double beta = 0.0;
  ActivationSpec activation;

  std::size_t width() const { return theta.rows(); }
  std::size_t dim() const { return theta.cols(); }
  double output_scale() const;  // 1 / m^beta
};

// Paired-sign initialization: theta_r = theta_{r+m/2}, first half +1 signs.
// Deterministic given (m, d, dist, seed); rejects odd m.
NetParams init_symmetric(std::size_t m, std::size_t d, const InitDistribution& dist,
                         const ActivationSpec& activation, std::uint64_t seed);

// f(x) = (1/m^beta) sum_r a_r sigma(theta_r . x)
double forward(const NetParams& params, std::span<const double> x);

// All f(x_i) in one parallel pass; entry i matches forward() bit-for-bit.
std::vector<double> forward_all(const NetParams& params, const Dataset& data);

// Row r = (a_r / m^beta) sigma'(theta_r . x) x
Matrix param_gradient_f(const NetParams& params, std::span<const double> x);

// (1/n) sum_i log(1 + exp(-y_i f(x_i))), overflow-safe
double empirical_loss(const NetParams& params, const Dataset& data);
double loss_from_scores(std::span<const double> scores, std::span<const double> y);

// (1/n) sum_i dl/dz(f(x_i), y_i) * grad_theta f(x_i)
Matrix loss_gradient(const NetParams& params, const Dataset& data);
Matrix loss_gradient_from_scores(const NetParams& params, const Dataset& data,
                                 std::span<const double> scores);

// Entry i = dl/dz(f(x_i), y_i) = -y_i / (1 + exp(y_i f(x_i)))
std::vector<double> functional_gradient(const NetParams& params, const Dataset& data);

// (1/n) sum_i |dl/dz(f(x_i), y_i)|
double functional_gradient_l1(const NetParams& params, const Dataset& data);
double functional_gradient_l1_from_scores(std::span<const double> scores,
                                          std::span<const double> y);

// Fraction of examples with y_i f(x_i) <= gamma; ties count.
double margin_fraction(const NetParams& params, const Dataset& data, double gamma);
double margin_fraction_from_scores(std::span<const double> scores,
                                   std::span<const double> y, double gamma);

// ||theta - theta0||_2 and the (2,1) norm sum_r ||theta_r - theta0_r||_2
double param_distance(const NetParams& a, const NetParams& b);
double param_distance_21(const NetParams& a, const NetParams& b);

}  // namespace ntklab
