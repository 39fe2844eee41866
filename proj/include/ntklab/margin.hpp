#pragma once

#include <cstdint>
#include <vector>

#include "ntklab/dataset.hpp"
#include "ntklab/model.hpp"

namespace ntklab {

// Per-neuron witness directions with the achieved finite-width margin
// rho_hat = min_i y_i (1/m) sum_r sigma'(theta_r . x_i) x_i . v_r.
struct MarginCertificate {
  Matrix v;  // m x d, ||v_r||_2 <= 1
  double rho_hat = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double v_norm_max = 0.0;

  std::string to_json_string() const;  // {rho_hat, m, iterations, converged, v_norm_max}
  void save_v_csv(const std::string& path) const;
};

// Maximizes the smoothed min-margin over the per-row unit balls by projected
// gradient ascent with a halving temperature schedule. The returned rho_hat
// is the hard minimum recomputed from v, so it lower-bounds the true optimum.
// Non-separable data yields rho_hat <= 0, not an error.
MarginCertificate estimate_margin(const NetParams& params0, const Dataset& data,
                                  std::size_t max_iters, double tol);

struct HalfMarginReport {
  std::vector<double> values;      // per-example achieved margin
  std::vector<std::uint8_t> pass;  // value >= rho / 2
  double min_value = 0.0;
  bool all_pass = false;
};

HalfMarginReport verify_half_margin(const MarginCertificate& cert,
                                    const NetParams& params0, const Dataset& data,
                                    double rho);

// ceil((16 K1^2 / rho^2) log(2n / delta)), rounded up to the next even integer.
std::size_t min_width_for_margin(double rho, double k1, std::size_t n, double delta);

}  // namespace ntklab
