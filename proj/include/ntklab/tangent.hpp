#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ntklab/dataset.hpp"
#include "ntklab/model.hpp"

namespace ntklab {

struct GramMatrix {
  enum class Kind { NtkMc, Empirical, Generic };
  Matrix h;  // n x n, symmetrized as (H + H^T)/2 after assembly
  Kind kind = Kind::Generic;
  std::size_t mc_samples = 0;
  std::uint64_t mc_seed = 0;
  bool scaled = false;    // empirical Gram multiplied by m^(2 beta - 1)
  Matrix entry_stderr;    // per-entry Monte-Carlo standard error (MC kind only)
};

struct McEstimate {
  double value;
  double stderr;
};

// Monte-Carlo tangent kernel: (1/S) sum_s sigma'(th_s.x) sigma'(th_s.x') x.x'
// with th_s drawn from dist; deterministic given the seed. The stream matches
// init_symmetric row order, so a width-m symmetric init shares its first m/2
// rows with the S = m/2 sample stream at the same seed.
double ntk_mc(std::span<const double> x, std::span<const double> xp,
              const InitDistribution& dist, const ActivationSpec& activation,
              std::size_t samples, std::uint64_t seed);
McEstimate ntk_mc_with_err(std::span<const double> x, std::span<const double> xp,
                           const InitDistribution& dist,
                           const ActivationSpec& activation, std::size_t samples,
                           std::uint64_t seed);

// Finite-width kernel grad_f(x) . grad_f(x').
double empirical_ntk(const NetParams& params, std::span<const double> x,
                     std::span<const double> xp);

// Pairwise kernel values of an arbitrary kernel closure.
GramMatrix gram(const Dataset& data,
                const std::function<double(std::span<const double>, std::span<const double>)>& kernel);

// MC Gram with one shared theta stream across all pairs (common random
// numbers keep the matrix PSD up to rank effects). Optionally records the
// per-entry standard error.
GramMatrix gram_ntk_mc(const Dataset& data, const InitDistribution& dist,
                       const ActivationSpec& activation, std::size_t samples,
                       std::uint64_t seed, bool with_stderr = false);

GramMatrix gram_empirical(const NetParams& params, const Dataset& data, bool scaled);

double min_eigenvalue(const GramMatrix& g);

// min over the label cone {(alpha_i y_i): alpha_i >= 0} of xi^T H xi / ||xi||^2,
// sampled with Exponential(1) alphas plus the n deterministic axis rays.
double cone_positivity_ratio(const GramMatrix& g, std::span<const double> y,
                             std::size_t trials, std::uint64_t seed);

struct ConeProbe {
  double ratio;
  std::vector<double> xi;  // argmin direction
};
ConeProbe cone_positivity_detail(const GramMatrix& g, std::span<const double> y,
                                 std::size_t trials, std::uint64_t seed);

// Witness map built from the Gram inverse: v(theta) is guaranteed to stay in
// the unit ball and achieves tangent margin lambda0/(n K1) on the dataset.
class TangentWitness {
 public:
  TangentWitness(const Dataset& data, const ActivationSpec& activation,
                 std::vector<double> weights, double lambda0, double k1);

  std::vector<double> eval(std::span<const double> theta) const;
  double lambda0() const { return lambda0_; }
  double guaranteed_margin() const { return prefactor_; }

  // min_i y_i <dsigma(theta.x_i), v(theta)> averaged over the given probes
  double achieved_margin(const Matrix& theta_probes) const;
  double max_probed_norm(const Matrix& theta_probes) const;

 private:
  Dataset data_;
  ActivationSpec activation_;
  std::vector<double> w_;
  double lambda0_;
  double prefactor_;  // lambda0 / (n K1)
};

TangentWitness witness_from_gram(const GramMatrix& g, const Dataset& data,
                                 const ActivationSpec& activation, double k1);

// Row-major, no header.
void save_gram_csv(const GramMatrix& g, const std::string& path);

}  // namespace ntklab
