#include "ntklab/reference.hpp"

#include <cmath>

namespace ntklab::ref {

double forward(const NetParams& params, std::span<const double> x) {
  const double scale = params.output_scale();
  double sum = 0.0;
  for (std::size_t r = 0; r < params.width(); ++r) {
    sum += params.signs[r] *
           act_eval(params.activation, dot(params.theta.row(r), x)).value;
  }
  return scale * sum;
}

std::vector<double> forward_all(const NetParams& params, const Dataset& data) {
  std::vector<double> scores(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) scores[i] = ref::forward(params, data.x.row(i));
  return scores;
}

double empirical_loss(const NetParams& params, const Dataset& data) {
  const auto scores = ref::forward_all(params, data);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    sum += logistic_loss_of_margin(data.y[i] * scores[i]);
  }
  return sum / static_cast<double>(data.n());
}

Matrix loss_gradient(const NetParams& params, const Dataset& data) {
  const auto scores = ref::forward_all(params, data);
  const std::size_t n = data.n();
  const std::size_t d = params.dim();
  Matrix grad(params.width(), d);
  const double scale = params.output_scale();
  for (std::size_t r = 0; r < params.width(); ++r) {
    auto out = grad.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = -data.y[i] * stable_sigmoid(-data.y[i] * scores[i]);
      const double w =
          g * act_eval(params.activation, dot(params.theta.row(r), data.x.row(i))).d1;
      axpy(w, data.x.row(i), out);
    }
    const double f = params.signs[r] * scale / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) out[j] *= f;
  }
  return grad;
}

double functional_gradient_l1(const NetParams& params, const Dataset& data) {
  const auto scores = ref::forward_all(params, data);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    sum += stable_sigmoid(-data.y[i] * scores[i]);
  }
  return sum / static_cast<double>(data.n());
}

Matrix gram_ntk_mc(const Dataset& data, const InitDistribution& dist,
                   const ActivationSpec& activation, std::size_t samples,
                   std::uint64_t seed) {
  const std::size_t n = data.n();
  const std::size_t d = data.dim();
  Matrix thetas(samples, d);
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) dist.sample_row(rng, thetas.row(s));

  Matrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < samples; ++s) {
        const double di = act_eval(activation, dot(thetas.row(s), data.x.row(i))).d1;
        const double dj = act_eval(activation, dot(thetas.row(s), data.x.row(j))).d1;
        acc += di * dj;
      }
      const double v =
          acc / static_cast<double>(samples) * dot(data.x.row(i), data.x.row(j));
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

}  // namespace ntklab::ref
