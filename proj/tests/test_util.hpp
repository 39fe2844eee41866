#pragma once

#include "ntklab/dataset.hpp"
#include "ntklab/model.hpp"
#include "ntklab/rng.hpp"

namespace testutil {

inline ntklab::Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  ntklab::Rng rng(seed);
  const auto ball = ntklab::InitDistribution::uniform_ball(1.0);
  ntklab::Dataset data;
  data.x = ntklab::Matrix(n, d);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ball.sample_row(rng, data.x.row(i));
    data.y[i] = rng.uniform01() < 0.5 ? 1.0 : -1.0;
  }
  return data;
}

// unconstrained random parameter state (not symmetric)
inline ntklab::NetParams random_params(std::size_t m, std::size_t d, double beta,
                                       const ntklab::ActivationSpec& act,
                                       std::uint64_t seed) {
  ntklab::Rng rng(seed);
  ntklab::NetParams p;
  p.beta = beta;
  p.activation = act;
  p.theta = ntklab::Matrix(m, d);
  p.signs.resize(m);
  for (auto& e : p.theta.data()) e = rng.normal();
  for (auto& s : p.signs) s = rng.uniform01() < 0.5 ? 1.0 : -1.0;
  return p;
}

}  // namespace testutil
