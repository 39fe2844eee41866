#pragma once

#include <span>
#include <vector>

#include "ntklab/dataset.hpp"
#include "ntklab/model.hpp"

namespace ntklab::ref {

// Plain single-threaded loops, left-to-right accumulation. Kept as the
// reference the parallel kernels are tested and benchmarked against.

double forward(const NetParams& params, std::span<const double> x);
std::vector<double> forward_all(const NetParams& params, const Dataset& data);
double empirical_loss(const NetParams& params, const Dataset& data);
Matrix loss_gradient(const NetParams& params, const Dataset& data);
double functional_gradient_l1(const NetParams& params, const Dataset& data);

// Pairwise-loop Monte-Carlo tangent-kernel Gram matrix, same sample stream
// semantics as the production kernel (one shared theta stream for all pairs).
Matrix gram_ntk_mc(const Dataset& data, const InitDistribution& dist,
                   const ActivationSpec& activation, std::size_t samples,
                   std::uint64_t seed);

}  // namespace ntklab::ref
