#pragma once

#include <cstdint>
#include <vector>

#include "ntklab/dataset.hpp"
#include "ntklab/model.hpp"

namespace ntklab {

enum class TeacherKind { LinearBias, TwoLayerTangent };

// Labeling function used to synthesize separable datasets. Points with
// |score| < margin_floor are rejected, so the generated set carries a known
// teacher margin. With bias_coord, a constant coordinate s is appended and
// the whole vector rescaled into the unit ball.
struct TeacherSpec {
  TeacherKind kind = TeacherKind::LinearBias;
  std::vector<double> w;  // linear direction over the final features; empty = e_0
  int width = 64;         // tangent teacher hidden units
  std::uint64_t teacher_seed = 0;
  ActivationSpec activation = ActivationSpec::parse("tanh");
  InitDistribution theta_dist = InitDistribution::gaussian(1.0);
  double margin_floor = 0.0;
  bool bias_coord = false;
  double s = 0.1;
};

struct GenReport {
  Dataset data;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double acceptance_rate = 1.0;
};

// Draws x uniformly in the unit ball, labels by the teacher sign, rejects
// below the margin floor. Deterministic given the seed; fails loudly when the
// 100n rejection budget runs out.
GenReport generate(const TeacherSpec& spec, std::size_t n, std::size_t d,
                   std::uint64_t seed);

}  // namespace ntklab
