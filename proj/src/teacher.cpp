#include "ntklab/teacher.hpp"

#include <cmath>
#include <stdexcept>

namespace ntklab {

namespace {

struct TangentTeacher {
  Matrix thetas;
  std::vector<double> out_w;
};

TangentTeacher build_tangent_teacher(const TeacherSpec& spec, std::size_t d_final) {
  if (spec.width < 1) throw std::invalid_argument("tangent teacher width must be >= 1");
  TangentTeacher t;
  t.thetas = Matrix(static_cast<std::size_t>(spec.width), d_final);
  t.out_w.resize(static_cast<std::size_t>(spec.width));
  Rng rng(spec.teacher_seed);
  for (std::size_t k = 0; k < t.thetas.rows(); ++k) {
    spec.theta_dist.sample_row(rng, t.thetas.row(k));
  }
  for (double& w : t.out_w) w = rng.normal();
  return t;
}

}  // namespace

GenReport generate(const TeacherSpec& spec, std::size_t n, std::size_t d,
                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
  if (d < 1) throw std::invalid_argument("generate: d must be >= 1");
  if (spec.margin_floor < 0.0) throw std::invalid_argument("generate: margin floor < 0");
  if (spec.bias_coord && !(spec.s > 0.0)) {
    throw std::invalid_argument("generate: bias constant s must be positive");
  }

  const std::size_t d_final = d + (spec.bias_coord ? 1 : 0);
  const double rescale = spec.bias_coord ? 1.0 / std::sqrt(1.0 + spec.s * spec.s) : 1.0;

  std::vector<double> w = spec.w;
  if (spec.kind == TeacherKind::LinearBias) {
    if (w.empty()) {
      w.assign(d_final, 0.0);
      w[0] = 1.0;
    }
    if (w.size() != d_final) {
      throw std::invalid_argument("generate: teacher w has dimension " +
                                  std::to_string(w.size()) + ", expected " +
                                  std::to_string(d_final));
    }
  }
  TangentTeacher tangent;
  if (spec.kind == TeacherKind::TwoLayerTangent) {
    tangent = build_tangent_teacher(spec, d_final);
  }

  auto score = [&](std::span<const double> x) {
    switch (spec.kind) {
      case TeacherKind::LinearBias:
        return dot(w, x);
      case TeacherKind::TwoLayerTangent: {
        double acc = 0.0;
        for (std::size_t k = 0; k < tangent.thetas.rows(); ++k) {
          acc += tangent.out_w[k] *
                 act_eval(spec.activation, dot(tangent.thetas.row(k), x)).d1;
        }
        return acc / static_cast<double>(tangent.thetas.rows());
      }
    }
    return 0.0;
  };

  const InitDistribution ball = InitDistribution::uniform_ball(1.0);
  Rng rng(seed);
  GenReport report;
  report.data.x = Matrix(n, d_final);
  report.data.y.resize(n);

  const std::size_t budget = 100 * n;
  std::size_t draws = 0;
  std::size_t accepted = 0;
  std::vector<double> x(d_final);
  while (accepted < n) {
    if (draws >= budget) {
      throw std::runtime_error(
          "generate: rejection budget of " + std::to_string(budget) +
          " draws exhausted after accepting " + std::to_string(accepted) +
          " examples; margin_floor " + std::to_string(spec.margin_floor) +
          " is too large for this teacher");
    }
    ++draws;
    ball.sample_row(rng, std::span<double>(x.data(), d));
    if (spec.bias_coord) x[d] = spec.s;
    for (double& e : x) e *= rescale;

    const double sc = score(x);
    if (std::abs(sc) < spec.margin_floor || sc == 0.0) continue;

    for (std::size_t j = 0; j < d_final; ++j) report.data.x(accepted, j) = x[j];
    report.data.y[accepted] = sc > 0.0 ? 1.0 : -1.0;
    (sc > 0.0 ? report.n_pos : report.n_neg) += 1;
    ++accepted;
  }
  report.acceptance_rate = static_cast<double>(n) / static_cast<double>(draws);
  report.data.validate();
  return report;
}

}  // namespace ntklab
