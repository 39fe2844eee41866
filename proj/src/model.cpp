#include "ntklab/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ntklab/parallel.hpp"

namespace ntklab {

InitDistribution InitDistribution::gaussian(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("gaussian scale must be positive");
  return {Kind::Gaussian, scale};
}

InitDistribution InitDistribution::uniform_ball(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  return {Kind::UniformBall, radius};
}

void InitDistribution::sample_row(Rng& rng, std::span<double> out) const {
  const std::size_t d = out.size();
  switch (kind) {
    case Kind::Gaussian:
      for (std::size_t j = 0; j < d; ++j) out[j] = scale * rng.normal();
      return;
    case Kind::UniformBall: {
      // direction from a normalized gaussian, radius from u^(1/d)
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        out[j] = rng.normal();
        sq += out[j] * out[j];
      }
      const double r =
          scale * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
      const double nrm = std::sqrt(sq);
      const double f = nrm > 0.0 ? r / nrm : 0.0;
      for (std::size_t j = 0; j < d; ++j) out[j] *= f;
      return;
    }
  }
}

std::pair<double, double> InitDistribution::tail_params(std::size_t d) const {
  switch (kind) {
    case Kind::Gaussian:
      // Chernoff on the chi-square MGF: A = 2 works for all t iff
      // b <= 1 / (2 d scale^2).
      return {2.0, 1.0 / (2.0 * static_cast<double>(d) * scale * scale)};
    case Kind::UniformBall:
      // P = 0 beyond the radius; need 2 exp(-b t^2) >= 1 for t <= R.
      return {2.0, std::log(2.0) / (scale * scale)};
  }
  throw std::invalid_argument("unknown init distribution");
}

double NetParams::output_scale() const {
  return std::pow(static_cast<double>(width()), -beta);
}

NetParams init_symmetric(std::size_t m, std::size_t d, const InitDistribution& dist,
                         const ActivationSpec& activation, std::uint64_t seed) {
  if (m < 2 || m % 2 != 0) {
    throw std::invalid_argument("width m must be even and >= 2, got " +
                                std::to_string(m));
  }
  NetParams p;
  p.theta = Matrix(m, d);
  p.signs.assign(m, 1.0);
  p.activation = activation;
  Rng rng(seed);
  const std::size_t half = m / 2;
  for (std::size_t r = 0; r < half; ++r) dist.sample_row(rng, p.theta.row(r));
  for (std::size_t r = 0; r < half; ++r) {
    auto src = p.theta.row(r);
    auto dst = p.theta.row(r + half);
    for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
    p.signs[r + half] = -1.0;
  }
  return p;
}

namespace {

void check_dim(const NetParams& params, std::span<const double> x) {
  if (x.size() != params.dim()) {
    throw std::invalid_argument("input dimension " + std::to_string(x.size()) +
                                " does not match network dimension " +
                                std::to_string(params.dim()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite network input");
  }
}

}  // namespace

namespace {

// Positive- and negative-sign neurons accumulate as two separate streams and
// are subtracted once at the end. Under the paired initialization both streams
// see identical values in identical order, so f(x) is exactly zero there.
struct SignSplit {
  std::vector<std::size_t> pos, neg;
};

SignSplit split_signs(const std::vector<double>& signs) {
  SignSplit s;
  s.pos.reserve(signs.size());
  for (std::size_t r = 0; r < signs.size(); ++r) {
    (signs[r] > 0.0 ? s.pos : s.neg).push_back(r);
  }
  return s;
}

}  // namespace

double forward(const NetParams& params, std::span<const double> x) {
  check_dim(params, x);
  const SignSplit groups = split_signs(params.signs);
  auto value_at = [&](std::size_t r) {
    return act_eval(params.activation, dot(params.theta.row(r), x)).value;
  };
  const double sum_pos =
      blocked_sum(groups.pos.size(), [&](std::size_t k) { return value_at(groups.pos[k]); });
  const double sum_neg =
      blocked_sum(groups.neg.size(), [&](std::size_t k) { return value_at(groups.neg[k]); });
  return params.output_scale() * (sum_pos - sum_neg);
}

std::vector<double> forward_all(const NetParams& params, const Dataset& data) {
  if (data.dim() != params.dim()) {
    throw std::invalid_argument("dataset dimension does not match network dimension");
  }
  std::vector<double> scores(data.n());
  const double scale = params.output_scale();
  const SignSplit groups = split_signs(params.signs);
  parallel_for(data.n(), [&](std::size_t i) {
    const auto x = data.x.row(i);
    auto value_at = [&](std::size_t r) {
      return act_eval(params.activation, dot(params.theta.row(r), x)).value;
    };
    const double sum_pos = blocked_sum_serial(
        groups.pos.size(), [&](std::size_t k) { return value_at(groups.pos[k]); });
    const double sum_neg = blocked_sum_serial(
        groups.neg.size(), [&](std::size_t k) { return value_at(groups.neg[k]); });
    scores[i] = scale * (sum_pos - sum_neg);
  });
  return scores;
}

Matrix param_gradient_f(const NetParams& params, std::span<const double> x) {
  check_dim(params, x);
  Matrix grad(params.width(), params.dim());
  const double scale = params.output_scale();
  parallel_for(params.width(), [&](std::size_t r) {
    const double s = params.signs[r] * scale *
                     act_eval(params.activation, dot(params.theta.row(r), x)).d1;
    auto out = grad.row(r);
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = s * x[j];
  });
  return grad;
}

double loss_from_scores(std::span<const double> scores, std::span<const double> y) {
  const std::size_t n = y.size();
  return blocked_sum(n, [&](std::size_t i) {
    return logistic_loss_of_margin(y[i] * scores[i]);
  }) / static_cast<double>(n);
}

double empirical_loss(const NetParams& params, const Dataset& data) {
  return loss_from_scores(forward_all(params, data), data.y);
}

std::vector<double> functional_gradient(const NetParams& params, const Dataset& data) {
  const auto scores = forward_all(params, data);
  std::vector<double> g(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    g[i] = -data.y[i] * stable_sigmoid(-data.y[i] * scores[i]);
  }
  return g;
}

double functional_gradient_l1_from_scores(std::span<const double> scores,
                                          std::span<const double> y) {
  const std::size_t n = y.size();
  return blocked_sum(n, [&](std::size_t i) {
    return stable_sigmoid(-y[i] * scores[i]);
  }) / static_cast<double>(n);
}

double functional_gradient_l1(const NetParams& params, const Dataset& data) {
  return functional_gradient_l1_from_scores(forward_all(params, data), data.y);
}

Matrix loss_gradient_from_scores(const NetParams& params, const Dataset& data,
                                 std::span<const double> scores) {
  const std::size_t n = data.n();
  const std::size_t d = params.dim();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = -data.y[i] * stable_sigmoid(-data.y[i] * scores[i]);
  }
  Matrix grad(params.width(), d);
  const double scale = params.output_scale();
  parallel_for(params.width(), [&](std::size_t r) {
    const auto theta_r = params.theta.row(r);
    auto out = grad.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double w =
          g[i] * act_eval(params.activation, dot(theta_r, data.x.row(i))).d1;
      axpy(w, data.x.row(i), out);
    }
    const double f = params.signs[r] * scale / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) out[j] *= f;
  });
  return grad;
}

Matrix loss_gradient(const NetParams& params, const Dataset& data) {
  return loss_gradient_from_scores(params, data, forward_all(params, data));
}

double margin_fraction_from_scores(std::span<const double> scores,
                                   std::span<const double> y, double gamma) {
  const std::size_t n = y.size();
  const double count = blocked_sum(n, [&](std::size_t i) {
    return y[i] * scores[i] <= gamma ? 1.0 : 0.0;
  });
  return count / static_cast<double>(n);
}

double margin_fraction(const NetParams& params, const Dataset& data, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  return margin_fraction_from_scores(forward_all(params, data), data.y, gamma);
}

double param_distance(const NetParams& a, const NetParams& b) {
  const auto da = a.theta.data();
  const auto db = b.theta.data();
  const double sq = blocked_sum(da.size(), [&](std::size_t k) {
    const double diff = da[k] - db[k];
    return diff * diff;
  });
  return std::sqrt(sq);
}

double param_distance_21(const NetParams& a, const NetParams& b) {
  return blocked_sum(a.width(), [&](std::size_t r) {
    double sq = 0.0;
    const auto ra = a.theta.row(r);
    const auto rb = b.theta.row(r);
    for (std::size_t j = 0; j < ra.size(); ++j) {
      const double diff = ra[j] - rb[j];
      sq += diff * diff;
    }
    return std::sqrt(sq);
  });
}

}  // namespace ntklab
