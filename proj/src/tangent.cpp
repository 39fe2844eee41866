#include "ntklab/tangent.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ntklab/linalg.hpp"
#include "ntklab/parallel.hpp"

namespace ntklab {

namespace {

void check_pair(std::span<const double> x, std::span<const double> xp) {
  if (x.size() != xp.size()) {
    throw std::invalid_argument("kernel arguments have mismatched dimensions");
  }
}

Matrix sample_thetas(const InitDistribution& dist, std::size_t samples, std::size_t d,
                     std::uint64_t seed) {
  Matrix thetas(samples, d);
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) dist.sample_row(rng, thetas.row(s));
  return thetas;
}

}  // namespace

McEstimate ntk_mc_with_err(std::span<const double> x, std::span<const double> xp,
                           const InitDistribution& dist,
                           const ActivationSpec& activation, std::size_t samples,
                           std::uint64_t seed) {
  check_pair(x, xp);
  if (samples < 1) throw std::invalid_argument("ntk_mc needs samples >= 1");
  const Matrix thetas = sample_thetas(dist, samples, x.size(), seed);
  const double xdot = dot(x, xp);

  const double sum = blocked_sum(samples, [&](std::size_t s) {
    const auto th = thetas.row(s);
    return act_eval(activation, dot(th, x)).d1 * act_eval(activation, dot(th, xp)).d1;
  });
  const double sum_sq = blocked_sum(samples, [&](std::size_t s) {
    const auto th = thetas.row(s);
    const double t =
        act_eval(activation, dot(th, x)).d1 * act_eval(activation, dot(th, xp)).d1;
    return t * t;
  });
  const double mean = sum / static_cast<double>(samples);
  const double var = std::max(0.0, sum_sq / static_cast<double>(samples) - mean * mean);
  return {mean * xdot,
          std::abs(xdot) * std::sqrt(var / static_cast<double>(samples))};
}

double ntk_mc(std::span<const double> x, std::span<const double> xp,
              const InitDistribution& dist, const ActivationSpec& activation,
              std::size_t samples, std::uint64_t seed) {
  return ntk_mc_with_err(x, xp, dist, activation, samples, seed).value;
}

double empirical_ntk(const NetParams& params, std::span<const double> x,
                     std::span<const double> xp) {
  check_pair(x, xp);
  const double scale = params.output_scale();
  const double sum = blocked_sum(params.width(), [&](std::size_t r) {
    const auto th = params.theta.row(r);
    return act_eval(params.activation, dot(th, x)).d1 *
           act_eval(params.activation, dot(th, xp)).d1;
  });
  return scale * scale * sum * dot(x, xp);
}

namespace {

void symmetrize(Matrix& h) {
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t j = i + 1; j < h.cols(); ++j) {
      const double v = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = v;
      h(j, i) = v;
    }
  }
}

}  // namespace

GramMatrix gram(const Dataset& data,
                const std::function<double(std::span<const double>, std::span<const double>)>& kernel) {
  const std::size_t n = data.n();
  if (n < 1) throw std::invalid_argument("gram needs n >= 1");
  GramMatrix g;
  g.h = Matrix(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      g.h(i, j) = kernel(data.x.row(i), data.x.row(j));
    }
  });
  symmetrize(g.h);
  return g;
}

GramMatrix gram_ntk_mc(const Dataset& data, const InitDistribution& dist,
                       const ActivationSpec& activation, std::size_t samples,
                       std::uint64_t seed, bool with_stderr) {
  const std::size_t n = data.n();
  if (n < 1) throw std::invalid_argument("gram needs n >= 1");
  if (samples < 1) throw std::invalid_argument("gram_ntk_mc needs samples >= 1");
  const std::size_t d = data.dim();
  const Matrix thetas = sample_thetas(dist, samples, d, seed);

  // Accumulate sum_s b_s b_s^T (and squares) over fixed sample blocks; block
  // partials combine in index order so the result is thread-count independent.
  const std::size_t tri = n * (n + 1) / 2;
  const std::size_t nb = (samples + kSumBlock - 1) / kSumBlock;
  std::vector<std::vector<double>> part(nb), part_sq(with_stderr ? nb : 0);
  parallel_for(nb, [&](std::size_t b) {
    const std::size_t lo = b * kSumBlock;
    const std::size_t hi = std::min(samples, lo + kSumBlock);
    std::vector<double> acc(tri, 0.0), acc_sq(with_stderr ? tri : 0, 0.0);
    std::vector<double> bs(n);
    for (std::size_t s = lo; s < hi; ++s) {
      const auto th = thetas.row(s);
      for (std::size_t i = 0; i < n; ++i) {
        bs[i] = act_eval(activation, dot(th, data.x.row(i))).d1;
      }
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j, ++k) {
          const double t = bs[i] * bs[j];
          acc[k] += t;
          if (with_stderr) acc_sq[k] += t * t;
        }
      }
    }
    part[b] = std::move(acc);
    if (with_stderr) part_sq[b] = std::move(acc_sq);
  });

  std::vector<double> sum(tri, 0.0), sum_sq(with_stderr ? tri : 0, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < tri; ++k) sum[k] += part[b][k];
    if (with_stderr) {
      for (std::size_t k = 0; k < tri; ++k) sum_sq[k] += part_sq[b][k];
    }
  }

  GramMatrix g;
  g.kind = GramMatrix::Kind::NtkMc;
  g.mc_samples = samples;
  g.mc_seed = seed;
  g.h = Matrix(n, n);
  if (with_stderr) g.entry_stderr = Matrix(n, n);
  const double inv_s = 1.0 / static_cast<double>(samples);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++k) {
      const double xdot = dot(data.x.row(i), data.x.row(j));
      const double mean = sum[k] * inv_s;
      g.h(i, j) = mean * xdot;
      g.h(j, i) = g.h(i, j);
      if (with_stderr) {
        const double var = std::max(0.0, sum_sq[k] * inv_s - mean * mean);
        const double se = std::abs(xdot) * std::sqrt(var * inv_s);
        g.entry_stderr(i, j) = se;
        g.entry_stderr(j, i) = se;
      }
    }
  }
  symmetrize(g.h);
  return g;
}

GramMatrix gram_empirical(const NetParams& params, const Dataset& data, bool scaled) {
  const std::size_t n = data.n();
  if (n < 1) throw std::invalid_argument("gram needs n >= 1");
  GramMatrix g;
  g.kind = GramMatrix::Kind::Empirical;
  g.scaled = scaled;
  g.h = Matrix(n, n);
  const double factor =
      scaled ? std::pow(static_cast<double>(params.width()), 2.0 * params.beta - 1.0)
             : 1.0;
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      g.h(i, j) = factor * empirical_ntk(params, data.x.row(i), data.x.row(j));
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) g.h(i, j) = g.h(j, i);
  }
  symmetrize(g.h);
  return g;
}

double min_eigenvalue(const GramMatrix& g) {
  for (double v : g.h.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("gram has non-finite entries");
  }
  return sym_min_eigenvalue(g.h);
}

ConeProbe cone_positivity_detail(const GramMatrix& g, std::span<const double> y,
                                 std::size_t trials, std::uint64_t seed) {
  const std::size_t n = g.h.rows();
  if (y.size() != n) throw std::invalid_argument("label count does not match gram size");
  if (trials < 1) throw std::invalid_argument("cone positivity needs trials >= 1");

  ConeProbe best;
  best.ratio = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& xi) {
    double q = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double hrow = 0.0;
      for (std::size_t j = 0; j < n; ++j) hrow += g.h(i, j) * xi[j];
      q += xi[i] * hrow;
      sq += xi[i] * xi[i];
    }
    const double ratio = q / sq;
    if (ratio < best.ratio) {
      best.ratio = ratio;
      best.xi = xi;
    }
  };

  // deterministic axis rays first
  std::vector<double> xi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    xi.assign(n, 0.0);
    xi[i] = y[i];
    consider(xi);
  }

  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.exponential();
      xi[i] = a * y[i];
      total += a;
    }
    if (total <= 0.0) {
      --t;  // all-zero draw, practically unreachable
      continue;
    }
    consider(xi);
  }
  return best;
}

double cone_positivity_ratio(const GramMatrix& g, std::span<const double> y,
                             std::size_t trials, std::uint64_t seed) {
  return cone_positivity_detail(g, y, trials, seed).ratio;
}

TangentWitness::TangentWitness(const Dataset& data, const ActivationSpec& activation,
                               std::vector<double> weights, double lambda0, double k1)
    : data_(data),
      activation_(activation),
      w_(std::move(weights)),
      lambda0_(lambda0),
      prefactor_(lambda0 / (static_cast<double>(data.n()) * k1)) {}

std::vector<double> TangentWitness::eval(std::span<const double> theta) const {
  const std::size_t d = data_.dim();
  if (theta.size() != d) throw std::invalid_argument("witness probe dimension mismatch");
  std::vector<double> v(d, 0.0);
  for (std::size_t j = 0; j < data_.n(); ++j) {
    const auto xj = data_.x.row(j);
    const double c = w_[j] * act_eval(activation_, dot(theta, xj)).d1;
    for (std::size_t k = 0; k < d; ++k) v[k] += c * xj[k];
  }
  for (std::size_t k = 0; k < d; ++k) v[k] *= prefactor_;
  return v;
}

double TangentWitness::achieved_margin(const Matrix& theta_probes) const {
  const std::size_t n = data_.n();
  const std::size_t probes = theta_probes.rows();
  std::vector<double> acc(n, 0.0);
  for (std::size_t p = 0; p < probes; ++p) {
    const auto th = theta_probes.row(p);
    const auto v = eval(th);
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = data_.x.row(i);
      acc[i] += data_.y[i] * act_eval(activation_, dot(th, xi)).d1 * dot(xi, v);
    }
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    margin = std::min(margin, acc[i] / static_cast<double>(probes));
  }
  return margin;
}

double TangentWitness::max_probed_norm(const Matrix& theta_probes) const {
  double worst = 0.0;
  for (std::size_t p = 0; p < theta_probes.rows(); ++p) {
    worst = std::max(worst, norm2(eval(theta_probes.row(p))));
  }
  return worst;
}

TangentWitness witness_from_gram(const GramMatrix& g, const Dataset& data,
                                 const ActivationSpec& activation, double k1) {
  const double lambda0 = min_eigenvalue(g);
  if (!(lambda0 > 1e-10)) {
    throw std::runtime_error(
        "gram matrix is singular (min eigenvalue " + std::to_string(lambda0) +
        " <= 1e-10): no inverse-based witness exists; the dataset likely has "
        "duplicate or conflicting examples");
  }
  std::vector<double> labels(data.y.begin(), data.y.end());
  auto w = cholesky_solve(g.h, std::move(labels));
  return TangentWitness(data, activation, std::move(w), lambda0, k1);
}

void save_gram_csv(const GramMatrix& g, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot write gram file: " + path);
  for (std::size_t i = 0; i < g.h.rows(); ++i) {
    for (std::size_t j = 0; j < g.h.cols(); ++j) {
      std::fprintf(out, "%.17g%c", g.h(i, j), j + 1 == g.h.cols() ? '\n' : ',');
    }
  }
  std::fclose(out);
}

}  // namespace ntklab
