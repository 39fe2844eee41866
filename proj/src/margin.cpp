#include "ntklab/margin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "ntklab/parallel.hpp"

namespace ntklab {

namespace {

// Cached sigma'(theta0_r . x_i); float keeps the certify-width cache small,
// the final rho_hat is recomputed in double below.
struct TangentCache {
  std::size_t m, n;
  std::vector<float> s;  // m x n
  float at(std::size_t r, std::size_t i) const { return s[r * n + i]; }
};

TangentCache build_cache(const NetParams& params0, const Dataset& data) {
  TangentCache cache;
  cache.m = params0.width();
  cache.n = data.n();
  cache.s.resize(cache.m * cache.n);
  parallel_for(cache.m, [&](std::size_t r) {
    const auto th = params0.theta.row(r);
    for (std::size_t i = 0; i < cache.n; ++i) {
      cache.s[r * cache.n + i] = static_cast<float>(
          act_eval(params0.activation, dot(th, data.x.row(i))).d1);
    }
  });
  return cache;
}

// c_i = (y_i / m) sum_r s_ri (x_i . v_r)
void margins(const TangentCache& cache, const Dataset& data, const Matrix& v,
             std::vector<double>& c) {
  const std::size_t n = cache.n;
  const std::size_t m = cache.m;
  parallel_for(n, [&](std::size_t i) {
    const auto xi = data.x.row(i);
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      acc += static_cast<double>(cache.at(r, i)) * dot(xi, v.row(r));
    }
    c[i] = data.y[i] * acc / static_cast<double>(m);
  });
}

double hard_min_double(const NetParams& params0, const Dataset& data, const Matrix& v) {
  const std::size_t m = params0.width();
  std::vector<double> c(data.n());
  parallel_for(data.n(), [&](std::size_t i) {
    const auto xi = data.x.row(i);
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      acc += act_eval(params0.activation, dot(params0.theta.row(r), xi)).d1 *
             dot(xi, v.row(r));
    }
    c[i] = data.y[i] * acc / static_cast<double>(m);
  });
  return *std::min_element(c.begin(), c.end());
}

void project_rows(Matrix& v) {
  parallel_for(v.rows(), [&](std::size_t r) {
    auto row = v.row(r);
    const double nrm = norm2(row);
    if (nrm > 1.0) {
      const double f = 1.0 / nrm;
      for (double& e : row) e *= f;
    }
  });
}

}  // namespace

MarginCertificate estimate_margin(const NetParams& params0, const Dataset& data,
                                  std::size_t max_iters, double tol) {
  if (data.n() == 0) throw std::invalid_argument("estimate_margin: empty dataset");
  const std::size_t m = params0.width();
  const std::size_t n = data.n();
  const std::size_t d = params0.dim();
  if (data.dim() != d) throw std::invalid_argument("estimate_margin: dimension mismatch");

  const TangentCache cache = build_cache(params0, data);
  const double k1 = params0.activation.k1;

  // matched-filter start: v_r along sum_i y_i s_ri x_i
  Matrix v(m, d);
  parallel_for(m, [&](std::size_t r) {
    auto row = v.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      axpy(data.y[i] * static_cast<double>(cache.at(r, i)), data.x.row(i), row);
    }
  });
  project_rows(v);

  std::vector<double> c(n), c_trial(n), p(n);
  Matrix best_v = v;
  Matrix v_trial(m, d);
  double best_hard = -std::numeric_limits<double>::infinity();

  auto smoothed = [&](const std::vector<double>& cc, double tau) {
    const double cmin = *std::min_element(cc.begin(), cc.end());
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(-(cc[i] - cmin) / tau);
    return cmin - tau * std::log(z);
  };

  constexpr std::size_t kStage = 50;  // halve the temperature every stage
  constexpr double kTauMin = 1e-6;
  double tau = 1.0;
  double stage_start_best = best_hard;
  bool converged = false;
  std::size_t it = 0;

  margins(cache, data, v, c);
  for (; it < max_iters; ++it) {
    const double cmin = *std::min_element(c.begin(), c.end());
    if (cmin > best_hard) {
      best_hard = cmin;
      best_v = v;
    }

    // softmax of -c/tau concentrates on the active minima
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::exp(-(c[i] - cmin) / tau);
      z += p[i];
    }
    for (std::size_t i = 0; i < n; ++i) p[i] /= z;

    Matrix grad(m, d);
    parallel_for(m, [&](std::size_t r) {
      auto row = grad.row(r);
      for (std::size_t i = 0; i < n; ++i) {
        const double w =
            p[i] * data.y[i] * static_cast<double>(cache.at(r, i)) /
            static_cast<double>(m);
        axpy(w, data.x.row(i), row);
      }
    });

    // backtracking projected ascent: the base step 1/L for the tau-smoothed
    // objective always succeeds, larger trials usually do
    const double phi = smoothed(c, tau);
    const double base_step = static_cast<double>(m) * tau / (k1 * k1);
    double step = base_step * 64.0;
    bool accepted = false;
    for (int bt = 0; bt < 10 && !accepted; ++bt, step *= 0.5) {
      parallel_for(m, [&](std::size_t r) {
        auto row = v_trial.row(r);
        const auto cur = v.row(r);
        const auto g = grad.row(r);
        for (std::size_t j = 0; j < d; ++j) row[j] = cur[j] + step * g[j];
      });
      project_rows(v_trial);
      margins(cache, data, v_trial, c_trial);
      if (smoothed(c_trial, tau) > phi) {
        std::swap(v, v_trial);
        std::swap(c, c_trial);
        accepted = true;
      }
    }

    if ((it + 1) % kStage == 0) {
      const double gain = best_hard - stage_start_best;
      if (tau <= kTauMin && gain < tol) {
        converged = true;
        ++it;
        break;
      }
      stage_start_best = best_hard;
      tau = std::max(tau * 0.5, kTauMin);
    }
  }

  MarginCertificate cert;
  cert.v = std::move(best_v);
  cert.iterations = it;
  cert.converged = converged;
  cert.rho_hat = hard_min_double(params0, data, cert.v);
  double worst = 0.0;
  for (std::size_t r = 0; r < m; ++r) worst = std::max(worst, norm2(cert.v.row(r)));
  cert.v_norm_max = worst;
  return cert;
}

HalfMarginReport verify_half_margin(const MarginCertificate& cert,
                                    const NetParams& params0, const Dataset& data,
                                    double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("verify_half_margin: rho must be > 0");
  const std::size_t m = params0.width();
  HalfMarginReport report;
  report.values.resize(data.n());
  report.pass.resize(data.n());
  parallel_for(data.n(), [&](std::size_t i) {
    const auto xi = data.x.row(i);
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      acc += act_eval(params0.activation, dot(params0.theta.row(r), xi)).d1 *
             dot(xi, cert.v.row(r));
    }
    report.values[i] = data.y[i] * acc / static_cast<double>(m);
  });
  report.min_value = *std::min_element(report.values.begin(), report.values.end());
  report.all_pass = true;
  for (std::size_t i = 0; i < data.n(); ++i) {
    report.pass[i] = report.values[i] >= rho / 2.0;
    if (!report.pass[i]) report.all_pass = false;
  }
  return report;
}

std::size_t min_width_for_margin(double rho, double k1, std::size_t n, double delta) {
  if (!(rho > 0.0)) throw std::invalid_argument("min_width_for_margin: rho must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("min_width_for_margin: delta must be in (0, 1)");
  }
  const double raw = 16.0 * k1 * k1 / (rho * rho) *
                     std::log(2.0 * static_cast<double>(n) / delta);
  auto m = static_cast<std::size_t>(std::ceil(raw));
  if (m < 2) m = 2;
  if (m % 2 != 0) ++m;
  return m;
}

std::string MarginCertificate::to_json_string() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"rho_hat\": %.17g, \"m\": %zu, \"iterations\": %zu, "
                "\"converged\": %s, \"v_norm_max\": %.17g}",
                rho_hat, v.rows(), iterations, converged ? "true" : "false",
                v_norm_max);
  return buf;
}

void MarginCertificate::save_v_csv(const std::string& path) const {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot write certificate file: " + path);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
      std::fprintf(out, "%.17g%c", v(r, j), j + 1 == v.cols() ? '\n' : ',');
    }
  }
  std::fclose(out);
}

}  // namespace ntklab
