#include "ntklab/activation.hpp"

#include <cmath>
#include <stdexcept>

namespace ntklab {

double stable_sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logistic_loss_of_margin(double v) {
  // max(-v, 0) + log(1 + exp(-|v|)) never overflows
  return std::max(-v, 0.0) + std::log1p(std::exp(-std::abs(v)));
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// sup |swish'| sits at the positive root of swish''; no closed form, so the
// stationarity condition 2 + u*(1 - 2*sigmoid(u)) = 0 is bisected once.
double swish_k1() {
  static const double value = [] {
    double lo = 1.0, hi = 4.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double s = stable_sigmoid(mid);
      const double d2_sign = 2.0 + mid * (1.0 - 2.0 * s);
      (d2_sign > 0.0 ? lo : hi) = mid;
    }
    const double u = 0.5 * (lo + hi);
    const double s = stable_sigmoid(u);
    return s * (1.0 + u * (1.0 - s));
  }();
  return value;
}

}  // namespace

ActivationSpec ActivationSpec::make(ActKind kind, double temperature) {
  if (kind == ActKind::SoftplusRelu && !(temperature > 0.0)) {
    throw std::invalid_argument("softplus temperature must be positive");
  }
  ActivationSpec spec;
  spec.kind = kind;
  spec.temperature = temperature;
  const auto [k1, k2] = certified_bounds(kind, temperature);
  spec.k1 = k1;
  spec.k2 = k2;
  return spec;
}

ActivationSpec ActivationSpec::parse(std::string_view name) {
  if (name == "sigmoid") return make(ActKind::Sigmoid);
  if (name == "tanh") return make(ActKind::Tanh);
  if (name == "swish") return make(ActKind::Swish);
  if (name == "identity") return make(ActKind::Identity);
  constexpr std::string_view prefix = "softplus:";
  if (name.substr(0, prefix.size()) == prefix) {
    const std::string t_str(name.substr(prefix.size()));
    std::size_t pos = 0;
    double t = 0.0;
    try {
      t = std::stod(t_str, &pos);
    } catch (...) {
      throw std::invalid_argument("bad softplus temperature: '" + t_str + "'");
    }
    if (pos != t_str.size() || !(t > 0.0)) {
      throw std::invalid_argument("bad softplus temperature: '" + t_str + "'");
    }
    return make(ActKind::SoftplusRelu, t);
  }
  throw std::invalid_argument("unknown activation: '" + std::string(name) + "'");
}

std::string ActivationSpec::name() const {
  switch (kind) {
    case ActKind::Sigmoid: return "sigmoid";
    case ActKind::Tanh: return "tanh";
    case ActKind::Swish: return "swish";
    case ActKind::Identity: return "identity";
    case ActKind::SoftplusRelu: return "softplus:" + std::to_string(temperature);
  }
  return "?";
}

std::pair<double, double> certified_bounds(ActKind kind, double temperature) {
  switch (kind) {
    case ActKind::Sigmoid:
      // sup s(1-s) = 1/4; sup |s(1-s)(1-2s)| = 1/(6*sqrt(3))
      return {0.25, 1.0 / (6.0 * std::sqrt(3.0))};
    case ActKind::Tanh:
      // sup (1-t^2) = 1; sup |2t(1-t^2)| = 4/(3*sqrt(3))
      return {1.0, 4.0 / (3.0 * std::sqrt(3.0))};
    case ActKind::Swish:
      // sup |swish''| = 1/2, attained at 0
      return {swish_k1(), 0.5};
    case ActKind::SoftplusRelu:
      return {1.0, temperature / 4.0};
    case ActKind::Identity:
      return {1.0, 0.0};
  }
  throw std::invalid_argument("unknown activation kind");
}

ActEval act_eval(const ActivationSpec& spec, double u) {
  if (!std::isfinite(u)) throw std::invalid_argument("activation input must be finite");
  switch (spec.kind) {
    case ActKind::Sigmoid: {
      const double s = stable_sigmoid(u);
      const double d1 = s * (1.0 - s);
      return {s, d1, d1 * (1.0 - 2.0 * s)};
    }
    case ActKind::Tanh: {
      const double t = std::tanh(u);
      const double d1 = 1.0 - t * t;
      return {t, d1, -2.0 * t * d1};
    }
    case ActKind::Swish: {
      const double s = stable_sigmoid(u);
      const double sp = s * (1.0 - s);
      return {u * s, s + u * sp, sp * (2.0 + u * (1.0 - 2.0 * s))};
    }
    case ActKind::SoftplusRelu: {
      const double t = spec.temperature;
      const double s = stable_sigmoid(t * u);
      return {softplus(t * u) / t, s, t * s * (1.0 - s)};
    }
    case ActKind::Identity:
      return {u, 1.0, 0.0};
  }
  throw std::invalid_argument("unknown activation kind");
}

}  // namespace ntklab
