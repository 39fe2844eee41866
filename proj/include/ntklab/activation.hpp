#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace ntklab {

enum class ActKind { Sigmoid, Tanh, Swish, SoftplusRelu, Identity };

struct ActEval {
  double value;
  double d1;
  double d2;
};

// Smooth scalar activation together with certified derivative bounds
// k1 = sup |sigma'| and k2 = sup |sigma''|.
struct ActivationSpec {
  ActKind kind = ActKind::Tanh;
  double temperature = 1.0;  // softplus sharpness; unused otherwise
  double k1 = 1.0;
  double k2 = 0.0;

  static ActivationSpec make(ActKind kind, double temperature = 1.0);

  // Accepts "sigmoid" | "tanh" | "swish" | "softplus:<t>" | "identity".
  static ActivationSpec parse(std::string_view name);

  std::string name() const;
};

// sigma(u), sigma'(u), sigma''(u) from the closed-form expressions.
// Rejects non-finite input.
ActEval act_eval(const ActivationSpec& spec, double u);

// Tight suprema (K1, K2) of |sigma'| and |sigma''|.
std::pair<double, double> certified_bounds(ActKind kind, double temperature = 1.0);

// 1 / (1 + exp(-u)) without overflow for any finite u.
double stable_sigmoid(double u);

// log(1 + exp(-v)): the logistic loss as a function of the margin v = y*f.
double logistic_loss_of_margin(double v);

}  // namespace ntklab
