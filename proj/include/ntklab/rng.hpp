#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ntklab {

// All sampling goes through explicit transforms of mt19937_64 output:
// std::*_distribution is implementation-defined, and reproducible streams are
// part of the product contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1) with 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Box-Muller; consumes exactly two uniforms per call
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Exponential(1)
  double exponential() { return -std::log1p(-uniform01()); }

  // uniform integer in [0, n); n >= 1
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ntklab
