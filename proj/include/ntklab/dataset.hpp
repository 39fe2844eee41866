#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ntklab/matrix.hpp"

namespace ntklab {

// n labeled examples, ||x_i||_2 <= 1, y_i in {-1, +1}.
struct Dataset {
  Matrix x;
  std::vector<double> y;

  std::size_t n() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }

  // Enforces the type invariants; throws with a distinct message per failure.
  void validate() const;
};

// CSV contract: header "x0,...,x{d-1},y", one row per example.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

// Disjoint, exhaustive, seeded split. Both parts must be non-empty.
std::pair<Dataset, Dataset> split(const Dataset& data, double heldout_fraction,
                                  std::uint64_t seed);

}  // namespace ntklab
