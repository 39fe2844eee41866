#include "ntklab/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ntklab/rng.hpp"

namespace ntklab {

namespace {

constexpr double kNormSlack = 1e-9;

std::string expected_header(std::size_t d) {
  std::string h;
  for (std::size_t j = 0; j < d; ++j) h += "x" + std::to_string(j) + ",";
  h += "y";
  return h;
}

}  // namespace

void Dataset::validate() const {
  if (n() == 0) throw std::invalid_argument("dataset is empty");
  if (x.rows() != y.size()) throw std::invalid_argument("dataset row/label count mismatch");
  for (std::size_t i = 0; i < n(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) {
      throw std::invalid_argument("label at row " + std::to_string(i) +
                                  " is not in {-1, 1}");
    }
    const double nrm = norm2(x.row(i));
    if (!(nrm <= 1.0 + kNormSlack)) {
      throw std::invalid_argument("||x||_2 = " + std::to_string(nrm) + " at row " +
                                  std::to_string(i) + " exceeds 1");
    }
    for (std::size_t j = 0; j < dim(); ++j) {
      if (!std::isfinite(x(i, j))) {
        throw std::invalid_argument("non-finite feature at row " + std::to_string(i));
      }
    }
  }
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty dataset file: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::size_t d = 0;
  {
    std::size_t cols = 1;
    for (char c : header) cols += (c == ',');
    if (cols < 2) throw std::runtime_error("bad header (need x0,...,y): '" + header + "'");
    d = cols - 1;
  }
  if (header != expected_header(d)) {
    throw std::runtime_error("bad header: expected '" + expected_header(d) + "', got '" +
                             header + "'");
  }

  Dataset data;
  std::vector<double> flat;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &pos);
      } catch (...) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" +
                                 cell + "'");
      }
      if (pos != cell.size()) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" +
                                 cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != d + 1) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(d + 1) + " columns, got " +
                               std::to_string(row.size()));
    }
    const double label = row.back();
    if (label != 1.0 && label != -1.0) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": label must be -1 or 1, got " + std::to_string(label));
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += row[j] * row[j];
    const double nrm = std::sqrt(sq);
    if (!(nrm <= 1.0 + kNormSlack)) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": ||x||_2 = " +
                               std::to_string(nrm) + " exceeds 1");
    }
    flat.insert(flat.end(), row.begin(), row.end() - 1);
    data.y.push_back(label);
  }
  if (data.y.empty()) throw std::runtime_error("dataset has no rows: " + path);
  data.x = Matrix(data.y.size(), d);
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) data.x(i, j) = flat[i * d + j];
  }
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  const std::size_t d = data.dim();
  std::fprintf(out, "%s\n", expected_header(d).c_str());
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < d; ++j) std::fprintf(out, "%.17g,", data.x(i, j));
    std::fprintf(out, "%d\n", data.y[i] > 0 ? 1 : -1);
  }
  std::fclose(out);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double heldout_fraction,
                                  std::uint64_t seed) {
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) {
    throw std::invalid_argument("heldout fraction must be in (0, 1)");
  }
  const std::size_t n = data.n();
  const std::size_t n_heldout =
      static_cast<std::size_t>(std::llround(heldout_fraction * static_cast<double>(n)));
  if (n_heldout == 0 || n_heldout == n) {
    throw std::invalid_argument("degenerate split: both parts must be non-empty");
  }

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.below(i + 1)]);
  }

  const std::size_t d = data.dim();
  auto take = [&](std::size_t lo, std::size_t hi) {
    Dataset part;
    part.x = Matrix(hi - lo, d);
    part.y.resize(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t src = idx[k];
      for (std::size_t j = 0; j < d; ++j) part.x(k - lo, j) = data.x(src, j);
      part.y[k - lo] = data.y[src];
    }
    return part;
  };
  return {take(n_heldout, n), take(0, n_heldout)};
}

}  // namespace ntklab
