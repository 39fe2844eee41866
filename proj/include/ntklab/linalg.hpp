#pragma once

#include <vector>

#include "ntklab/matrix.hpp"

namespace ntklab {

struct SymEig {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi on a dense symmetric matrix. Sized for desk-scale n.
SymEig sym_eig(Matrix a, bool want_vectors = false);

double sym_min_eigenvalue(const Matrix& a);

// Solves a x = b for symmetric positive definite a.
std::vector<double> cholesky_solve(Matrix a, std::vector<double> b);

}  // namespace ntklab
