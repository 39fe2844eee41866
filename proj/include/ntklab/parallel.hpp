#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ntklab {

// Applies the NTKLAB_THREADS cap (if set) to the OpenMP runtime. Call once at
// process start; safe without OpenMP.
void apply_thread_env();

int thread_count();

// Parallel loop over [0, n). Iterations must write disjoint state.
template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

// Reductions use a fixed block decomposition: each block is summed serially,
// block partials are combined in index order. The result does not depend on
// the thread count, so repeated runs are bit-identical.
inline constexpr std::size_t kSumBlock = 2048;

template <class F>
double blocked_sum_serial(std::size_t n, F&& term) {
  double total = 0.0;
  for (std::size_t lo = 0; lo < n; lo += kSumBlock) {
    const std::size_t hi = std::min(n, lo + kSumBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    total += s;
  }
  return total;
}

template <class F>
double blocked_sum(std::size_t n, F&& term) {
  if (n == 0) return 0.0;
  const std::size_t nb = (n + kSumBlock - 1) / kSumBlock;
  if (nb == 1) return blocked_sum_serial(n, term);
  std::vector<double> part(nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long b = 0; b < static_cast<long long>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kSumBlock;
    const std::size_t hi = std::min(n, lo + kSumBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    part[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double p : part) total += p;
  return total;
}

}  // namespace ntklab
