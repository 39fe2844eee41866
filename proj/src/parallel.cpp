#include "ntklab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ntklab {

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("NTKLAB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) omp_set_num_threads(cap);
    } catch (...) {
      // ignore malformed values, keep the OpenMP default
    }
  }
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ntklab
