// Timing comparison of the OpenMP kernels against the serial reference
// implementations, plus the max deviation between the two paths.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "ntklab/model.hpp"
#include "ntklab/parallel.hpp"
#include "ntklab/reference.hpp"
#include "ntklab/tangent.hpp"
#include "ntklab/teacher.hpp"

using namespace ntklab;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

template <class F>
double time_ms(F&& f, int reps) {
  const double t0 = now_ms();
  for (int r = 0; r < reps; ++r) f();
  return (now_ms() - t0) / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, double max_dev) {
  std::printf("%-24s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   max|dev| %.3e\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms, max_dev);
}

}  // namespace

int main() {
  apply_thread_env();
  std::printf("threads: %d\n", thread_count());

  TeacherSpec teacher;
  teacher.margin_floor = 0.2;
  teacher.bias_coord = true;
  teacher.s = 0.1;
  const Dataset data = generate(teacher, 512, 10, 7).data;

  const ActivationSpec act = ActivationSpec::parse("tanh");
  const InitDistribution dist = InitDistribution::gaussian(1.0);
  const NetParams params = init_symmetric(4096, data.dim(), dist, act, 42);

  {
    std::vector<double> a, b;
    const double ts = time_ms([&] { a = ref::forward_all(params, data); }, 3);
    const double tp = time_ms([&] { b = forward_all(params, data); }, 3);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
    report("forward_all", ts, tp, dev);
  }
  {
    Matrix a, b;
    const double ts = time_ms([&] { a = ref::loss_gradient(params, data); }, 3);
    const double tp = time_ms([&] { b = loss_gradient(params, data); }, 3);
    double dev = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
      dev = std::max(dev, std::abs(a.data()[k] - b.data()[k]));
    }
    report("loss_gradient", ts, tp, dev);
  }
  {
    const Dataset small = generate(teacher, 96, 10, 9).data;
    Matrix a;
    GramMatrix b;
    const double ts =
        time_ms([&] { a = ref::gram_ntk_mc(small, dist, act, 4096, 5); }, 2);
    const double tp = time_ms([&] { b = gram_ntk_mc(small, dist, act, 4096, 5); }, 2);
    double dev = 0.0;
    for (std::size_t i = 0; i < small.n(); ++i) {
      for (std::size_t j = 0; j < small.n(); ++j) {
        dev = std::max(dev, std::abs(a(i, j) - b.h(i, j)));
      }
    }
    report("gram_ntk_mc", ts, tp, dev);
  }
  {
    double a = 0.0, b = 0.0;
    const double ts = time_ms([&] { a = ref::empirical_loss(params, data); }, 3);
    const double tp = time_ms([&] { b = empirical_loss(params, data); }, 3);
    report("empirical_loss", ts, tp, std::abs(a - b));
  }
  return 0;
}
