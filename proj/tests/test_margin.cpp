#include <cmath>

#include "doctest.h"
#include "ntklab/margin.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ntklab;

namespace {

const ActivationSpec kId = ActivationSpec::parse("identity");
const ActivationSpec kTanh = ActivationSpec::parse("tanh");
const InitDistribution kGauss = InitDistribution::gaussian(1.0);

Dataset two_point() {
  Dataset d;
  d.x = Matrix(2, 2);
  d.x(0, 0) = 1.0;
  d.x(1, 0) = -1.0;
  d.y = {1.0, -1.0};
  return d;
}

}  // namespace

TEST_CASE("identity instances match the closed-form optimum") {
  const auto p0 = init_symmetric(8, 2, kGauss, kId, 1);
  const auto cert = estimate_margin(p0, two_point(), 1500, 1e-9);
  CHECK(cert.rho_hat == doctest::Approx(1.0).epsilon(1e-3));
  for (std::size_t r = 0; r < 8; ++r) {
    CHECK(cert.v(r, 0) == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(std::abs(cert.v(r, 1)) <= 2e-3);
  }

  Dataset single;
  single.x = Matrix(1, 2);
  single.x(0, 0) = 0.6;
  single.x(0, 1) = 0.8;
  single.y = {1.0};
  const auto c2 = estimate_margin(init_symmetric(4, 2, kGauss, kId, 2), single, 1500, 1e-9);
  CHECK(c2.rho_hat == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(c2.v(0, 0) == doctest::Approx(0.6).epsilon(2e-3));
  CHECK(c2.v(0, 1) == doctest::Approx(0.8).epsilon(2e-3));
}

TEST_CASE("conflicting duplicate labels report non-separable") {
  Dataset d;
  d.x = Matrix(2, 2);
  d.x(0, 0) = 0.5;
  d.x(1, 0) = 0.5;
  d.y = {1.0, -1.0};
  const auto cert = estimate_margin(init_symmetric(6, 2, kGauss, kTanh, 3), d, 600, 1e-9);
  CHECK(cert.rho_hat <= 0.0);
}

TEST_CASE("certificate invariants: feasible rows, consistent rho_hat") {
  const auto data = testutil::random_dataset(20, 4, 17);
  const auto p0 = init_symmetric(16, 4, kGauss, kTanh, 18);
  const auto cert = estimate_margin(p0, data, 800, 1e-9);
  for (std::size_t r = 0; r < cert.v.rows(); ++r) {
    CHECK(norm2(cert.v.row(r)) <= 1.0 + 1e-9);
  }
  // recompute the hard min from v
  double recomputed = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.n(); ++i) {
    double acc = 0.0;
    for (std::size_t r = 0; r < p0.width(); ++r) {
      acc += act_eval(kTanh, dot(p0.theta.row(r), data.x.row(i))).d1 *
             dot(data.x.row(i), cert.v.row(r));
    }
    recomputed = std::min(recomputed,
                          data.y[i] * acc / static_cast<double>(p0.width()));
  }
  CHECK(cert.rho_hat == doctest::Approx(recomputed).epsilon(1e-9));
  CHECK_THROWS(estimate_margin(p0, Dataset{}, 100, 1e-9));
}

TEST_CASE("projected ascent matches the min-norm-point oracle") {
  Rng rng(23);
  for (int inst = 0; inst < 8; ++inst) {
    const std::size_t n = 2 + rng.below(20);
    const std::size_t d = 2 + rng.below(6);
    // teacher-labeled so most instances are separable
    std::vector<double> w(d);
    for (auto& e : w) e = rng.normal();
    const double wn = norm2(w);
    Dataset data = testutil::random_dataset(n, d, rng.next_u64());
    for (std::size_t i = 0; i < n; ++i) {
      data.y[i] = dot(data.x.row(i), w) / wn >= 0.0 ? 1.0 : -1.0;
    }

    Matrix signed_x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) signed_x(i, j) = data.y[i] * data.x(i, j);
    }
    const auto oracle = oracles::max_margin_oracle(signed_x);

    const auto p0 = init_symmetric(6, d, kGauss, kId, rng.next_u64());
    const auto cert = estimate_margin(p0, data, 2000, 1e-10);
    CHECK(cert.rho_hat <= oracle.upper + 1e-6);
    CHECK(std::abs(cert.rho_hat - oracle.lower) <= 1e-3);
  }
}

TEST_CASE("adding an example never increases the margin") {
  Rng rng(29);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 3 + rng.below(10);
    const std::size_t d = 2 + rng.below(4);
    Dataset data = testutil::random_dataset(n + 1, d, rng.next_u64());
    std::vector<double> w(d);
    for (auto& e : w) e = rng.normal();
    for (std::size_t i = 0; i <= n; ++i) {
      data.y[i] = dot(data.x.row(i), w) >= 0.0 ? 1.0 : -1.0;
    }
    Dataset smaller;
    smaller.x = Matrix(n, d);
    smaller.y.assign(data.y.begin(), data.y.begin() + n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) smaller.x(i, j) = data.x(i, j);
    }
    const auto p0 = init_symmetric(8, d, kGauss, kTanh, 1000 + inst);
    const double rho_small = estimate_margin(p0, smaller, 600, 1e-9).rho_hat;
    const double rho_full = estimate_margin(p0, data, 600, 1e-9).rho_hat;
    CHECK(rho_full <= rho_small + 2e-3);
  }
}

TEST_CASE("half-margin verification") {
  const auto data = testutil::random_dataset(10, 3, 41);
  Dataset sep = data;
  std::vector<double> w{0.5, -0.3, 0.8};
  for (std::size_t i = 0; i < sep.n(); ++i) {
    sep.y[i] = dot(sep.x.row(i), w) >= 0.0 ? 1.0 : -1.0;
  }
  const auto p0 = init_symmetric(12, 3, kGauss, kTanh, 42);
  const auto cert = estimate_margin(p0, sep, 800, 1e-9);
  REQUIRE(cert.rho_hat > 0.0);

  const auto ok = verify_half_margin(cert, p0, sep, cert.rho_hat);
  CHECK(ok.all_pass);  // rho_hat >= rho_hat / 2 by construction
  CHECK(ok.min_value == doctest::Approx(cert.rho_hat).epsilon(1e-9));

  const auto fail = verify_half_margin(cert, p0, sep, 2.0 * cert.rho_hat + 1e-6);
  CHECK(!fail.all_pass);
  CHECK_THROWS(verify_half_margin(cert, p0, sep, 0.0));
}

TEST_CASE("width scaling improves the half-margin pass rate") {
  // teacher-separable data; at fixed rho the pass rate over re-drawn inits
  // grows with the width
  Dataset data;
  {
    Rng rng(57);
    const std::size_t n = 24, d = 4;
    data = testutil::random_dataset(n, d, 58);
    std::vector<double> w(d);
    for (auto& e : w) e = rng.normal();
    const double wn = norm2(w);
    for (std::size_t i = 0; i < n; ++i) {
      data.y[i] = dot(data.x.row(i), w) / wn >= 0.0 ? 1.0 : -1.0;
    }
  }
  // reference margin from a wide certificate
  const auto wide = estimate_margin(init_symmetric(512, 4, kGauss, kTanh, 3), data,
                                    800, 1e-9);
  REQUIRE(wide.rho_hat > 0.0);
  const double rho = wide.rho_hat;

  auto pass_rate = [&](std::size_t m) {
    int pass = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto p0 = init_symmetric(m, 4, kGauss, kTanh, 7000 + seed);
      const auto cert = estimate_margin(p0, data, 400, 1e-9);
      if (verify_half_margin(cert, p0, data, rho).all_pass) ++pass;
    }
    return pass;
  };
  const int narrow = pass_rate(8);
  const int wide_rate = pass_rate(128);
  CHECK(wide_rate >= narrow);
  CHECK(wide_rate >= 28);  // essentially always passes at 16x width
}

TEST_CASE("minimum width formula") {
  CHECK(min_width_for_margin(0.5, 1.0, 100, 0.01) == 634);
  CHECK(min_width_for_margin(1.0, 1.0, 100, 0.01) == 160);
  CHECK(min_width_for_margin(4.0, 1.0, 1, 1.0 - 1e-12) == 2);
  CHECK_THROWS(min_width_for_margin(0.0, 1.0, 10, 0.1));
  CHECK_THROWS(min_width_for_margin(0.5, 1.0, 10, 1.5));
}

TEST_CASE("seed stability of rho_hat at generous width") {
  Dataset data;
  {
    Rng rng(61);
    data = testutil::random_dataset(16, 3, 62);
    std::vector<double> w(3);
    for (auto& e : w) e = rng.normal();
    for (std::size_t i = 0; i < data.n(); ++i) {
      data.y[i] = dot(data.x.row(i), w) >= 0.0 ? 1.0 : -1.0;
    }
  }
  const auto probe = estimate_margin(init_symmetric(64, 3, kGauss, kTanh, 5), data,
                                     600, 1e-9);
  REQUIRE(probe.rho_hat > 0.0);
  const std::size_t m =
      4 * min_width_for_margin(probe.rho_hat, kTanh.k1, data.n(), 0.05);

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cert = estimate_margin(init_symmetric(m, 3, kGauss, kTanh, 100 + seed),
                                      data, 600, 1e-9);
    lo = std::min(lo, cert.rho_hat);
    hi = std::max(hi, cert.rho_hat);
  }
  CHECK((hi - lo) / hi <= 0.25);
}
