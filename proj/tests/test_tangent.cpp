#include <cmath>

#include "doctest.h"
#include "ntklab/linalg.hpp"
#include "ntklab/tangent.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ntklab;

namespace {

const ActivationSpec kTanh = ActivationSpec::parse("tanh");
const ActivationSpec kSigmoid = ActivationSpec::parse("sigmoid");
const ActivationSpec kId = ActivationSpec::parse("identity");
const InitDistribution kGauss = InitDistribution::gaussian(1.0);

}  // namespace

TEST_CASE("identity kernel is exactly the inner product") {
  const std::vector<double> x{0.3, -0.4, 0.5};
  const std::vector<double> xp{-0.1, 0.2, 0.6};
  const double expect = dot(x, xp);
  for (std::uint64_t seed : {1ull, 2ull, 77ull}) {
    for (std::size_t s : {1ul, 10ul, 1000ul}) {
      CHECK(ntk_mc(x, xp, kGauss, kId, s, seed) == expect);
    }
  }
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(ntk_mc(x, zero, kGauss, kTanh, 100, 3) == 0.0);
  CHECK_THROWS(ntk_mc(x, std::vector<double>{1.0}, kGauss, kTanh, 10, 1));
}

TEST_CASE("sigmoid d=1 MC estimate brackets the quadrature oracle") {
  // E[sigma'(theta)^2] for theta ~ N(0,1) at x = xp = 1
  const double oracle = oracles::gh_normal_expectation(
      [](double z) {
        const double e = act_eval(kSigmoid, z).d1;
        return e * e;
      },
      200);
  const std::vector<double> one{1.0};
  const auto est = ntk_mc_with_err(one, one, kGauss, kSigmoid, 20000, 13);
  CHECK(std::abs(est.value - oracle) <= 3.0 * est.stderr);
  CHECK(est.stderr > 0.0);
}

TEST_CASE("MC standard error shrinks like 1/sqrt(S)") {
  const std::vector<double> x{0.8, 0.6};
  const std::vector<double> xp{0.5, 0.1};
  auto spread = [&](std::size_t s) {
    std::vector<double> vals;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      vals.push_back(ntk_mc(x, xp, kGauss, kTanh, s, 1000 + seed));
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return std::sqrt(var / (vals.size() - 1));
  };
  const double ratio = spread(1000) / spread(100000);
  CHECK(ratio >= 5.0);   // ideal is 10
  CHECK(ratio <= 20.0);
}

TEST_CASE("empirical kernel: positivity, identity closed form, CRN alignment") {
  auto p = testutil::random_params(10, 3, 0.25, kTanh, 5);
  const std::vector<double> x{0.2, 0.1, -0.5};
  CHECK(empirical_ntk(p, x, x) >= 0.0);

  auto pid = testutil::random_params(10, 3, 0.0, kId, 6);
  const std::vector<double> xp{0.4, -0.2, 0.3};
  CHECK(empirical_ntk(pid, x, xp) == doctest::Approx(10.0 * dot(x, xp)).epsilon(1e-13));

  // symmetric init at width m shares its row stream with S = m/2 MC samples
  const std::size_t m = 64;
  const auto p0 = init_symmetric(m, 3, kGauss, kTanh, 99);
  const double scaled = std::pow(static_cast<double>(m), 2.0 * p0.beta - 1.0) *
                        empirical_ntk(p0, x, xp);
  const double mc = ntk_mc(x, xp, kGauss, kTanh, m / 2, 99);
  CHECK(std::abs(scaled - mc) <= 1e-12);
}

TEST_CASE("gram: hand cases and PSD structure") {
  // n = 1, identity activation, x = (1)
  Dataset single;
  single.x = Matrix(1, 1);
  single.x(0, 0) = 1.0;
  single.y = {1.0};
  const auto g1 = gram_ntk_mc(single, kGauss, kId, 50, 3);
  CHECK(g1.h(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  // two orthonormal points, identity activation -> identity matrix
  Dataset ortho;
  ortho.x = Matrix(2, 2);
  ortho.x(0, 0) = 1.0;
  ortho.x(1, 1) = 1.0;
  ortho.y = {1.0, -1.0};
  const auto g2 = gram_ntk_mc(ortho, kGauss, kId, 10, 1);
  CHECK(g2.h(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g2.h(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g2.h(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(min_eigenvalue(g2) == doctest::Approx(1.0).epsilon(1e-12));

  // duplicated example makes the matrix rank-deficient
  Dataset dup;
  dup.x = Matrix(2, 2);
  dup.x(0, 0) = 0.7;
  dup.x(1, 0) = 0.7;
  dup.y = {1.0, -1.0};
  const auto g3 = gram_ntk_mc(dup, kGauss, kTanh, 500, 7);
  CHECK(std::abs(min_eigenvalue(g3)) <= 1e-9);

  // generic closure route agrees with the specialized assembly
  const auto data = testutil::random_dataset(6, 3, 11);
  const auto ga = gram(data, [&](std::span<const double> a, std::span<const double> b) {
    return ntk_mc(a, b, kGauss, kTanh, 200, 21);
  });
  const auto gb = gram_ntk_mc(data, kGauss, kTanh, 200, 21);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(ga.h(i, j) == doctest::Approx(gb.h(i, j)).epsilon(1e-12));
    }
  }

  // MC gram with common random numbers is PSD up to noise
  const auto eig = sym_eig(gb.h);
  CHECK(eig.values.front() >= -1e-8);
}

TEST_CASE("min_eigenvalue closed forms") {
  GramMatrix g;
  g.h = Matrix(2, 2);
  g.h(0, 0) = 1.0;
  g.h(1, 1) = 1.0;
  g.h(0, 1) = 1.0;
  g.h(1, 0) = 1.0;
  CHECK(min_eigenvalue(g) == doctest::Approx(0.0).epsilon(1e-14));
  g.h(0, 0) = 2.0;
  g.h(1, 1) = 2.0;
  CHECK(min_eigenvalue(g) == doctest::Approx(1.0).epsilon(1e-12));
  g.h(0, 1) = std::numeric_limits<double>::quiet_NaN();
  g.h(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(min_eigenvalue(g));
}

TEST_CASE("jacobi eigensolver against random spectra") {
  Rng rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    const std::size_t n = 3 + rng.below(10);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        a(i, j) = rng.normal();
        a(j, i) = a(i, j);
      }
    }
    const auto eig = sym_eig(a, true);
    // residual ||A v - lambda v|| per eigenpair
    for (std::size_t k = 0; k < n; ++k) {
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double av = 0.0;
        for (std::size_t j = 0; j < n; ++j) av += a(i, j) * eig.vectors(j, k);
        const double r = av - eig.values[k] * eig.vectors(i, k);
        res += r * r;
      }
      CHECK(std::sqrt(res) <= 1e-10);
    }
    for (std::size_t k = 1; k < n; ++k) CHECK(eig.values[k - 1] <= eig.values[k]);
  }
}

TEST_CASE("cone positivity ratios") {
  GramMatrix ident;
  ident.h = Matrix(3, 3);
  for (int i = 0; i < 3; ++i) ident.h(i, i) = 1.0;
  const std::vector<double> y3{1.0, -1.0, 1.0};
  CHECK(cone_positivity_ratio(ident, y3, 50, 1) == doctest::Approx(1.0).epsilon(1e-12));

  GramMatrix ones;
  ones.h = Matrix(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) ones.h(i, j) = 1.0;
  }
  // aligned labels: minimum 1 attained at the axis rays
  CHECK(cone_positivity_ratio(ones, std::vector<double>{1.0, 1.0}, 200, 2) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // conflicting labels: the diagonal direction collapses the form
  CHECK(cone_positivity_ratio(ones, std::vector<double>{1.0, -1.0}, 2000, 3) <= 0.05);
}

TEST_CASE("witness from the gram inverse") {
  // n = 1, identity activation: margin is exactly lambda0/(n K1) = 1
  Dataset single;
  single.x = Matrix(1, 1);
  single.x(0, 0) = 1.0;
  single.y = {1.0};
  const auto g = gram_ntk_mc(single, kGauss, kId, 40, 9);
  const auto witness = witness_from_gram(g, single, kId, 1.0);
  CHECK(witness.guaranteed_margin() == doctest::Approx(1.0).epsilon(1e-12));

  Matrix probes(200, 1);
  Rng rng(10);
  for (std::size_t k = 0; k < probes.rows(); ++k) probes(k, 0) = rng.normal();
  CHECK(witness.achieved_margin(probes) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(witness.max_probed_norm(probes) <= 1.0 + 1e-12);

  // probed norms stay inside the unit ball on a generic instance
  const auto data = testutil::random_dataset(8, 3, 33);
  const auto gt = gram_ntk_mc(data, kGauss, kTanh, 4000, 12);
  if (min_eigenvalue(gt) > 1e-10) {
    const auto w2 = witness_from_gram(gt, data, kTanh, kTanh.k1);
    Matrix probes2(10000, 3);
    Rng rng2(44);
    std::vector<double> row(3);
    for (std::size_t k = 0; k < probes2.rows(); ++k) {
      kGauss.sample_row(rng2, probes2.row(k));
    }
    CHECK(w2.max_probed_norm(probes2) <= 1.0 + 1e-12);
    CHECK(w2.achieved_margin(probes2) >=
          w2.guaranteed_margin() - 4.0 / std::sqrt(4000.0));
  }

  // separability implies cone positivity at the witness margin level: the
  // cone ratio dominates the squared guaranteed margin on solvable instances
  {
    const auto inst = testutil::random_dataset(10, 3, 71);
    const auto h = gram_ntk_mc(inst, kGauss, kTanh, 3000, 72);
    if (min_eigenvalue(h) > 1e-10) {
      const auto wit = witness_from_gram(h, inst, kTanh, kTanh.k1);
      const double ratio = cone_positivity_ratio(h, inst.y, 500, 73);
      const double implied = wit.guaranteed_margin() * wit.guaranteed_margin();
      CHECK(ratio >= implied - 1e-9);
    }
  }

  // singular gram is rejected with an explanation
  Dataset dup;
  dup.x = Matrix(2, 1);
  dup.x(0, 0) = 0.5;
  dup.x(1, 0) = 0.5;
  dup.y = {1.0, -1.0};
  const auto gs = gram_ntk_mc(dup, kGauss, kTanh, 100, 5);
  bool threw = false;
  try {
    witness_from_gram(gs, dup, kTanh, kTanh.k1);
  } catch (const std::runtime_error& e) {
    threw = std::string(e.what()).find("singular") != std::string::npos;
  }
  CHECK(threw);
}
