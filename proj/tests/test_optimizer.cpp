#include <cmath>
#include <fstream>

#include "doctest.h"
#include "ntklab/optimizer.hpp"
#include "ntklab/teacher.hpp"
#include "test_util.hpp"

using namespace ntklab;

namespace {

const ActivationSpec kTanh = ActivationSpec::parse("tanh");
const InitDistribution kGauss = InitDistribution::gaussian(1.0);

Dataset teacher_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  TeacherSpec spec;
  spec.margin_floor = 0.2;
  return generate(spec, n, d, seed).data;
}

}  // namespace

TEST_CASE("eta = 0 freezes the trajectory; T = 0 logs only the start") {
  const auto data = teacher_set(12, 3, 1);
  const auto p0 = init_symmetric(8, 3, kGauss, kTanh, 2);

  GDConfig frozen;
  frozen.eta = 0.0;
  frozen.T = 10;
  frozen.log_every = 1;
  const auto log = gd_run(p0, data, frozen);
  REQUIRE(log.rows.size() == 11);
  for (const auto& row : log.rows) {
    CHECK(row.loss == log.rows[0].loss);
    CHECK(row.dist_init == 0.0);
  }

  GDConfig empty;
  empty.eta = 0.1;
  empty.T = 0;
  const auto log0 = gd_run(p0, data, empty);
  CHECK(log0.rows.size() == 1);
  CHECK(log0.rows[0].t == 0);
  CHECK(log0.steps_completed == 0);
  CHECK(log0.rows[0].loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss is monotone under the smoothness step size") {
  Rng rng(7);
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t m = 2 * (1 + rng.below(16));
    const std::size_t d = 2 + rng.below(4);
    const std::size_t n = 4 + rng.below(12);
    const double beta = 0.25 * static_cast<double>(rng.below(3));
    const auto data = teacher_set(n, d, rng.next_u64());
    const auto p0 = init_symmetric(m, d, kGauss, kTanh, rng.next_u64());

    const double md = static_cast<double>(m);
    const double big_m =
        (kTanh.k1 * kTanh.k1 + kTanh.k2) / (4.0 * std::pow(md, 2.0 * beta - 1.0));
    NetParams p0b = p0;
    p0b.beta = beta;
    GDConfig cfg;
    cfg.eta = (0.2 + 0.8 * rng.uniform01()) / big_m;
    cfg.T = 40;
    cfg.log_every = 1;
    const auto log = gd_run(p0b, data, cfg);
    REQUIRE(log.steps_completed == 40);
    for (std::size_t k = 1; k < log.rows.size(); ++k) {
      CHECK(log.rows[k].loss <= log.rows[k - 1].loss + 1e-12);
    }
    // aggregate and distance conclusions of the descent lemma
    const double mean_grad = log.sum_grad_param_sq / 40.0;
    CHECK(mean_grad <= 2.0 * std::log(2.0) / (cfg.eta * 40.0) + 1e-12);
    CHECK(log.final_dist_init <=
          std::sqrt(2.0 * cfg.eta * 40.0 * std::log(2.0)) + 1e-12);
    CHECK(log.final_dist_init_21 <=
          std::sqrt(md) * log.final_dist_init * (1.0 + 1e-12));
  }
}

TEST_CASE("trajectory logs are deterministic") {
  const auto data = teacher_set(16, 4, 5);
  const auto p0 = init_symmetric(12, 4, kGauss, kTanh, 6);
  GDConfig cfg;
  cfg.eta = 0.05;
  cfg.T = 25;
  cfg.log_every = 5;
  cfg.gamma_list = {0.0, 0.1};
  const auto a = gd_run(p0, data, cfg, &data);
  const auto b = gd_run(p0, data, cfg, &data);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].loss == b.rows[k].loss);
    CHECK(a.rows[k].grad_param_sq == b.rows[k].grad_param_sq);
    CHECK(a.rows[k].grad_l1 == b.rows[k].grad_l1);
    CHECK(a.rows[k].dist_init == b.rows[k].dist_init);
    CHECK(*a.rows[k].test_err == *b.rows[k].test_err);
  }
  CHECK(a.sum_grad_l1_sq == b.sum_grad_l1_sq);
  CHECK(a.sum_loss == b.sum_loss);
}

TEST_CASE("divergence guard aborts with the last finite state") {
  const auto data = teacher_set(10, 3, 8);
  // identity activation leaves the loss unbounded, so the guard must trip
  const auto p0 = init_symmetric(6, 3, kGauss, ActivationSpec::parse("identity"), 9);
  GDConfig cfg;
  cfg.eta = 1e6;  // far beyond any stability region
  cfg.T = 50;
  cfg.log_every = 50;
  const auto log = gd_run(p0, data, cfg);
  CHECK((log.diverged || log.aborted_nonfinite));
  CHECK(!log.abort_note.empty());
  CHECK(!log.rows.empty());
  for (const auto& row : log.rows) CHECK(std::isfinite(row.loss));
}

TEST_CASE("descent budget arithmetic") {
  const auto b = descent_budget(1000, 0.0, 0.5, kTanh.k1, kTanh.k2);
  CHECK(b.eta_max == doctest::Approx(4.0 / (1000.0 * (1.0 + kTanh.k2))).epsilon(1e-12));
  CHECK(b.eta_max == doctest::Approx(2.2601e-3).epsilon(1e-4));
  CHECK(b.t_max == 8415);
  CHECK(!b.t_unbounded);

  const auto id = descent_budget(100, 0.0, 0.5, 1.0, 0.0);
  CHECK(id.t_unbounded);

  const auto half = descent_budget(100, 0.5, 0.5, kTanh.k1, kTanh.k2);
  CHECK(half.eta_max ==
        doctest::Approx(std::min(10.0, 4.0 / (1.0 + kTanh.k2))).epsilon(1e-12));
  CHECK_THROWS(descent_budget(100, 0.0, 0.0, 1.0, 1.0));
}

TEST_CASE("rate schedules") {
  const auto c3 = rate_schedule(ScheduleVariant::L1Rate, 0.1, 0.5, 0.0);
  CHECK(c3.m == 20);
  CHECK(c3.T == 400);
  CHECK(c3.eta == doctest::Approx(0.05).epsilon(1e-12));

  const auto c6 = rate_schedule(ScheduleVariant::LossRate, 0.1, 1.0, 0.0);
  CHECK(c6.m == 74);
  CHECK(c6.T == 54);
  CHECK(c6.eta == doctest::Approx(1.0 / 74.0).epsilon(1e-12));

  // halving eps under the l1-rate schedule at beta = 0 doubles m and quadruples T
  const auto fine = rate_schedule(ScheduleVariant::L1Rate, 0.05, 0.5, 0.0);
  CHECK(fine.m == 2 * c3.m);
  CHECK(fine.T == 4 * c3.T);

  CHECK_THROWS(rate_schedule(ScheduleVariant::L1Rate, 1.5, 0.5, 0.0));
  CHECK_THROWS(rate_schedule(ScheduleVariant::L1Rate, 0.1, -1.0, 0.0));
}

TEST_CASE("reference point from a certificate") {
  TeacherSpec spec;
  spec.margin_floor = 0.3;
  const auto data = generate(spec, 30, 4, 11).data;
  const auto p0 = init_symmetric(64, 4, kGauss, kTanh, 12);
  const auto cert = estimate_margin(p0, data, 800, 1e-9);
  REQUIRE(cert.rho_hat > 0.0);

  const auto same = build_reference_point(p0, cert, 0.0);
  for (std::size_t k = 0; k < p0.theta.data().size(); ++k) {
    CHECK(same.theta.data()[k] == p0.theta.data()[k]);
  }

  const double alpha = cert.rho_hat / (4.0 * kTanh.k2);
  const auto ref = build_reference_point(p0, cert, alpha);
  double v_sq = 0.0;
  for (std::size_t r = 0; r < cert.v.rows(); ++r) v_sq += squared_norm(cert.v.row(r));
  CHECK(param_distance(ref, p0) == doctest::Approx(alpha * std::sqrt(v_sq)).epsilon(1e-12));
  CHECK(param_distance(ref, p0) <= alpha * std::sqrt(64.0) + 1e-12);

  // margin transported to the reference point: y f(x) >= alpha rho m^(1-beta)/4
  const double floor =
      alpha * cert.rho_hat * std::pow(64.0, 1.0 - p0.beta) / 4.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    CHECK(data.y[i] * forward(ref, data.x.row(i)) >= floor - 1e-12);
  }

  MarginCertificate bad = cert;
  bad.v = Matrix(2, 4);
  CHECK_THROWS(build_reference_point(p0, bad, alpha));
}

TEST_CASE("trajectory csv has the promised columns") {
  const auto data = teacher_set(8, 2, 13);
  const auto p0 = init_symmetric(4, 2, kGauss, kTanh, 14);
  GDConfig cfg;
  cfg.eta = 0.1;
  cfg.T = 4;
  cfg.log_every = 2;
  cfg.gamma_list = {0.0, 0.5};
  const auto log = gd_run(p0, data, cfg);
  const std::string path = "/tmp/ntklab_traj_test.csv";
  write_trajectory_csv(log, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,loss,grad_param_sq,grad_l1,dist_init,dist_init_21,train_err,"
        "margin_frac_0,margin_frac_0.5,test_err");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == log.rows.size());
  std::remove(path.c_str());
}
