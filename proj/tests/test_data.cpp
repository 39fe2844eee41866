#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ntklab/margin.hpp"
#include "ntklab/teacher.hpp"
#include "oracles.hpp"

using namespace ntklab;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("linear teacher respects the margin floor") {
  TeacherSpec spec;
  spec.margin_floor = 0.1;
  spec.bias_coord = true;
  spec.s = 0.1;
  const auto gen = generate(spec, 60, 5, 3);
  CHECK(gen.data.n() == 60);
  CHECK(gen.data.dim() == 6);
  const double rescale = std::sqrt(1.0 + 0.01);
  for (std::size_t i = 0; i < gen.data.n(); ++i) {
    // teacher is e_0 over the rescaled features
    CHECK(std::abs(gen.data.x(i, 0)) >= 0.1 / rescale - 1e-12);
    CHECK(gen.data.x(i, 5) == doctest::Approx(0.1 / rescale).epsilon(1e-12));
    CHECK(norm2(gen.data.x.row(i)) <= 1.0 + 1e-12);
  }

  // identity-activation tangent margin is bounded below by the teacher margin
  const auto p0 = init_symmetric(8, 6, InitDistribution::gaussian(1.0),
                                 ActivationSpec::parse("identity"), 5);
  const auto cert = estimate_margin(p0, gen.data, 1200, 1e-9);
  CHECK(cert.rho_hat >= 0.1 / rescale - 1e-3);

  // and it matches the min-norm-point oracle
  Matrix signed_x(gen.data.n(), 6);
  for (std::size_t i = 0; i < gen.data.n(); ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      signed_x(i, j) = gen.data.y[i] * gen.data.x(i, j);
    }
  }
  const auto oracle = oracles::max_margin_oracle(signed_x);
  CHECK(std::abs(cert.rho_hat - oracle.lower) <= 1e-3);
}

TEST_CASE("tangent teacher generates certifiable data") {
  TeacherSpec spec;
  spec.kind = TeacherKind::TwoLayerTangent;
  spec.width = 32;
  spec.teacher_seed = 9;
  spec.margin_floor = 0.02;
  spec.bias_coord = true;
  spec.s = 0.2;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto gen = generate(spec, 40, 4, 100 + seed);
    const auto p0 = init_symmetric(128, gen.data.dim(), InitDistribution::gaussian(1.0),
                                   ActivationSpec::parse("tanh"), 7);
    const auto cert = estimate_margin(p0, gen.data, 600, 1e-9);
    CHECK(cert.rho_hat > 0.0);
  }
}

TEST_CASE("zero margin floor accepts nearly everything") {
  TeacherSpec spec;
  const auto gen = generate(spec, 200, 4, 11);
  CHECK(gen.acceptance_rate >= 0.999);
  CHECK(gen.n_pos + gen.n_neg == 200);
}

TEST_CASE("impossible margin floor exhausts the budget loudly") {
  TeacherSpec spec;
  spec.margin_floor = 0.999;  // |x0| can't reach this inside the ball often
  CHECK_THROWS_AS(generate(spec, 50, 8, 1), std::runtime_error);
}

TEST_CASE("generation is byte-deterministic") {
  TeacherSpec spec;
  spec.margin_floor = 0.1;
  const auto a = generate(spec, 4, 2, 77).data;
  const auto b = generate(spec, 4, 2, 77).data;
  const std::string pa = tmp_path("ntklab_gen_a.csv");
  const std::string pb = tmp_path("ntklab_gen_b.csv");
  save_csv(a, pa);
  save_csv(b, pb);
  CHECK(slurp(pa) == slurp(pb));
  fs::remove(pa);
  fs::remove(pb);
}

TEST_CASE("csv round-trip is exact") {
  TeacherSpec spec;
  spec.margin_floor = 0.05;
  const auto data = generate(spec, 25, 3, 13).data;
  const std::string path = tmp_path("ntklab_roundtrip.csv");
  save_csv(data, path);
  const auto back = load_csv(path);
  REQUIRE(back.n() == data.n());
  REQUIRE(back.dim() == data.dim());
  for (std::size_t i = 0; i < data.n(); ++i) {
    CHECK(back.y[i] == data.y[i]);
    for (std::size_t j = 0; j < data.dim(); ++j) {
      CHECK(std::abs(back.x(i, j) - data.x(i, j)) <= 1e-15);
    }
  }
  fs::remove(path);
}

TEST_CASE("csv rejects bad labels, bad norms, bad headers") {
  const std::string path = tmp_path("ntklab_bad.csv");
  auto write = [&](const char* text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
  };

  write("x0,x1,y\n0.1,0.2,0\n");
  bool label_msg = false;
  try {
    load_csv(path);
  } catch (const std::runtime_error& e) {
    label_msg = std::string(e.what()).find("label") != std::string::npos;
  }
  CHECK(label_msg);

  write("x0,x1,y\n1.5,0.0,1\n");
  bool norm_msg = false;
  try {
    load_csv(path);
  } catch (const std::runtime_error& e) {
    norm_msg = std::string(e.what()).find("||x||_2") != std::string::npos;
  }
  CHECK(norm_msg);

  write("a,b,y\n0.1,0.2,1\n");
  bool header_msg = false;
  try {
    load_csv(path);
  } catch (const std::runtime_error& e) {
    header_msg = std::string(e.what()).find("header") != std::string::npos;
  }
  CHECK(header_msg);

  write("x0,x1,y\n0.1,oops,1\n");
  CHECK_THROWS(load_csv(path));
  fs::remove(path);
}

TEST_CASE("split: sizes, disjoint union, determinism") {
  TeacherSpec spec;
  const auto data = generate(spec, 10, 3, 19).data;
  const auto [train, heldout] = split(data, 0.5, 101);
  CHECK(train.n() == 5);
  CHECK(heldout.n() == 5);

  // union equals the original multiset (compare sorted flattened rows)
  auto flatten = [](const Dataset& d) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < d.n(); ++i) {
      std::vector<double> r(d.x.row(i).begin(), d.x.row(i).end());
      r.push_back(d.y[i]);
      rows.push_back(std::move(r));
    }
    return rows;
  };
  auto all = flatten(train);
  auto held = flatten(heldout);
  all.insert(all.end(), held.begin(), held.end());
  auto orig = flatten(data);
  std::sort(all.begin(), all.end());
  std::sort(orig.begin(), orig.end());
  CHECK(all == orig);

  const auto [train2, heldout2] = split(data, 0.5, 101);
  CHECK(flatten(train2) == flatten(train));

  CHECK_THROWS(split(data, 0.0, 1));
  CHECK_THROWS(split(data, 1.0, 1));
  Dataset tiny;
  tiny.x = Matrix(1, 2);
  tiny.y = {1.0};
  CHECK_THROWS(split(tiny, 0.5, 1));
}
