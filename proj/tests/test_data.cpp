#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "lgr/data.hpp"
#include "lgr/errors.hpp"

using lgr::Dataset;
using lgr::Vector;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("lgr_data_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("gen_sine: clean targets, determinism and noise statistics") {
  const Dataset clean = lgr::gen_sine(50, 0.0, 3);
  CHECK(clean.n() == 50);
  CHECK(clean.dim() == 1);
  CHECK((clean.targets - clean.clean_targets).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < clean.n(); ++i) {
    CHECK(clean.inputs(i, 0) >= 0.0);
    CHECK(clean.inputs(i, 0) <= 2.0 * std::acos(-1.0));
    CHECK(clean.clean_targets(i) == doctest::Approx(std::sin(clean.inputs(i, 0))));
  }

  const Dataset a = lgr::gen_sine(100, 0.3, 17);
  const Dataset b = lgr::gen_sine(100, 0.3, 17);
  CHECK((a.inputs - b.inputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.targets - b.targets).cwiseAbs().maxCoeff() == 0.0);

  const int n = 100000;
  const double noise_sd = 0.5;
  const Dataset big = lgr::gen_sine(n, noise_sd, 11);
  const double residual_mean = (big.targets - big.clean_targets).mean();
  CHECK(std::abs(residual_mean) < 4.0 * noise_sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gen_sine rejects bad arguments") {
  CHECK_THROWS_AS(lgr::gen_sine(0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(lgr::gen_sine(10, -0.1, 1), std::invalid_argument);
}

TEST_CASE("cross2d_value: evaluation of the three-bump max") {
  CHECK(lgr::cross2d_value(0.0, 0.0) == doctest::Approx(1.25).epsilon(1e-15));
  // On the x2 = 0 ridge the narrow bump dominates.
  CHECK(lgr::cross2d_value(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lgr::cross2d_value(-1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  // Away from both ridges the radial bump wins.
  const double r = std::sqrt(0.5);
  CHECK(lgr::cross2d_value(r, r) == doctest::Approx(1.25 * std::exp(-5.0)).epsilon(1e-12));
  CHECK(lgr::cross2d_value(0.6, 0.35) ==
        doctest::Approx(std::max({std::exp(-10.0 * 0.36), std::exp(-50.0 * 0.1225),
                                  1.25 * std::exp(-5.0 * (0.36 + 0.1225))}))
            .epsilon(1e-14));
}

TEST_CASE("gen_cross2d and cross2d_grid follow the protocol shapes") {
  const Dataset train = lgr::gen_cross2d(2000, 0.2, 1);
  CHECK(train.n() == 2000);
  CHECK(train.dim() == 2);
  CHECK(train.inputs.minCoeff() >= -1.0);
  CHECK(train.inputs.maxCoeff() <= 1.0);
  for (int i = 0; i < 20; ++i) {
    CHECK(train.clean_targets(i) ==
          doctest::Approx(lgr::cross2d_value(train.inputs(i, 0), train.inputs(i, 1))));
  }
  // noise sd 0.2: residual variance should be near 0.04
  const double rv = (train.targets - train.clean_targets).array().square().mean();
  CHECK(rv == doctest::Approx(0.04).epsilon(0.15));

  const Dataset grid = lgr::cross2d_grid(41);
  CHECK(grid.n() == 41 * 41);
  CHECK(grid.dim() == 2);
  CHECK((grid.targets - grid.clean_targets).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grid.inputs.col(0).minCoeff() == -1.0);
  CHECK(grid.inputs.col(0).maxCoeff() == 1.0);
}

TEST_CASE("load_csv recovers a hand-written matrix exactly") {
  TempDir tmp;
  const std::string path = tmp.file("tiny.csv");
  {
    std::ofstream out(path);
    out << "a,b,y\n1.5,-2,0.25\n0,3.125,1\n-4.5,0.5,2\n";
  }
  const Dataset d = lgr::load_csv(path, "y");
  CHECK(d.n() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.inputs(0, 0) == 1.5);
  CHECK(d.inputs(0, 1) == -2.0);
  CHECK(d.inputs(1, 1) == 3.125);
  CHECK(d.inputs(2, 0) == -4.5);
  CHECK(d.targets(0) == 0.25);
  CHECK(d.targets(2) == 2.0);
}

TEST_CASE("load_csv column selection mimics a 21-input multi-torque layout") {
  TempDir tmp;
  const std::string path = tmp.file("sarcos_like.csv");
  {
    std::ofstream out(path);
    for (int j = 1; j <= 7; ++j) out << "q" << j << ",";
    for (int j = 1; j <= 7; ++j) out << "qd" << j << ",";
    for (int j = 1; j <= 7; ++j) out << "qdd" << j << ",";
    for (int j = 1; j <= 7; ++j) out << "tau" << j << (j < 7 ? "," : "\n");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 28; ++c) out << (r + c * 0.5) << (c < 27 ? "," : "\n");
    }
  }
  // Without selection, the other six torque columns leak into the inputs.
  const Dataset leaky = lgr::load_csv(path, "tau1");
  CHECK(leaky.dim() == 27);
  // With selection, exactly the 21 joint-state columns remain.
  const Dataset d = lgr::load_csv(path, "tau1", {"q*", "qd*", "qdd*"});
  CHECK(d.dim() == 21);
  CHECK(d.n() == 3);
  CHECK(d.targets(1) == doctest::Approx(1.0 + 21 * 0.5));
}

TEST_CASE("load_csv error paths carry diagnostics") {
  TempDir tmp;
  CHECK_THROWS_AS(lgr::load_csv(tmp.file("missing.csv"), "y"), lgr::DataError);

  const std::string empty = tmp.file("empty.csv");
  std::ofstream(empty).close();
  CHECK_THROWS_AS(lgr::load_csv(empty, "y"), lgr::DataError);

  const std::string bad_cell = tmp.file("bad.csv");
  {
    std::ofstream out(bad_cell);
    out << "a,y\n1,2\nfoo,3\n";
  }
  try {
    lgr::load_csv(bad_cell, "y");
    FAIL("expected DataError");
  } catch (const lgr::DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("'a'") != std::string::npos);
  }

  const std::string no_target = tmp.file("no_target.csv");
  {
    std::ofstream out(no_target);
    out << "a,b\n1,2\n";
  }
  CHECK_THROWS_AS(lgr::load_csv(no_target, "y"), lgr::DataError);
}

TEST_CASE("save_csv / load_csv round-trips values exactly") {
  TempDir tmp;
  Dataset d;
  d.inputs.resize(4, 2);
  d.inputs << 0.1, -1.0 / 3.0, 1e-17, 2.5e300, -0.0, 3.141592653589793, 7.0, -1e-300;
  d.targets.resize(4);
  d.targets << 1.0 / 7.0, -2.0, 0.0, 1e300;
  const std::string path = tmp.file("roundtrip.csv");
  lgr::save_csv(path, d);
  const Dataset back = lgr::load_csv(path, "y");
  CHECK(back.n() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(back.targets(i) == d.targets(i));
    for (int j = 0; j < 2; ++j) CHECK(back.inputs(i, j) == d.inputs(i, j));
  }
}

TEST_CASE("mse and nmse definitions") {
  Vector t(2), p(2);
  t << 0.0, 2.0;
  p << 1.0, 1.0;
  CHECK(lgr::mse(p, t) == doctest::Approx(1.0));
  CHECK(lgr::nmse(p, t) == doctest::Approx(1.0));

  CHECK(lgr::mse(t, t) == 0.0);
  CHECK(lgr::nmse(t, t) == 0.0);

  // predicting the mean gives nmse exactly 1
  Vector t3(3);
  t3 << 1.0, 2.0, 6.0;
  const Vector pm = Vector::Constant(3, t3.mean());
  CHECK(lgr::nmse(pm, t3) == doctest::Approx(1.0).epsilon(1e-12));

  // scale-free
  const double scaled = lgr::nmse(3.0 * pm, (3.0 * t3).eval());
  CHECK(scaled == doctest::Approx(lgr::nmse(pm, t3)).epsilon(1e-12));

  CHECK_THROWS_AS(lgr::nmse(pm, Vector::Constant(3, 1.0)), std::invalid_argument);
  Vector short_v(1);
  short_v << 1.0;
  CHECK_THROWS_AS(lgr::nmse(short_v, short_v), std::invalid_argument);
}

TEST_CASE("train_test_split is seeded, disjoint and exhaustive") {
  const Dataset d = lgr::gen_sine(10, 0.1, 5);
  auto [first, second] = lgr::train_test_split(d, 0.5, 42);
  CHECK(first.n() == 5);
  CHECK(second.n() == 5);

  auto [f2, s2] = lgr::train_test_split(d, 0.5, 42);
  CHECK((first.inputs - f2.inputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((second.targets - s2.targets).cwiseAbs().maxCoeff() == 0.0);

  // every original row appears exactly once across the two parts
  std::vector<double> seen;
  for (int i = 0; i < first.n(); ++i) seen.push_back(first.inputs(i, 0));
  for (int i = 0; i < second.n(); ++i) seen.push_back(second.inputs(i, 0));
  std::sort(seen.begin(), seen.end());
  std::vector<double> orig(d.inputs.col(0).data(), d.inputs.col(0).data() + d.n());
  std::sort(orig.begin(), orig.end());
  for (int i = 0; i < d.n(); ++i) CHECK(seen[i] == orig[i]);

  CHECK_THROWS_AS(lgr::train_test_split(d, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(lgr::train_test_split(d, 1.0, 1), std::invalid_argument);
}
