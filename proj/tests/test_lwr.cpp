#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <unistd.h>

#include "lgr/data.hpp"
#include "lgr/errors.hpp"
#include "lgr/lwr.hpp"
#include "lgr/serialize.hpp"
#include "oracles.hpp"

using lgr::Dataset;
using lgr::LWRModel;
using lgr::Matrix;
using lgr::Vector;

namespace {

Dataset line_data(int n, double slope, double intercept) {
  Dataset d;
  d.inputs.resize(n, 1);
  d.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    d.inputs(i, 0) = -1.0 + 2.0 * i / (n - 1);
    d.targets(i) = slope * d.inputs(i, 0) + intercept;
  }
  return d;
}

}  // namespace

TEST_CASE("lwr_fit recovers an exact line through one model") {
  const Dataset d = line_data(50, 2.0, 0.0);
  const Matrix centers = Matrix::Zero(1, 1);
  const Matrix scales = Matrix::Constant(1, 1, 0.5);
  const LWRModel model = lgr::lwr_fit(d, centers, scales, 1e-12);
  CHECK(model.weights(0, 0) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(model.weights(0, 1) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("lwr_fit on constant targets puts the level into every bias") {
  Dataset d = line_data(30, 0.0, 3.0);
  Matrix centers(3, 1);
  centers << -0.5, 0.0, 0.5;
  const Matrix scales = Matrix::Constant(3, 1, 0.3);
  const LWRModel model = lgr::lwr_fit(d, centers, scales, 1e-12);
  for (int m = 0; m < 3; ++m) {
    CHECK(model.weights(m, 0) == doctest::Approx(3.0).epsilon(1e-8));
  }
}

TEST_CASE("doubling the ridge never increases a weight norm") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d;
  d.inputs.resize(40, 2);
  d.targets.resize(40);
  for (int i = 0; i < 40; ++i) {
    d.inputs(i, 0) = g(rng);
    d.inputs(i, 1) = g(rng);
    d.targets(i) = std::sin(d.inputs(i, 0)) + 0.2 * g(rng);
  }
  Matrix centers(2, 2);
  centers << 0.0, 0.0, 1.0, -0.5;
  const Matrix scales = Matrix::Constant(2, 2, 0.8);
  double ridge = 1e-6;
  double previous = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 12; ++step) {
    const LWRModel model = lgr::lwr_fit(d, centers, scales, ridge);
    const double norm = model.weights.norm();
    CHECK(norm <= previous + 1e-12);
    previous = norm;
    ridge *= 2.0;
  }
}

TEST_CASE("lwr_predict blends locally and falls back beyond all support") {
  Dataset d = line_data(60, 1.0, 0.5);
  Matrix centers(2, 1);
  centers << -0.5, 0.5;
  const Matrix scales = Matrix::Constant(2, 1, 0.2);
  const LWRModel model = lgr::lwr_fit(d, centers, scales, 1e-9);

  // at a center with the other localizer negligible, prediction is the bias
  auto near = lgr::lwr_predict(model, Vector::Constant(1, -0.5));
  CHECK(near == doctest::Approx(model.weights(0, 0)).epsilon(1e-3));

  // halfway between symmetric models, the blend is the arithmetic mean
  const double mid = lgr::lwr_predict(model, Vector::Constant(1, 0.0));
  Vector xi0(2), xi1(2);
  xi0 << 1.0, 0.5;
  xi1 << 1.0, -0.5;
  const double f0 = model.weights.row(0).dot(xi0);
  const double f1 = model.weights.row(1).dot(xi1);
  CHECK(mid == doctest::Approx(0.5 * (f0 + f1)).epsilon(1e-9));

  bool used_fallback = false;
  const double far = lgr::lwr_predict(model, Vector::Constant(1, 500.0), &used_fallback);
  CHECK(used_fallback);
  // nearest center is 0.5; its local line extrapolates
  Vector xi(2);
  xi << 1.0, 499.5;
  CHECK(far == doctest::Approx(model.weights.row(1).dot(xi)).epsilon(1e-9));
}

TEST_CASE("lwr_predict is a convex combination of the local predictions") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  Dataset d = lgr::gen_sine(80, 0.1, 5);
  const Matrix centers = lgr::lwr_place_centers(d, 0.3, Vector::Constant(1, 0.4));
  const Matrix scales = Matrix::Constant(centers.rows(), 1, 0.4);
  const LWRModel model = lgr::lwr_fit(d, centers, scales);
  for (int trial = 0; trial < 60; ++trial) {
    const Vector x = Vector::Constant(1, 3.14 + 3.0 * u(rng));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int m = 0; m < model.model_count(); ++m) {
      Vector xi(2);
      xi << 1.0, x(0) - model.centers(m, 0);
      const double local = model.weights.row(m).dot(xi);
      lo = std::min(lo, local);
      hi = std::max(hi, local);
    }
    const double blend = lgr::lwr_predict(model, x);
    CHECK(blend >= lo - 1e-9);
    CHECK(blend <= hi + 1e-9);
  }
}

TEST_CASE("models are trained independently: deleting one leaves the rest unchanged") {
  Dataset d = lgr::gen_sine(100, 0.1, 7);
  Matrix centers(3, 1);
  centers << 1.0, 3.0, 5.0;
  const Matrix scales = Matrix::Constant(3, 1, 0.5);
  const LWRModel full = lgr::lwr_fit(d, centers, scales);

  const LWRModel reduced = lgr::lwr_fit(d, centers.topRows(2), scales.topRows(2));
  CHECK((full.weights.topRows(2) - reduced.weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one near-uniform model equals global ridge regression") {
  Dataset d = lgr::gen_sine(50, 0.05, 9);
  const Matrix centers = Matrix::Constant(1, 1, 3.0);
  const Matrix scales = Matrix::Constant(1, 1, 1e6);
  const double ridge = 1e-4;
  const LWRModel model = lgr::lwr_fit(d, centers, scales, ridge);

  Matrix xi(d.n(), 2);
  xi.col(0).setOnes();
  xi.col(1) = d.inputs.col(0).array() - 3.0;
  const Vector direct = oracle::ridge(xi, d.targets, Vector::Constant(2, ridge));
  CHECK((model.weights.row(0).transpose() - direct).norm() / direct.norm() < 1e-8);
}

TEST_CASE("lwr_place_centers mirrors the greedy placement rule") {
  Dataset d = lgr::gen_sine(40, 0.1, 11);
  const Matrix all = lgr::lwr_place_centers(d, 1.0, Vector::Constant(1, 0.3));
  CHECK(all.rows() == 40);  // every distinct input becomes a center

  Dataset single;
  single.inputs = Matrix::Constant(1, 1, 0.7);
  single.targets = Vector::Constant(1, 0.0);
  CHECK(lgr::lwr_place_centers(single, 0.2, Vector::Constant(1, 0.3)).rows() == 1);

  // the cross protocol at w_gen = 0.2 keeps the center count moderate
  Dataset cross = lgr::gen_cross2d(2000, 0.2, 1);
  const Matrix placed = lgr::lwr_place_centers(cross, 0.2, Vector::Constant(2, 0.3));
  CHECK(placed.rows() >= 10);
  CHECK(placed.rows() <= 50);
}

TEST_CASE("lwr serialization round-trips with its own type tag") {
  Dataset d = lgr::gen_sine(30, 0.1, 13);
  const Matrix centers = lgr::lwr_place_centers(d, 0.4, Vector::Constant(1, 0.4));
  const Matrix scales = Matrix::Constant(centers.rows(), 1, 0.4);
  const LWRModel model = lgr::lwr_fit(d, centers, scales, 1e-5);

  const std::string path = (std::filesystem::temp_directory_path() /
                            ("lwr_model_" + std::to_string(::getpid()) + ".json"))
                               .string();
  lgr::save_model(path, model);
  CHECK(lgr::model_file_type(path) == "lwr");
  CHECK_THROWS_AS(lgr::load_lgr_model(path), lgr::DataError);
  const LWRModel back = lgr::load_lwr_model(path);
  std::filesystem::remove(path);

  CHECK(back.ridge == model.ridge);
  CHECK((back.centers - model.centers).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.scales - model.scales).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.weights - model.weights).cwiseAbs().maxCoeff() == 0.0);
}
