#include "lgr/lwr.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace lgr {

namespace {

constexpr double kBlendEpsilon = 1e-12;

LengthScales row_scales(const Matrix& scales, int m) {
  return LengthScales::from_lambda(scales.row(m).transpose());
}

}  // namespace

LWRModel lwr_fit(const Dataset& data, const Matrix& centers, const Matrix& scales,
                 double ridge) {
  const int m_count = static_cast<int>(centers.rows());
  if (m_count < 1) throw std::invalid_argument("lwr_fit: need at least one center");
  if (centers.cols() != data.dim() || scales.rows() != m_count ||
      scales.cols() != data.dim()) {
    throw std::invalid_argument("lwr_fit: center/scale dimension mismatch");
  }
  if (!(ridge >= 0.0)) throw std::invalid_argument("lwr_fit: ridge must be >= 0");

  const int k = data.dim() + 1;
  LWRModel model;
  model.centers = centers;
  model.scales = scales;
  model.ridge = ridge;
  model.weights.resize(m_count, k);

  for (int m = 0; m < m_count; ++m) {
    const Center center{centers.row(m).transpose()};
    const LengthScales ls = row_scales(scales, m);
    const Vector eta = rbf_weights(data.inputs, center, ls);

    // Local basis xi = [1, x - c]; the quadratic loss weights rows by eta.
    Matrix xi(data.n(), k);
    xi.col(0).setOnes();
    xi.rightCols(data.dim()) = data.inputs.rowwise() - centers.row(m);

    const Matrix weighted = xi.array().colwise() * eta.array();
    Matrix system = weighted.transpose() * xi;
    system.diagonal().array() += ridge;
    auto llt = detail::chol_spd(system, "lwr_fit: model " + std::to_string(m));
    model.weights.row(m) = llt.solve(weighted.transpose() * data.targets).transpose();
  }
  return model;
}

double lwr_predict(const LWRModel& model, const Vector& x, bool* used_fallback) {
  if (x.size() != model.dim()) throw std::invalid_argument("lwr_predict: dimension mismatch");
  if (used_fallback) *used_fallback = false;

  double num = 0.0;
  double den = 0.0;
  double nearest_value = 0.0;
  double nearest_dist = std::numeric_limits<double>::infinity();
  for (int m = 0; m < model.model_count(); ++m) {
    const Center center{model.centers.row(m).transpose()};
    const double eta = rbf_weight(x, center, row_scales(model.scales, m));
    Vector xi(x.size() + 1);
    xi(0) = 1.0;
    xi.tail(x.size()) = x - center.c;
    const double local = model.weights.row(m).dot(xi);
    num += eta * local;
    den += eta;
    const double dist = (x - center.c).squaredNorm();
    if (dist < nearest_dist) {
      nearest_dist = dist;
      nearest_value = local;
    }
  }
  if (den <= kBlendEpsilon) {
    if (used_fallback) *used_fallback = true;
    return nearest_value;
  }
  return num / den;
}

Vector lwr_predict_batch(const LWRModel& model, const Matrix& X) {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out(i) = lwr_predict(model, X.row(i).transpose());
  }
  return out;
}

Matrix lwr_place_centers(const Dataset& data, double w_gen, const Vector& lambda_init) {
  if (!(w_gen > 0.0 && w_gen <= 1.0)) {
    throw std::invalid_argument("lwr_place_centers: w_gen must be in (0, 1]");
  }
  Vector lambda = lambda_init.size() == 1 ? Vector::Constant(data.dim(), lambda_init(0))
                    : lambda_init;
  const LengthScales ls = LengthScales::from_lambda(lambda);

  std::vector<Vector> centers;
  for (int i = 0; i < data.n(); ++i) {
    const Vector x = data.inputs.row(i).transpose();
    bool covered = false;
    for (const auto& c : centers) {
      if (rbf_weight(x, Center{c}, ls) >= w_gen) {
        covered = true;
        break;
      }
    }
    if (!covered) centers.push_back(x);
  }
  Matrix out(centers.size(), data.dim());
  for (size_t m = 0; m < centers.size(); ++m) out.row(m) = centers[m].transpose();
  return out;
}

}  // namespace lgr
