#include "lgr/features.hpp"

#include <cmath>
#include <stdexcept>

namespace lgr {

namespace {

// Exponent clamp before exponentiation; weights below the flush limit are
// set to exactly zero to keep denormals out of the O(NM) inner loops.
constexpr double kMinExponent = -700.0;
constexpr double kFlushLimit = 1e-300;

void check_dims(const Vector& x, const Center& center, const LengthScales& scales) {
  if (x.size() != center.c.size() || x.size() != scales.log_lambda.size()) {
    throw std::invalid_argument("features: dimension mismatch between x, center and scales");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("features: non-finite input coordinate");
  }
}

inline double clamped_exp(double exponent) {
  const double w = std::exp(exponent < kMinExponent ? kMinExponent : exponent);
  return w < kFlushLimit ? 0.0 : w;
}

}  // namespace

LengthScales LengthScales::from_lambda(const Vector& lambda) {
  if ((lambda.array() <= 0.0).any() || !lambda.allFinite()) {
    throw std::invalid_argument("LengthScales: lambda must be strictly positive and finite");
  }
  return LengthScales{lambda.array().log()};
}

double rbf_weight(const Vector& x, const Center& center, const LengthScales& scales) {
  check_dims(x, center, scales);
  const Eigen::ArrayXd z = (x - center.c).array() * (-scales.log_lambda).array().exp();
  return clamped_exp(-0.5 * z.square().sum());
}

Vector local_features(const Vector& x, const Center& center, const LengthScales& scales) {
  const double eta = rbf_weight(x, center, scales);
  Vector phi(x.size() + 1);
  phi(0) = eta;
  phi.tail(x.size()) = eta * (x - center.c);
  return phi;
}

Vector dphi_dlog_lambda(const Vector& x, const Center& center, const LengthScales& scales,
                        int d) {
  if (d < 0 || d >= scales.dim()) {
    throw std::invalid_argument("dphi_dlog_lambda: dimension index out of range");
  }
  const double diff = x(d) - center.c(d);
  const double inv_lambda = std::exp(-scales.log_lambda(d));
  const double factor = diff * diff * inv_lambda * inv_lambda;
  return factor * local_features(x, center, scales);
}

Vector rbf_weights(const MatrixRef& X, const Center& center, const LengthScales& scales) {
  if (X.cols() != center.c.size() || X.cols() != scales.log_lambda.size()) {
    throw std::invalid_argument("rbf_weights: dimension mismatch");
  }
  const Eigen::ArrayXd inv_lambda = (-scales.log_lambda).array().exp();
  Vector eta(X.rows());
  for (Eigen::Index n = 0; n < X.rows(); ++n) {
    const Eigen::ArrayXd z = (X.row(n).transpose() - center.c).array() * inv_lambda;
    eta(n) = clamped_exp(-0.5 * z.square().sum());
  }
  return eta;
}

Matrix feature_matrix(const MatrixRef& X, const Center& center, const LengthScales& scales) {
  const Vector eta = rbf_weights(X, center, scales);
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  Matrix phi(n, d + 1);
  phi.col(0) = eta;
  phi.rightCols(d) = (X.rowwise() - center.c.transpose()).array().colwise() * eta.array();
  return phi;
}

}  // namespace lgr
