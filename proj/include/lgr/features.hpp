#pragma once

#include <Eigen/Core>

namespace lgr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Read-only views that also bind to row blocks (e.g. X.topRows(n)) and
/// contiguous segments without copying.
using MatrixRef = Eigen::Ref<const Matrix, Eigen::Unaligned, Eigen::OuterStride<>>;
using VectorRef = Eigen::Ref<const Vector>;

/// Location of a local model in input space.
struct Center {
  Vector c;

  int dim() const { return static_cast<int>(c.size()); }
};

/// Per-dimension length scales of a localizer, kept in log space so that
/// gradient steps can never drive a scale non-positive.
struct LengthScales {
  Vector log_lambda;

  int dim() const { return static_cast<int>(log_lambda.size()); }
  Vector lambdas() const { return log_lambda.array().exp(); }

  static LengthScales from_lambda(const Vector& lambda);
};

/// Unnormalized RBF localizer weight eta_m(x) in (0, 1].
double rbf_weight(const Vector& x, const Center& center, const LengthScales& scales);

/// Localized linear feature vector phi = eta(x) * [1, x - c], length D + 1.
Vector local_features(const Vector& x, const Center& center, const LengthScales& scales);

/// d phi / d log(lambda_d); every entry of phi scales by (x_d - c_d)^2 / lambda_d^2.
Vector dphi_dlog_lambda(const Vector& x, const Center& center, const LengthScales& scales,
                        int d);

/// Localizer weights for every row of X (N-vector).
Vector rbf_weights(const MatrixRef& X, const Center& center, const LengthScales& scales);

/// Feature matrix for every row of X: N x (D + 1), row n = local_features(x_n).
Matrix feature_matrix(const MatrixRef& X, const Center& center, const LengthScales& scales);

}  // namespace lgr
