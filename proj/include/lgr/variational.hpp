#pragma once

#include <span>
#include <vector>

#include "lgr/features.hpp"

namespace lgr {

/// Gaussian posterior factor q(w_m) of one local model.
struct WeightPosterior {
  Vector mu_w;     // K
  Matrix sigma_w;  // K x K, symmetric positive definite
};

/// Gaussian factor q(f) over the per-datum latent targets. The shared M x M
/// covariance is diag(b_inv) - b_inv b_inv^T / denom and is never
/// materialized; b_inv and denom are the values the factor was formed with.
struct LatentTargets {
  Matrix mu_f;        // N x M latent means
  Vector b_inv;       // M, diagonal of B^-1
  double denom = 0;   // 1/beta_y + 1^T B^-1 1
  double beta_y_inv = 0;

  /// sigma_fm^2, the m-th diagonal entry of the latent covariance.
  double sigma_f_diag(int m) const {
    const double b = b_inv(m);
    const double others = b_inv.sum() - b;
    return b * (beta_y_inv + others) / denom;
  }
  /// 1^T Sigma_f 1.
  double sum_sigma_f() const {
    const double s = b_inv.sum();
    return s * beta_y_inv / denom;
  }
  double logdet_sigma_f() const {
    return b_inv.array().log().sum() + std::log(beta_y_inv) - std::log(denom);
  }
};

/// Point estimates of the model precisions.
struct Precisions {
  double beta_y = 0;  // observation precision
  Vector beta_f;      // M per-model precisions
  Matrix alpha;       // M x K ARD precisions, row m for model m
};

/// Per-model design blocks. Views into caller-owned storage; gram must equal
/// phi^T phi for the same rows.
struct ModelFeatures {
  MatrixRef phi;   // N x K localized features
  MatrixRef gram;  // K x K

  Eigen::Index rows() const { return phi.rows(); }
  Eigen::Index k() const { return phi.cols(); }
};

/// Builds an owning (phi, gram) pair for use as ModelFeatures.
std::pair<Matrix, Matrix> build_features(const Matrix& X, const Center& center,
                                         const LengthScales& scales);

/// Weight updates: Sigma_wm = (beta_fm sum_n phi phi^T + A_m)^-1 and
/// mu_wm = beta_fm Sigma_wm sum_n phi E[f_nm]. Models update independently.
std::vector<WeightPosterior> e_step_weights(std::span<const ModelFeatures> features,
                                            const LatentTargets& latents,
                                            const Precisions& precisions);

/// Latent-target updates: each mu_fn is the per-model prediction plus a
/// B^-1 1 / denom share of the residual y_n - sum_m mu_wm^T phi_m^n.
LatentTargets e_step_latents(const VectorRef& y, std::span<const ModelFeatures> features,
                             std::span<const WeightPosterior> weights,
                             const Precisions& precisions);

/// Closed-form observation precision: 1/beta_y = mean squared latent-sum
/// residual + 1^T Sigma_f 1, with the variance floored.
double m_step_beta_y(const VectorRef& y, const LatentTargets& latents, double var_floor);

/// Closed-form model precision for model m.
double m_step_beta_f(const ModelFeatures& features_m, const WeightPosterior& weights_m,
                     const LatentTargets& latents, int m, double var_floor);

/// Closed-form ARD precision: alpha_mk = 1 / (mu_wmk^2 + Sigma_w[k,k]), capped.
double m_step_alpha(const WeightPosterior& weights_m, int k, double alpha_max);

/// Gradient of the expected model-m log-likelihood with respect to the log
/// length scales of model m (D-vector).
Vector lambda_gradient(const MatrixRef& X, const Center& center, const LengthScales& scales,
                       const ModelFeatures& features_m, const WeightPosterior& weights_m,
                       const LatentTargets& latents, int m, double beta_fm);

/// One gradient-ascent step on the log length scales, clamped to
/// [log_lambda_min, log_lambda_max].
LengthScales lambda_ascent_step(const LengthScales& scales, const Vector& gradient, double rate,
                                double log_lambda_min, double log_lambda_max);

/// The variational free energy E_q[log p(y, f, w)] + H[q(f)] + H[q(w)].
double elbo(const VectorRef& y, std::span<const ModelFeatures> features,
            std::span<const WeightPosterior> weights, const LatentTargets& latents,
            const Precisions& precisions);

}  // namespace lgr
