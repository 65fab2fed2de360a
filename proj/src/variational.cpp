#include "lgr/variational.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "linalg.hpp"

namespace lgr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_model_count(size_t features, Eigen::Index precisions_m, const char* where) {
  if (static_cast<Eigen::Index>(features) != precisions_m) {
    throw std::invalid_argument(std::string(where) + ": model count mismatch");
  }
}

}  // namespace

std::pair<Matrix, Matrix> build_features(const Matrix& X, const Center& center,
                                         const LengthScales& scales) {
  Matrix phi = feature_matrix(X, center, scales);
  Matrix gram = phi.transpose() * phi;
  return {std::move(phi), std::move(gram)};
}

std::vector<WeightPosterior> e_step_weights(std::span<const ModelFeatures> features,
                                            const LatentTargets& latents,
                                            const Precisions& precisions) {
  check_model_count(features.size(), precisions.beta_f.size(), "e_step_weights");
  const int m_count = static_cast<int>(features.size());
  std::vector<WeightPosterior> out(m_count);
  for (int m = 0; m < m_count; ++m) {
    const auto& fm = features[m];
    const Eigen::Index k = fm.k();
    Matrix system = precisions.beta_f(m) * fm.gram;
    system.diagonal() += precisions.alpha.row(m).transpose();
    auto llt = detail::chol_spd(system, "e_step_weights: model " + std::to_string(m));
    Matrix cov = llt.solve(Matrix::Identity(k, k));
    out[m].sigma_w = ((cov + cov.transpose()) * 0.5).eval();
    if (fm.rows() == 0) {
      out[m].mu_w = Vector::Zero(k);
    } else {
      out[m].mu_w = precisions.beta_f(m) * llt.solve(fm.phi.transpose() * latents.mu_f.col(m));
    }
  }
  return out;
}

LatentTargets e_step_latents(const VectorRef& y, std::span<const ModelFeatures> features,
                             std::span<const WeightPosterior> weights,
                             const Precisions& precisions) {
  check_model_count(features.size(), precisions.beta_f.size(), "e_step_latents");
  if (features.size() != weights.size()) {
    throw std::invalid_argument("e_step_latents: weights count mismatch");
  }
  const int m_count = static_cast<int>(features.size());
  const Eigen::Index n = y.size();

  LatentTargets latents;
  latents.b_inv = precisions.beta_f.cwiseInverse();
  latents.beta_y_inv = 1.0 / precisions.beta_y;
  latents.denom = latents.beta_y_inv + latents.b_inv.sum();

  latents.mu_f.resize(n, m_count);
  for (int m = 0; m < m_count; ++m) {
    latents.mu_f.col(m).noalias() = features[m].phi * weights[m].mu_w;
  }
  if (n > 0 && m_count > 0) {
    const Vector resid = y - latents.mu_f.rowwise().sum();
    latents.mu_f.noalias() += resid * (latents.b_inv / latents.denom).transpose();
  }
  return latents;
}

double m_step_beta_y(const VectorRef& y, const LatentTargets& latents, double var_floor) {
  const Eigen::Index n = y.size();
  if (n < 1) throw std::invalid_argument("m_step_beta_y: need at least one datum");
  const double ss = (y - latents.mu_f.rowwise().sum()).squaredNorm() / static_cast<double>(n);
  const double variance = ss + latents.sum_sigma_f();
  return 1.0 / std::max(variance, var_floor);
}

double m_step_beta_f(const ModelFeatures& features_m, const WeightPosterior& weights_m,
                     const LatentTargets& latents, int m, double var_floor) {
  const Eigen::Index n = features_m.rows();
  if (n < 1) throw std::invalid_argument("m_step_beta_f: need at least one datum");
  const Vector pred = features_m.phi * weights_m.mu_w;
  const double ss = (latents.mu_f.col(m) - pred).squaredNorm();
  const double traced = weights_m.sigma_w.cwiseProduct(features_m.gram).sum();
  const double variance = (ss + traced) / static_cast<double>(n) + latents.sigma_f_diag(m);
  return 1.0 / std::max(variance, var_floor);
}

double m_step_alpha(const WeightPosterior& weights_m, int k, double alpha_max) {
  if (k < 0 || k >= weights_m.mu_w.size()) {
    throw std::invalid_argument("m_step_alpha: weight index out of range");
  }
  const double second_moment = weights_m.mu_w(k) * weights_m.mu_w(k) + weights_m.sigma_w(k, k);
  return std::min(1.0 / second_moment, alpha_max);
}

Vector lambda_gradient(const MatrixRef& X, const Center& center, const LengthScales& scales,
                       const ModelFeatures& features_m, const WeightPosterior& weights_m,
                       const LatentTargets& latents, int m, double beta_fm) {
  if (m < 0 || m >= latents.mu_f.cols()) {
    throw std::invalid_argument("lambda_gradient: model index out of range");
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();

  const Vector pred = features_m.phi * weights_m.mu_w;
  // Per-datum quadratic form phi^T Sigma_w phi.
  const Vector quad =
      (features_m.phi * weights_m.sigma_w).cwiseProduct(features_m.phi).rowwise().sum();
  const Vector g = (latents.mu_f.col(m) - pred).cwiseProduct(pred) - quad;

  // s_nd = (x_nd - c_d)^2 / lambda_d^2; lambda enters phi only through eta.
  const Eigen::ArrayXd inv_lambda = (-scales.log_lambda).array().exp();
  Matrix s(n, d);
  s = ((X.rowwise() - center.c.transpose()).array().rowwise() * inv_lambda.transpose()).square();
  return beta_fm * (s.transpose() * g);
}

LengthScales lambda_ascent_step(const LengthScales& scales, const Vector& gradient, double rate,
                                double log_lambda_min, double log_lambda_max) {
  if (!(rate > 0.0)) throw std::invalid_argument("lambda_ascent_step: rate must be positive");
  if (gradient.size() != scales.log_lambda.size()) {
    throw std::invalid_argument("lambda_ascent_step: gradient dimension mismatch");
  }
  LengthScales next;
  next.log_lambda =
      (scales.log_lambda + rate * gradient).cwiseMax(log_lambda_min).cwiseMin(log_lambda_max);
  return next;
}

double elbo(const VectorRef& y, std::span<const ModelFeatures> features,
            std::span<const WeightPosterior> weights, const LatentTargets& latents,
            const Precisions& precisions) {
  check_model_count(features.size(), precisions.beta_f.size(), "elbo");
  const int m_count = static_cast<int>(features.size());
  const double n = static_cast<double>(y.size());

  double value = 0.0;

  // E_q[log p(y | f)] and the entropy of q(f).
  if (n > 0 && m_count > 0) {
    const double ss = (y - latents.mu_f.rowwise().sum()).squaredNorm();
    value += -0.5 * n * kLog2Pi + 0.5 * n * std::log(precisions.beta_y) -
             0.5 * precisions.beta_y * (ss + n * latents.sum_sigma_f());
    value += n * (0.5 * m_count * (kLog2Pi + 1.0) + 0.5 * latents.logdet_sigma_f());
  }

  for (int m = 0; m < m_count; ++m) {
    const auto& fm = features[m];
    const auto& wm = weights[m];
    const double k = static_cast<double>(fm.k());
    const double beta = precisions.beta_f(m);

    // E_q[log p(f_m | w_m, phi_m)].
    if (n > 0) {
      const Vector pred = fm.phi * wm.mu_w;
      const double ss = (latents.mu_f.col(m) - pred).squaredNorm();
      const double traced = wm.sigma_w.cwiseProduct(fm.gram).sum();
      value += -0.5 * n * kLog2Pi + 0.5 * n * std::log(beta) -
               0.5 * beta * (ss + traced + n * latents.sigma_f_diag(m));
    }

    // E_q[log p(w_m | A_m)] and the entropy of q(w_m).
    const auto alpha = precisions.alpha.row(m);
    const double expected_sq =
        (alpha.transpose().array() *
         (wm.mu_w.array().square() + wm.sigma_w.diagonal().array()))
            .sum();
    value += -0.5 * k * kLog2Pi + 0.5 * alpha.array().log().sum() - 0.5 * expected_sq;

    auto llt = detail::chol_spd(wm.sigma_w, "elbo: weight covariance " + std::to_string(m));
    value += 0.5 * k * (kLog2Pi + 1.0) + 0.5 * detail::logdet_from_llt(llt);
  }
  return value;
}

}  // namespace lgr
