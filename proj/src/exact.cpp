#include "lgr/exact.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "linalg.hpp"

namespace lgr {

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("exact: ") + name + " must be positive and finite");
  }
}

}  // namespace

GaussianPosterior exact_posterior(const Matrix& features, const Vector& y,
                                  const Vector& prior_mean, const Matrix& prior_cov,
                                  double beta) {
  const Eigen::Index f = features.cols();
  if (features.rows() != y.size() || prior_mean.size() != f || prior_cov.rows() != f ||
      prior_cov.cols() != f) {
    throw std::invalid_argument("exact_posterior: dimension mismatch");
  }
  check_positive(beta, "beta");

  Eigen::LLT<Matrix> prior_llt(((prior_cov + prior_cov.transpose()) * 0.5).eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(prior_cov, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  const double cond = lmax / (std::abs(lmin) > 0.0 ? std::abs(lmin) : 1e-300);
  if (prior_llt.info() != Eigen::Success || !(lmin > 0.0) || cond > 1e14) {
    throw NumericalError("exact_posterior: singular prior covariance (eigenvalue range [" +
                         std::to_string(lmin) + ", " + std::to_string(lmax) + "], cond " +
                         std::to_string(cond) + ")");
  }
  const Matrix prior_precision = prior_llt.solve(Matrix::Identity(f, f));

  const Matrix post_precision = prior_precision + beta * features.transpose() * features;
  auto post_llt = detail::chol_spd(post_precision, "exact_posterior posterior precision");

  GaussianPosterior post;
  post.covariance = post_llt.solve(Matrix::Identity(f, f));
  post.covariance = ((post.covariance + post.covariance.transpose()) * 0.5).eval();
  post.mean = post_llt.solve(beta * features.transpose() * y + prior_precision * prior_mean);
  return post;
}

std::pair<double, double> exact_predict(const GaussianPosterior& posterior,
                                        const Vector& phi_star, double beta) {
  if (phi_star.size() != posterior.mean.size()) {
    throw std::invalid_argument("exact_predict: dimension mismatch");
  }
  check_positive(beta, "beta");
  const double mean = phi_star.dot(posterior.mean);
  const double latent_var = phi_star.dot(posterior.covariance * phi_star);
  return {mean, latent_var};
}

Vector coupled_weight_optimum(const Matrix& X, const Vector& y,
                              const std::vector<LocalBasis>& models, double beta_y,
                              const Vector& beta_f) {
  const int m_count = static_cast<int>(models.size());
  if (m_count < 1) throw std::invalid_argument("coupled_weight_optimum: need at least one model");
  if (beta_f.size() != m_count) {
    throw std::invalid_argument("coupled_weight_optimum: beta_f size mismatch");
  }
  check_positive(beta_y, "beta_y");
  for (int m = 0; m < m_count; ++m) check_positive(beta_f(m), "beta_f");

  const int k = static_cast<int>(X.cols()) + 1;
  const Eigen::Index n = X.rows();
  Matrix stacked(n, static_cast<Eigen::Index>(m_count) * k);
  Vector alpha_diag(static_cast<Eigen::Index>(m_count) * k);
  for (int m = 0; m < m_count; ++m) {
    if (models[m].alpha.size() != k) {
      throw std::invalid_argument("coupled_weight_optimum: alpha size mismatch");
    }
    stacked.middleCols(static_cast<Eigen::Index>(m) * k, k) =
        feature_matrix(X, models[m].center, models[m].scales);
    alpha_diag.segment(static_cast<Eigen::Index>(m) * k, k) = models[m].alpha;
  }

  const double denom = 1.0 / beta_y + beta_f.cwiseInverse().sum();
  Matrix system = stacked.transpose() * stacked;
  system.diagonal() += denom * alpha_diag;
  auto llt = detail::chol_spd(system, "coupled_weight_optimum system");
  return llt.solve(stacked.transpose() * y);
}

double log_evidence(const Matrix& X, const Vector& y, const std::vector<LocalBasis>& models,
                    double beta_y, const Vector& beta_f) {
  const Eigen::Index n = X.rows();
  const double denom = 1.0 / beta_y + beta_f.cwiseInverse().sum();
  Matrix cov = denom * Matrix::Identity(n, n);
  for (size_t m = 0; m < models.size(); ++m) {
    const Matrix phi = feature_matrix(X, models[m].center, models[m].scales);
    cov += phi * models[m].alpha.cwiseInverse().asDiagonal() * phi.transpose();
  }
  auto llt = detail::chol_spd(cov, "log_evidence covariance");
  const double quad = y.dot(llt.solve(y));
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) +
                 detail::logdet_from_llt(llt) + quad);
}

}  // namespace lgr
