#pragma once

#include <utility>
#include <vector>

#include "lgr/features.hpp"

namespace lgr {

/// Exact Gaussian posterior over weights.
struct GaussianPosterior {
  Vector mean;
  Matrix covariance;
};

/// Exact Bayesian linear regression on a feature matrix: the posterior is
/// N(mean, cov) with cov = (prior_cov^-1 + beta Phi^T Phi)^-1 and
/// mean = cov (beta Phi^T y + prior_cov^-1 prior_mean).
GaussianPosterior exact_posterior(const Matrix& features, const Vector& y,
                                  const Vector& prior_mean, const Matrix& prior_cov,
                                  double beta);

/// Predictive mean and latent variance at phi_star; the observation noise
/// 1/beta is added on top of the latent variance.
std::pair<double, double> exact_predict(const GaussianPosterior& posterior,
                                        const Vector& phi_star, double beta);

/// Geometry and ARD prior of one local model, as the joint solver needs it.
struct LocalBasis {
  Center center;
  LengthScales scales;
  Vector alpha;  // K per-weight prior precisions
};

/// Directly solves the joint MK x MK linear system satisfied by the converged
/// variational weight means: (Phi^T Phi + denom * A) mu = Phi^T y with
/// denom = 1/beta_y + sum_m 1/beta_fm. Returns the stacked means.
Vector coupled_weight_optimum(const Matrix& X, const Vector& y,
                              const std::vector<LocalBasis>& models, double beta_y,
                              const Vector& beta_f);

/// Exact log marginal likelihood of the localized model with the latent layer
/// integrated out: y ~ N(0, sum_m Phi_m A_m^-1 Phi_m^T + denom * I).
double log_evidence(const Matrix& X, const Vector& y, const std::vector<LocalBasis>& models,
                    double beta_y, const Vector& beta_f);

}  // namespace lgr
