#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <string>

#include "lgr/errors.hpp"

namespace lgr::detail {

// Cholesky with one retry: symmetrize, factor, and on failure add a jitter of
// 1e-10 * trace / F to the diagonal once before giving up.
inline Eigen::LLT<Eigen::MatrixXd> chol_spd(Eigen::MatrixXd m, const std::string& what) {
  m = ((m + m.transpose()) * 0.5).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;

  const double jitter = 1e-10 * m.trace() / static_cast<double>(m.rows());
  m.diagonal().array() += jitter;
  llt.compute(m);
  if (llt.info() == Eigen::Success) return llt;

  // Diagnose with the ratio of extreme diagonal magnitudes of the failed factor.
  const double dmax = m.diagonal().cwiseAbs().maxCoeff();
  const double dmin = m.diagonal().cwiseAbs().minCoeff();
  throw NumericalError(what + ": matrix is not positive definite (diag ratio " +
                       std::to_string(dmax / (dmin > 0.0 ? dmin : 1e-300)) + ")");
}

inline double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace lgr::detail
