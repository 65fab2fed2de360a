#pragma once

#include "lgr/data.hpp"
#include "lgr/features.hpp"

namespace lgr {

/// Classical locally weighted regression: independently trained weighted
/// linear models blended by normalized localizer weights.
struct LWRModel {
  Matrix centers;  // M x D
  Matrix scales;   // M x D length scales (not log)
  Matrix weights;  // M x K with K = D + 1
  double ridge = 1e-6;

  int model_count() const { return static_cast<int>(centers.rows()); }
  int dim() const { return static_cast<int>(centers.cols()); }
};

/// Fits each model independently by eta_m-weighted ridge least squares on
/// the local basis [1, x - c_m] over all N points.
LWRModel lwr_fit(const Dataset& data, const Matrix& centers, const Matrix& scales,
                 double ridge = 1e-6);

/// Normalized-blend prediction sum_m eta_m f_m / sum_m eta_m. When every
/// localizer falls below the guard epsilon, falls back to the nearest
/// center's local prediction and sets *used_fallback.
double lwr_predict(const LWRModel& model, const Vector& x, bool* used_fallback = nullptr);

/// Vectorized lwr_predict (means only).
Vector lwr_predict_batch(const LWRModel& model, const Matrix& X);

/// Greedy center placement with the same rule as the incremental trainer:
/// a point becomes a center when every existing localizer weight at it is
/// below w_gen. No pruning.
Matrix lwr_place_centers(const Dataset& data, double w_gen, const Vector& lambda_init);

}  // namespace lgr
