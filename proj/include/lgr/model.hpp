#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lgr/data.hpp"
#include "lgr/features.hpp"
#include "lgr/variational.hpp"

namespace lgr {

/// One localized linear model with its weight posterior and hyperparameters.
struct LocalModel {
  Center center;
  LengthScales scales;
  WeightPosterior weights;
  double beta_f = 0;
  Vector alpha;  // K

  /// A model is prunable once every ARD precision exceeds the threshold.
  bool prunable(double threshold) const { return (alpha.array() > threshold).all(); }
};

struct FitConfig {
  double w_gen = 0.3;                // placement threshold in (0, 1]
  double prune_threshold = 1e3;      // ARD precision above which a weight is dead
  Vector lambda_init;                // scalar (size 1, broadcast) or D-vector; default 0.3
  double learning_rate = 1e-2;       // gradient ascent rate on log length scales
  int convergence_iters = 1000;      // extra sweeps after the data pass
  double elbo_tol = 1e-8;            // relative ELBO change for early stopping
  bool learn_lengthscales = true;
  std::uint64_t seed = 0;
  bool deterministic = false;        // zero wall-clock fields in the report

  double var_floor = 1e-10;
  double alpha_max = 1e6;
  double lambda_min = 1e-3;
  double lambda_max = 1e3;
  double beta_f_init_factor = 100.0;  // beta_f = factor * beta_y at model creation

  void validate(int dim) const;
  Vector lambda_init_for(int dim) const;  // broadcast, default-filled
};

struct FitReport {
  std::vector<double> elbo_trace;       // one entry per sweep
  std::vector<int> model_count_trace;   // live models after each sweep's pruning
  std::vector<int> added_trace;         // models placed before each sweep
  std::vector<int> pruned_trace;        // models removed after each sweep
  double final_mse = 0;
  double final_nmse = 0;                // NaN when the target variance is zero
  int sweeps_run = 0;
  double fit_seconds = 0;               // zeroed in deterministic mode
  double data_pass_seconds = 0;
  double convergence_seconds = 0;
};

class LGRModel {
 public:
  LGRModel() = default;
  LGRModel(int dim, double beta_y, FitConfig config)
      : dim_(dim), beta_y_(beta_y), config_(std::move(config)) {}

  int dim() const { return dim_; }
  int model_count() const { return static_cast<int>(models_.size()); }
  double beta_y() const { return beta_y_; }
  void set_beta_y(double b) { beta_y_ = b; }
  const FitConfig& config() const { return config_; }
  const std::vector<LocalModel>& models() const { return models_; }
  std::vector<LocalModel>& models() { return models_; }

  /// Places a new local model at x when every existing localizer weight at x
  /// falls below w_gen (always places when empty). Returns true if added.
  bool maybe_add_model(const Vector& x);

  /// Removes every local model whose ARD precisions all exceed the prune
  /// threshold. Returns the number removed.
  int prune();

  /// Predictive mean and variance at x. Throws when the model is empty.
  std::pair<double, double> predict(const Vector& x) const;

  /// Vectorized predict; identical values to per-point calls.
  std::pair<Vector, Vector> predict_batch(const Matrix& X) const;

 private:
  int dim_ = 0;
  double beta_y_ = 1.0;
  FitConfig config_;
  std::vector<LocalModel> models_;

  friend std::pair<LGRModel, FitReport> fit(const Dataset&, const FitConfig&);
};

/// Incremental training: per datapoint a placement check, one full E/M sweep
/// over all data seen so far, and pruning; then up to convergence_iters
/// additional sweeps on the full dataset with early stopping on the ELBO.
std::pair<LGRModel, FitReport> fit(const Dataset& data, const FitConfig& config);

}  // namespace lgr
