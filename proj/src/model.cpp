#include "lgr/model.hpp"

#include "linalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lgr {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// One local model plus its design-matrix caches. phi is preallocated at the
// full dataset size; rows_valid tracks how many rows are current.
struct EngineLocal {
  Center center;
  LengthScales scales;
  double beta_f = 0;
  Vector alpha;
  Matrix phi;
  Matrix gram;
  int rows_valid = 0;
  bool stale = false;  // length scales changed; rebuild before use

  void refresh(const Matrix& X, int n) {
    if (stale) {
      phi.topRows(n) = feature_matrix(X.topRows(n), center, scales);
      gram.noalias() = phi.topRows(n).transpose() * phi.topRows(n);
      rows_valid = n;
      stale = false;
      return;
    }
    for (; rows_valid < n; ++rows_valid) {
      phi.row(rows_valid) =
          local_features(X.row(rows_valid).transpose(), center, scales).transpose();
      gram.noalias() += phi.row(rows_valid).transpose() * phi.row(rows_valid);
    }
  }
};

struct Engine {
  const Matrix& X;
  const Vector& y;
  const FitConfig& cfg;
  int dim;
  int k;
  double beta_y;
  double beta_f_init;  // tied to the initial data variance, not the evolving beta_y
  Vector lambda_init;
  std::vector<EngineLocal> locals;
  std::vector<WeightPosterior> weights;

  Engine(const Dataset& data, const FitConfig& config)
      : X(data.inputs),
        y(data.targets),
        cfg(config),
        dim(data.dim()),
        k(data.dim() + 1),
        lambda_init(config.lambda_init_for(data.dim())) {
    const double mean = y.mean();
    const double var = (y.array() - mean).square().mean();
    beta_y = 1.0 / std::max(var, cfg.var_floor);
    beta_f_init = cfg.beta_f_init_factor * beta_y;
  }

  int model_count() const { return static_cast<int>(locals.size()); }

  // A new model starts on the current residual path: its weight posterior is
  // initialized by fitting y minus the existing models' predictions over the
  // data seen so far, so its first ARD update reflects what it can explain.
  void add_model(const Vector& x, int n_seen) {
    EngineLocal local;
    local.center = Center{x};
    local.scales = LengthScales::from_lambda(lambda_init);
    local.beta_f = beta_f_init;
    local.alpha = Vector::Ones(k);
    local.phi.resize(X.rows(), k);
    local.gram = Matrix::Zero(k, k);
    local.refresh(X, n_seen);

    WeightPosterior posterior{Vector::Zero(k), Matrix::Identity(k, k)};
    if (n_seen > 0) {
      Vector residual = y.head(n_seen);
      for (size_t m = 0; m < locals.size(); ++m) {
        residual.noalias() -= locals[m].phi.topRows(n_seen) * weights[m].mu_w;
      }
      // Unit-ridge fit: trusts the residual only at prior confidence, which
      // keeps degenerate local designs (corners, sparse regions) bounded.
      Matrix system = local.gram;
      system.diagonal() += local.alpha;
      auto llt = detail::chol_spd(system, "add_model weight init");
      posterior.mu_w = llt.solve(local.phi.topRows(n_seen).transpose() * residual);
      Matrix bayes = local.beta_f * local.gram;
      bayes.diagonal() += local.alpha;
      Matrix cov = detail::chol_spd(bayes, "add_model weight cov").solve(Matrix::Identity(k, k));
      posterior.sigma_w = ((cov + cov.transpose()) * 0.5).eval();
    }
    locals.push_back(std::move(local));
    weights.push_back(std::move(posterior));
  }

  bool place(const Vector& x, int n_seen) {
    for (const auto& local : locals) {
      if (rbf_weight(x, local.center, local.scales) >= cfg.w_gen) return false;
    }
    add_model(x, n_seen);
    return true;
  }

  // One E/M sweep over the first n datapoints; returns the ELBO after the
  // closed-form M-steps (length-scale ascent runs last).
  double sweep(int n) {
    const int m_count = model_count();
    for (auto& local : locals) local.refresh(X, n);

    Precisions prec;
    prec.beta_y = beta_y;
    prec.beta_f.resize(m_count);
    prec.alpha.resize(m_count, k);
    std::vector<ModelFeatures> views;
    views.reserve(m_count);
    for (int m = 0; m < m_count; ++m) {
      prec.beta_f(m) = locals[m].beta_f;
      prec.alpha.row(m) = locals[m].alpha;
      views.emplace_back(ModelFeatures{locals[m].phi.topRows(n), locals[m].gram});
    }

    LatentTargets latents = e_step_latents(y.head(n), views, weights, prec);
    weights = e_step_weights(views, latents, prec);
    for (int m = 0; m < m_count; ++m) {
      locals[m].beta_f = m_step_beta_f(views[m], weights[m], latents, m, cfg.var_floor);
    }
    for (int m = 0; m < m_count; ++m) {
      for (int kk = 0; kk < k; ++kk) {
        locals[m].alpha(kk) = m_step_alpha(weights[m], kk, cfg.alpha_max);
      }
    }
    beta_y = m_step_beta_y(y.head(n), latents, cfg.var_floor);

    Precisions updated = prec;
    updated.beta_y = beta_y;
    for (int m = 0; m < m_count; ++m) {
      updated.beta_f(m) = locals[m].beta_f;
      updated.alpha.row(m) = locals[m].alpha;
    }
    const double bound = elbo(y.head(n), views, weights, latents, updated);

    if (cfg.learn_lengthscales) {
      const double log_min = std::log(cfg.lambda_min);
      const double log_max = std::log(cfg.lambda_max);
      for (int m = 0; m < m_count; ++m) {
        const Vector grad = lambda_gradient(X.topRows(n), locals[m].center, locals[m].scales,
                                            views[m], weights[m], latents, m, locals[m].beta_f);
        LengthScales next = lambda_ascent_step(locals[m].scales, grad,
                                               cfg.learning_rate / static_cast<double>(X.rows()),
                                               log_min, log_max);
        if ((next.log_lambda.array() != locals[m].scales.log_lambda.array()).any()) {
          locals[m].scales = std::move(next);
          locals[m].stale = true;
        }
      }
    }
    return bound;
  }

  // Removes prunable models but never empties the engine: when every model
  // qualifies, the one closest to alive is kept.
  int prune() {
    const int m_count = model_count();
    std::vector<char> dead(m_count, 0);
    int n_dead = 0;
    for (int m = 0; m < m_count; ++m) {
      if ((locals[m].alpha.array() > cfg.prune_threshold).all()) {
        dead[m] = 1;
        ++n_dead;
      }
    }
    if (n_dead == m_count && m_count > 0) {
      int keep = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int m = 0; m < m_count; ++m) {
        const double aliveness = locals[m].alpha.minCoeff();
        if (aliveness < best) {
          best = aliveness;
          keep = m;
        }
      }
      dead[keep] = 0;
      --n_dead;
    }
    if (n_dead == 0) return 0;
    std::vector<EngineLocal> kept_locals;
    std::vector<WeightPosterior> kept_weights;
    kept_locals.reserve(m_count - n_dead);
    kept_weights.reserve(m_count - n_dead);
    for (int m = 0; m < m_count; ++m) {
      if (!dead[m]) {
        kept_locals.push_back(std::move(locals[m]));
        kept_weights.push_back(std::move(weights[m]));
      }
    }
    locals = std::move(kept_locals);
    weights = std::move(kept_weights);
    return n_dead;
  }
};

}  // namespace

void FitConfig::validate(int dim) const {
  std::string bad;
  auto flag = [&](const char* key) {
    if (!bad.empty()) bad += ", ";
    bad += key;
  };
  if (!(w_gen > 0.0 && w_gen <= 1.0)) flag("w_gen");
  if (!(prune_threshold > 0.0)) flag("prune_threshold");
  if (lambda_init.size() != 0 && lambda_init.size() != 1 && lambda_init.size() != dim) {
    flag("lambda_init");
  } else if (lambda_init.size() != 0 &&
             (!lambda_init.allFinite() || (lambda_init.array() <= 0.0).any())) {
    flag("lambda_init");
  }
  if (!(learning_rate > 0.0)) flag("learning_rate");
  if (convergence_iters < 0) flag("convergence_iters");
  if (!(elbo_tol >= 0.0)) flag("elbo_tol");
  if (!(var_floor > 0.0)) flag("var_floor");
  if (!(alpha_max > 0.0)) flag("alpha_max");
  if (!(lambda_min > 0.0 && lambda_min < lambda_max)) flag("lambda_min");
  if (!(beta_f_init_factor > 0.0)) flag("beta_f_init_factor");
  if (!bad.empty()) throw std::invalid_argument("invalid config: " + bad);
}

Vector FitConfig::lambda_init_for(int dim) const {
  if (lambda_init.size() == 0) return Vector::Constant(dim, 0.3);
  if (lambda_init.size() == 1) return Vector::Constant(dim, lambda_init(0));
  return lambda_init;
}

bool LGRModel::maybe_add_model(const Vector& x) {
  if (x.size() != dim_ || !x.allFinite()) {
    throw std::invalid_argument("maybe_add_model: bad input point");
  }
  for (const auto& model : models_) {
    if (rbf_weight(x, model.center, model.scales) >= config_.w_gen) return false;
  }
  const int k = dim_ + 1;
  LocalModel model;
  model.center = Center{x};
  model.scales = LengthScales::from_lambda(config_.lambda_init_for(dim_));
  model.weights = WeightPosterior{Vector::Zero(k), Matrix::Identity(k, k)};
  model.beta_f = config_.beta_f_init_factor * beta_y_;
  model.alpha = Vector::Ones(k);
  models_.push_back(std::move(model));
  return true;
}

int LGRModel::prune() {
  const auto old_size = models_.size();
  std::erase_if(models_, [&](const LocalModel& m) { return m.prunable(config_.prune_threshold); });
  return static_cast<int>(old_size - models_.size());
}

std::pair<double, double> LGRModel::predict(const Vector& x) const {
  if (models_.empty()) throw std::invalid_argument("predict: model has no local models");
  if (x.size() != dim_) throw std::invalid_argument("predict: input dimension mismatch");
  double mean = 0.0;
  double variance = 1.0 / beta_y_;
  for (const auto& model : models_) {
    const Vector phi = local_features(x, model.center, model.scales);
    mean += model.weights.mu_w.dot(phi);
    variance += 1.0 / model.beta_f + phi.dot(model.weights.sigma_w * phi);
  }
  return {mean, variance};
}

std::pair<Vector, Vector> LGRModel::predict_batch(const Matrix& X) const {
  if (models_.empty()) throw std::invalid_argument("predict_batch: model has no local models");
  if (X.cols() != dim_) throw std::invalid_argument("predict_batch: input dimension mismatch");
  const Eigen::Index n = X.rows();
  Vector means = Vector::Zero(n);
  double var_base = 1.0 / beta_y_;
  Vector variances = Vector::Zero(n);
  for (const auto& model : models_) {
    const Matrix phi = feature_matrix(X, model.center, model.scales);
    means.noalias() += phi * model.weights.mu_w;
    var_base += 1.0 / model.beta_f;
    variances += (phi * model.weights.sigma_w).cwiseProduct(phi).rowwise().sum();
  }
  variances.array() += var_base;
  return {std::move(means), std::move(variances)};
}

std::pair<LGRModel, FitReport> fit(const Dataset& data, const FitConfig& config) {
  if (data.n() < 1 || data.dim() < 1) {
    throw std::invalid_argument("fit: dataset must have N >= 1 and D >= 1");
  }
  if (!data.inputs.allFinite() || !data.targets.allFinite()) {
    throw std::invalid_argument("fit: non-finite values in dataset");
  }
  config.validate(data.dim());

  const auto t0 = std::chrono::steady_clock::now();
  Engine engine(data, config);
  FitReport report;

  for (int i = 0; i < data.n(); ++i) {
    const int added = engine.place(data.inputs.row(i).transpose(), i) ? 1 : 0;
    const double bound = engine.sweep(i + 1);
    const int pruned = engine.prune();
    report.elbo_trace.push_back(bound);
    report.added_trace.push_back(added);
    report.pruned_trace.push_back(pruned);
    report.model_count_trace.push_back(engine.model_count());
  }
  report.data_pass_seconds = elapsed_seconds(t0);

  const auto t1 = std::chrono::steady_clock::now();
  double prev = report.elbo_trace.back();
  for (int it = 0; it < config.convergence_iters; ++it) {
    const double bound = engine.sweep(data.n());
    const int pruned = engine.prune();
    report.elbo_trace.push_back(bound);
    report.added_trace.push_back(0);
    report.pruned_trace.push_back(pruned);
    report.model_count_trace.push_back(engine.model_count());
    if (std::abs(bound - prev) <= config.elbo_tol * std::max(std::abs(prev), 1e-12)) {
      prev = bound;
      break;
    }
    prev = bound;
  }
  report.convergence_seconds = elapsed_seconds(t1);
  report.sweeps_run = static_cast<int>(report.elbo_trace.size());

  LGRModel model(data.dim(), engine.beta_y, config);
  model.models_.reserve(engine.locals.size());
  for (size_t m = 0; m < engine.locals.size(); ++m) {
    LocalModel lm;
    lm.center = std::move(engine.locals[m].center);
    lm.scales = std::move(engine.locals[m].scales);
    lm.weights = std::move(engine.weights[m]);
    lm.beta_f = engine.locals[m].beta_f;
    lm.alpha = std::move(engine.locals[m].alpha);
    model.models_.push_back(std::move(lm));
  }

  const auto [pred, var] = model.predict_batch(data.inputs);
  report.final_mse = mse(pred, data.targets);
  const double target_mean = data.targets.mean();
  const double target_var = (data.targets.array() - target_mean).square().mean();
  report.final_nmse = target_var > 0.0 ? report.final_mse / target_var
                                       : std::numeric_limits<double>::quiet_NaN();
  report.fit_seconds = elapsed_seconds(t0);
  if (config.deterministic) {
    report.fit_seconds = 0.0;
    report.data_pass_seconds = 0.0;
    report.convergence_seconds = 0.0;
  }
  return {std::move(model), std::move(report)};
}

}  // namespace lgr
