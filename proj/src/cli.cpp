#include "lgr/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lgr/data.hpp"
#include "lgr/errors.hpp"
#include "lgr/lwr.hpp"
#include "lgr/model.hpp"
#include "lgr/serialize.hpp"

namespace lgr::cli {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Expands `--config FILE` into --key=value arguments appended after the
// explicit ones. Flat key=value lines mirror the flags; a key already given
// on the command line wins over the file. Unknown keys surface as
// unrecognized-argument errors downstream.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        throw std::invalid_argument("invalid config: --config needs a file path");
      }
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trimmed(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("invalid config: line " + std::to_string(lineno) + " of '" +
                                  path + "' is not key=value");
    }
    const std::string key = trimmed(text.substr(0, eq));
    const std::string value = trimmed(text.substr(eq + 1));
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (!given) args.push_back(flag + "=" + value);
  }
  return args;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw DataError("write to '" + path + "' failed");
}

json nmse_or_null(const Vector& pred, const Vector& targets) {
  const double m = targets.mean();
  if ((targets.array() - m).square().mean() <= 0.0) return nullptr;
  return nmse(pred, targets);
}

// Runs fn(0..count-1) on up to `workers` threads; cell outputs are indexed,
// so results are identical regardless of scheduling.
void parallel_cells(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------- gen-data

struct GenArgs {
  std::string generator;
  int n = 2000;
  double noise = 0.2;
  std::uint64_t seed = 1;
  int edge = 41;
  std::string out = "data.csv";
};

void cmd_gen_data(const GenArgs& a, std::ostream& err) {
  std::string bad;
  auto flag = [&](const char* key) { bad += bad.empty() ? key : std::string(", ") + key; };
  if (a.generator != "cross2d-grid" && a.n < 1) flag("n");
  if (a.noise < 0.0) flag("noise");
  if (a.generator == "cross2d-grid" && a.edge < 2) flag("edge");
  if (!bad.empty()) throw std::invalid_argument("invalid config: " + bad);

  Dataset data;
  if (a.generator == "sine") {
    data = gen_sine(a.n, a.noise, a.seed);
  } else if (a.generator == "cross2d") {
    data = gen_cross2d(a.n, a.noise, a.seed);
  } else if (a.generator == "cross2d-grid") {
    data = cross2d_grid(a.edge);
  } else {
    throw std::invalid_argument("invalid config: generator (expected sine, cross2d or cross2d-grid)");
  }
  save_csv(a.out, data);
  err << "wrote " << data.n() << " rows to " << a.out << "\n";
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string method = "lgr";
  std::string dataset;
  std::string target_column = "y";
  std::vector<std::string> select_columns;
  std::string test_dataset;
  double w_gen = 0.3;
  std::vector<double> w_gen_sweep;
  double lambda_init = 0.3;
  bool learn_lengthscales = true;
  double learning_rate = 1e-2;
  int iters = 1000;
  double prune_threshold = 1e3;
  double elbo_tol = 1e-8;
  std::uint64_t seed = 1;
  bool deterministic = false;
  double ridge = 1e-6;
  std::string out = "model.json";
  std::string report = "report.json";
  std::string out_table;
  int workers = 1;
};

json config_echo(const TrainArgs& a, double w_gen) {
  return json{{"method", a.method},
              {"dataset", a.dataset},
              {"target_column", a.target_column},
              {"select_columns", a.select_columns},
              {"test_dataset", a.test_dataset},
              {"w_gen", w_gen},
              {"w_gen_sweep", a.w_gen_sweep},
              {"lambda_init", a.lambda_init},
              {"learn_lengthscales", a.learn_lengthscales},
              {"learning_rate", a.learning_rate},
              {"iters", a.iters},
              {"prune_threshold", a.prune_threshold},
              {"elbo_tol", a.elbo_tol},
              {"seed", a.seed},
              {"deterministic", a.deterministic},
              {"ridge", a.ridge},
              {"out", a.out},
              {"report", a.report},
              {"workers", a.workers}};
}

FitConfig fit_config_from(const TrainArgs& a, double w_gen) {
  FitConfig cfg;
  cfg.w_gen = w_gen;
  cfg.prune_threshold = a.prune_threshold;
  cfg.lambda_init = Vector::Constant(1, a.lambda_init);
  cfg.learning_rate = a.learning_rate;
  cfg.convergence_iters = a.iters;
  cfg.elbo_tol = a.elbo_tol;
  cfg.learn_lengthscales = a.learn_lengthscales;
  cfg.seed = a.seed;
  cfg.deterministic = a.deterministic;
  return cfg;
}

struct TrainOutcome {
  json report;
  double nmse_value = std::numeric_limits<double>::quiet_NaN();
  double mse_value = 0;
  int model_count = 0;
};

// Trains one method on one dataset and writes the model file; metrics are on
// the training data plus, when given, the held-out test set.
TrainOutcome train_once(const TrainArgs& a, double w_gen, const Dataset& train,
                        const Dataset* test, const std::string& model_path) {
  TrainOutcome outcome;
  json metrics;
  json test_metrics = nullptr;
  json elbo_summary = nullptr;
  json timings;

  if (a.method == "lgr") {
    const auto t0 = std::chrono::steady_clock::now();
    auto [model, rep] = fit(train, fit_config_from(a, w_gen));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!model_path.empty()) save_model(model_path, model);

    metrics = {{"mse", rep.final_mse},
               {"nmse", std::isnan(rep.final_nmse) ? json(nullptr) : json(rep.final_nmse)},
               {"model_count", model.model_count()}};
    elbo_summary = {{"first", rep.elbo_trace.front()},
                    {"last", rep.elbo_trace.back()},
                    {"sweeps", rep.sweeps_run}};
    timings = {{"fit_seconds", a.deterministic ? 0.0 : secs},
               {"data_pass_seconds", rep.data_pass_seconds},
               {"convergence_seconds", rep.convergence_seconds}};
    outcome.model_count = model.model_count();
    outcome.mse_value = rep.final_mse;
    outcome.nmse_value = rep.final_nmse;
    if (test) {
      const auto [pred, var] = model.predict_batch(test->inputs);
      const double tmse = mse(pred, test->targets);
      const json tnmse = nmse_or_null(pred, test->targets);
      test_metrics = {{"mse", tmse}, {"nmse", tnmse}};
      outcome.mse_value = tmse;
      outcome.nmse_value = tnmse.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                           : tnmse.get<double>();
    }
  } else if (a.method == "lwr") {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix centers =
        lwr_place_centers(train, w_gen, Vector::Constant(train.dim(), a.lambda_init));
    const Matrix scales = Matrix::Constant(centers.rows(), train.dim(), a.lambda_init);
    const LWRModel model = lwr_fit(train, centers, scales, a.ridge);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!model_path.empty()) save_model(model_path, model);

    const Vector pred = lwr_predict_batch(model, train.inputs);
    metrics = {{"mse", mse(pred, train.targets)},
               {"nmse", nmse_or_null(pred, train.targets)},
               {"model_count", model.model_count()}};
    timings = {{"fit_seconds", a.deterministic ? 0.0 : secs}};
    outcome.model_count = model.model_count();
    outcome.mse_value = metrics["mse"].get<double>();
    outcome.nmse_value = metrics["nmse"].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                   : metrics["nmse"].get<double>();
    if (test) {
      const Vector tpred = lwr_predict_batch(model, test->inputs);
      const double tmse = mse(tpred, test->targets);
      const json tnmse = nmse_or_null(tpred, test->targets);
      test_metrics = {{"mse", tmse}, {"nmse", tnmse}};
      outcome.mse_value = tmse;
      outcome.nmse_value = tnmse.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                           : tnmse.get<double>();
    }
  } else {
    throw std::invalid_argument("invalid config: method (expected lgr or lwr)");
  }

  outcome.report = json{{"command", "train"},
                        {"config", config_echo(a, w_gen)},
                        {"dataset", json{{"path", a.dataset}, {"n", train.n()}, {"d", train.dim()}}},
                        {"metrics", metrics},
                        {"test_metrics", test_metrics},
                        {"elbo", elbo_summary},
                        {"timings", timings}};
  return outcome;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

void cmd_train(const TrainArgs& a, std::ostream& err) {
  std::string bad;
  auto flag = [&](const char* key) { bad += bad.empty() ? key : std::string(", ") + key; };
  if (a.method != "lgr" && a.method != "lwr") flag("method");
  if (a.dataset.empty()) flag("dataset");
  if (!(a.w_gen > 0.0 && a.w_gen <= 1.0)) flag("w_gen");
  for (double w : a.w_gen_sweep) {
    if (!(w > 0.0 && w <= 1.0)) {
      flag("w_gen_sweep");
      break;
    }
  }
  if (!(a.lambda_init > 0.0)) flag("lambda_init");
  if (!(a.learning_rate > 0.0)) flag("learning_rate");
  if (a.iters < 0) flag("iters");
  if (!(a.prune_threshold > 0.0)) flag("prune_threshold");
  if (!(a.elbo_tol >= 0.0)) flag("elbo_tol");
  if (a.ridge < 0.0) flag("ridge");
  if (a.workers < 1) flag("workers");
  if (!bad.empty()) throw std::invalid_argument("invalid config: " + bad);

  const Dataset train = load_csv(a.dataset, a.target_column, a.select_columns);
  std::optional<Dataset> test;
  if (!a.test_dataset.empty()) {
    test = load_csv(a.test_dataset, a.target_column, a.select_columns);
  }

  if (a.w_gen_sweep.empty()) {
    const TrainOutcome outcome =
        train_once(a, a.w_gen, train, test ? &*test : nullptr, a.out);
    write_json_file(a.report, outcome.report);
    err << "trained " << a.method << " on " << train.n() << " rows; report: " << a.report
        << "\n";
    return;
  }

  // Sweep mode: one report (and model) per w_gen value plus an aggregate table.
  std::vector<TrainOutcome> outcomes(a.w_gen_sweep.size());
  parallel_cells(static_cast<int>(a.w_gen_sweep.size()), a.workers, [&](int i) {
    const std::string tag = ".w_gen_" + format_double(a.w_gen_sweep[i]);
    outcomes[i] = train_once(a, a.w_gen_sweep[i], train, test ? &*test : nullptr,
                             with_suffix(a.out, tag));
    write_json_file(with_suffix(a.report, tag), outcomes[i].report);
  });

  std::string table_path = a.out_table;
  if (table_path.empty()) {
    const auto dot = a.report.rfind('.');
    const bool has_ext = dot != std::string::npos && a.report.find('/', dot) == std::string::npos;
    table_path = (has_ext ? a.report.substr(0, dot) : a.report) + ".sweep.csv";
  }
  std::ofstream table(table_path);
  if (!table) throw DataError("cannot open '" + table_path + "' for writing");
  table << "w_gen,mse,nmse,model_count\n";
  for (size_t i = 0; i < outcomes.size(); ++i) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%g,%.17g,%.17g,%d\n", a.w_gen_sweep[i],
                  outcomes[i].mse_value, outcomes[i].nmse_value, outcomes[i].model_count);
    table << buf;
  }
  err << "sweep complete; table: " << table_path << "\n";
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  std::string dataset;
  std::string target_column = "y";
  std::vector<std::string> select_columns;
  std::string out = "predictions.csv";
};

// Input CSV for prediction: the target column is dropped when present;
// otherwise every (selected) column is an input.
Matrix load_prediction_inputs(const PredictArgs& a) {
  std::ifstream probe(a.dataset);
  if (!probe) throw DataError("load_csv: cannot open '" + a.dataset + "'");
  std::string header;
  std::getline(probe, header);
  const bool has_target =
      ("," + header + ",").find("," + a.target_column + ",") != std::string::npos;
  probe.close();
  if (has_target) {
    return load_csv(a.dataset, a.target_column, a.select_columns).inputs;
  }
  // No target column: parse via load_csv by treating the first column as the
  // target, then re-attach it.
  const auto comma = header.find(',');
  if (comma == std::string::npos) {
    throw DataError("predict: input CSV needs at least two columns or a '" + a.target_column +
                    "' column");
  }
  const std::string first = header.substr(0, comma);
  const Dataset d = load_csv(a.dataset, first, a.select_columns);
  Matrix inputs(d.n(), d.dim() + 1);
  inputs.col(0) = d.targets;
  inputs.rightCols(d.dim()) = d.inputs;
  return inputs;
}

void cmd_predict(const PredictArgs& a, std::ostream& err) {
  std::string bad;
  auto flag = [&](const char* key) { bad += bad.empty() ? key : std::string(", ") + key; };
  if (a.model.empty()) flag("model");
  if (a.dataset.empty()) flag("dataset");
  if (!bad.empty()) throw std::invalid_argument("invalid config: " + bad);

  const Matrix inputs = load_prediction_inputs(a);
  const std::string type = model_file_type(a.model);

  Vector means;
  Vector variances;
  if (type == "lgr") {
    const LGRModel model = load_lgr_model(a.model);
    if (model.dim() != inputs.cols()) {
      throw std::invalid_argument("predict: model dimension " + std::to_string(model.dim()) +
                                  " does not match input dimension " +
                                  std::to_string(inputs.cols()));
    }
    std::tie(means, variances) = model.predict_batch(inputs);
  } else {
    const LWRModel model = load_lwr_model(a.model);
    if (model.dim() != inputs.cols()) {
      throw std::invalid_argument("predict: model dimension " + std::to_string(model.dim()) +
                                  " does not match input dimension " +
                                  std::to_string(inputs.cols()));
    }
    means = lwr_predict_batch(model, inputs);
    variances = Vector::Constant(inputs.rows(), std::numeric_limits<double>::quiet_NaN());
  }

  std::ofstream out(a.out);
  if (!out) throw DataError("cannot open '" + a.out + "' for writing");
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) out << "x" << (j + 1) << ",";
  out << "mean,variance\n";
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
      emit(inputs(i, j));
      out << ",";
    }
    emit(means(i));
    out << ",";
    emit(variances(i));
    out << "\n";
  }
  err << "wrote " << inputs.rows() << " predictions to " << a.out << "\n";
}

// --------------------------------------------------------------- benchmark

struct BenchArgs {
  std::vector<std::string> methods = {"lgr", "lwr"};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> w_gen_sweep = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int n = 2000;
  double noise = 0.2;
  int edge = 41;
  double lambda_init = 0.3;
  bool learn_lengthscales = true;
  double learning_rate = 0.1;
  int iters = 1000;
  double prune_threshold = 1e3;
  double elbo_tol = 1e-8;
  double ridge = 1e-6;
  bool deterministic = false;
  std::string out_table = "benchmark.csv";
  std::string report = "benchmark.json";
  int workers = 1;
};

struct BenchCell {
  std::string method;
  std::uint64_t seed = 0;
  double w_gen = 0;
  double nmse_value = 0;
  double mse_value = 0;
  int model_count = 0;
  double seconds = 0;
};

void cmd_benchmark(const BenchArgs& a, std::ostream& err) {
  std::string bad;
  auto flag = [&](const char* key) { bad += bad.empty() ? key : std::string(", ") + key; };
  for (const auto& m : a.methods) {
    if (m != "lgr" && m != "lwr") {
      flag("methods");
      break;
    }
  }
  if (a.methods.empty()) flag("methods");
  if (a.seeds.empty()) flag("seeds");
  for (double w : a.w_gen_sweep) {
    if (!(w > 0.0 && w <= 1.0)) {
      flag("w_gen_sweep");
      break;
    }
  }
  if (a.w_gen_sweep.empty()) flag("w_gen_sweep");
  if (a.n < 1) flag("n");
  if (a.noise < 0.0) flag("noise");
  if (a.edge < 2) flag("edge");
  if (!(a.lambda_init > 0.0)) flag("lambda_init");
  if (!(a.learning_rate > 0.0)) flag("learning_rate");
  if (a.iters < 0) flag("iters");
  if (a.workers < 1) flag("workers");
  if (!bad.empty()) throw std::invalid_argument("invalid config: " + bad);

  const Dataset grid = cross2d_grid(a.edge);

  std::vector<BenchCell> cells;
  for (const auto& method : a.methods) {
    for (const auto seed : a.seeds) {
      for (const double w : a.w_gen_sweep) {
        cells.push_back(BenchCell{method, seed, w});
      }
    }
  }

  std::mutex log_mutex;
  std::atomic<int> done{0};
  parallel_cells(static_cast<int>(cells.size()), a.workers, [&](int i) {
    BenchCell& cell = cells[i];
    const Dataset train = gen_cross2d(a.n, a.noise, cell.seed);
    const auto t0 = std::chrono::steady_clock::now();
    Vector pred;
    if (cell.method == "lgr") {
      FitConfig cfg;
      cfg.w_gen = cell.w_gen;
      cfg.prune_threshold = a.prune_threshold;
      cfg.lambda_init = Vector::Constant(1, a.lambda_init);
      cfg.learning_rate = a.learning_rate;
      cfg.convergence_iters = a.iters;
      cfg.elbo_tol = a.elbo_tol;
      cfg.learn_lengthscales = a.learn_lengthscales;
      cfg.seed = cell.seed;
      auto [model, rep] = fit(train, cfg);
      pred = model.predict_batch(grid.inputs).first;
      cell.model_count = model.model_count();
    } else {
      const Matrix centers =
          lwr_place_centers(train, cell.w_gen, Vector::Constant(2, a.lambda_init));
      const Matrix scales = Matrix::Constant(centers.rows(), 2, a.lambda_init);
      const LWRModel model = lwr_fit(train, centers, scales, a.ridge);
      pred = lwr_predict_batch(model, grid.inputs);
      cell.model_count = model.model_count();
    }
    cell.seconds =
        a.deterministic
            ? 0.0
            : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cell.mse_value = mse(pred, grid.targets);
    cell.nmse_value = nmse(pred, grid.targets);
    const int k = ++done;
    std::lock_guard lock(log_mutex);
    err << "[" << k << "/" << cells.size() << "] " << cell.method << " seed=" << cell.seed
        << " w_gen=" << format_double(cell.w_gen) << " nmse=" << cell.nmse_value
        << " models=" << cell.model_count << "\n";
  });

  // Aggregate: per (method, w_gen) means across seeds, then the best w_gen.
  json aggregates = json::object();
  std::string table_rows;
  for (const auto& method : a.methods) {
    json per_w = json::array();
    double best_mean = std::numeric_limits<double>::infinity();
    json best = nullptr;
    for (const double w : a.w_gen_sweep) {
      std::vector<double> nmses;
      std::vector<double> counts;
      for (const auto& cell : cells) {
        if (cell.method == method && cell.w_gen == w) {
          nmses.push_back(cell.nmse_value);
          counts.push_back(cell.model_count);
        }
      }
      const double mean =
          std::accumulate(nmses.begin(), nmses.end(), 0.0) / nmses.size();
      double sq = 0.0;
      for (double v : nmses) sq += (v - mean) * (v - mean);
      const double sd = std::sqrt(sq / nmses.size());
      const double count_mean =
          std::accumulate(counts.begin(), counts.end(), 0.0) / counts.size();
      per_w.push_back(json{{"w_gen", w},
                           {"nmse_mean", mean},
                           {"nmse_std", sd},
                           {"model_count_mean", count_mean}});
      if (mean < best_mean) {
        best_mean = mean;
        best = per_w.back();
      }
    }
    aggregates[method] = json{{"per_w_gen", per_w},
                              {"best", best},
                              {"lengthscale_learning", method == "lgr" && a.learn_lengthscales}};
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%g,%.17g\n", method.c_str(),
                  best.at("nmse_mean").get<double>(), best.at("nmse_std").get<double>(),
                  best.at("w_gen").get<double>(), best.at("model_count_mean").get<double>());
    table_rows += buf;
  }

  json cell_json = json::array();
  for (const auto& cell : cells) {
    cell_json.push_back(json{{"method", cell.method},
                             {"seed", cell.seed},
                             {"w_gen", cell.w_gen},
                             {"nmse", cell.nmse_value},
                             {"mse", cell.mse_value},
                             {"model_count", cell.model_count},
                             {"seconds", cell.seconds}});
  }
  const json config = json{{"methods", a.methods},
                           {"seeds", a.seeds},
                           {"w_gen_sweep", a.w_gen_sweep},
                           {"n", a.n},
                           {"noise", a.noise},
                           {"edge", a.edge},
                           {"lambda_init", a.lambda_init},
                           {"learn_lengthscales", a.learn_lengthscales},
                           {"learning_rate", a.learning_rate},
                           {"iters", a.iters},
                           {"prune_threshold", a.prune_threshold},
                           {"elbo_tol", a.elbo_tol},
                           {"ridge", a.ridge},
                           {"deterministic", a.deterministic},
                           {"out_table", a.out_table},
                           {"report", a.report},
                           {"workers", a.workers}};
  write_json_file(a.report, json{{"command", "benchmark"},
                                 {"config", config},
                                 {"cells", cell_json},
                                 {"aggregates", aggregates}});

  std::ofstream table(a.out_table);
  if (!table) throw DataError("cannot open '" + a.out_table + "' for writing");
  table << "method,best_nmse_mean,best_nmse_std,opt_w_gen,mean_model_count\n" << table_rows;
  err << "benchmark complete; table: " << a.out_table << ", report: " << a.report << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local Gaussian regression: localized Bayesian linear models trained by "
               "variational EM, with an LWR baseline"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset as CSV");
  gen_cmd->add_option("--generator", gen.generator, "sine, cross2d or cross2d-grid")
      ->required();
  gen_cmd->add_option("--n", gen.n, "Number of samples");
  gen_cmd->add_option("--noise", gen.noise, "Noise standard deviation");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--edge", gen.edge, "Grid edge length (cross2d-grid)");
  gen_cmd->add_option("--out", gen.out, "Output CSV path");
  std::string config_placeholder;
  gen_cmd->add_option("--config", config_placeholder,
                      "Flat key=value file mirroring the flags; flags override it");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write model + report");
  train_cmd->add_option("--method", train.method, "lgr or lwr");
  train_cmd->add_option("--dataset", train.dataset, "Training CSV")->required();
  train_cmd->add_option("--target-column", train.target_column, "Target column name");
  train_cmd->add_option("--select-columns", train.select_columns,
                        "Input column patterns ('*' wildcard), comma separated")
      ->delimiter(',');
  train_cmd->add_option("--test-dataset", train.test_dataset, "Held-out CSV for test metrics");
  train_cmd->add_option("--w-gen", train.w_gen, "Placement threshold in (0, 1]");
  train_cmd->add_option("--w-gen-sweep", train.w_gen_sweep,
                        "Comma-separated w_gen values; sweep mode")
      ->delimiter(',');
  train_cmd->add_option("--lambda-init", train.lambda_init, "Initial length scale");
  train_cmd->add_flag("--learn-lengthscales,!--no-learn-lengthscales",
                      train.learn_lengthscales, "Gradient-ascend the length scales");
  train_cmd->add_option("--learning-rate", train.learning_rate, "Length-scale ascent rate");
  train_cmd->add_option("--iters", train.iters, "Max convergence sweeps after the data pass");
  train_cmd->add_option("--prune-threshold", train.prune_threshold, "ARD prune threshold");
  train_cmd->add_option("--elbo-tol", train.elbo_tol, "Relative ELBO stopping tolerance");
  train_cmd->add_option("--seed", train.seed, "Seed (echoed into reports)");
  train_cmd->add_flag("--deterministic", train.deterministic,
                      "Byte-stable reports (zeroes wall-clock fields)");
  train_cmd->add_option("--ridge", train.ridge, "LWR ridge regularizer");
  train_cmd->add_option("--out", train.out, "Model output path");
  train_cmd->add_option("--report", train.report, "Report JSON path");
  train_cmd->add_option("--out-table", train.out_table, "Sweep table CSV path");
  train_cmd->add_option("--workers", train.workers, "Parallel sweep workers");
  train_cmd->add_option("--config", config_placeholder,
                        "Flat key=value file mirroring the flags; flags override it");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict with a saved model");
  predict_cmd->add_option("--model", predict.model, "Model JSON path")->required();
  predict_cmd->add_option("--dataset", predict.dataset, "Input CSV")->required();
  predict_cmd->add_option("--target-column", predict.target_column,
                          "Target column to drop if present");
  predict_cmd->add_option("--select-columns", predict.select_columns,
                          "Input column patterns, comma separated")
      ->delimiter(',');
  predict_cmd->add_option("--out", predict.out, "Predictions CSV path");
  predict_cmd->add_option("--config", config_placeholder,
                        "Flat key=value file mirroring the flags; flags override it");

  BenchArgs bench;
  auto* bench_cmd =
      app.add_subcommand("benchmark", "Cross-function protocol over methods, seeds and w_gen");
  bench_cmd->add_option("--methods", bench.methods, "Methods to run, comma separated")
      ->delimiter(',');
  bench_cmd->add_option("--seeds", bench.seeds, "Seeds, comma separated")->delimiter(',');
  bench_cmd->add_option("--w-gen-sweep", bench.w_gen_sweep, "w_gen values, comma separated")
      ->delimiter(',');
  bench_cmd->add_option("--n", bench.n, "Training points per run");
  bench_cmd->add_option("--noise", bench.noise, "Training noise standard deviation");
  bench_cmd->add_option("--edge", bench.edge, "Test grid edge length");
  bench_cmd->add_option("--lambda-init", bench.lambda_init, "Initial length scale");
  bench_cmd->add_flag("--learn-lengthscales,!--no-learn-lengthscales",
                      bench.learn_lengthscales, "Length-scale learning for lgr");
  bench_cmd->add_option("--learning-rate", bench.learning_rate, "Length-scale ascent rate");
  bench_cmd->add_option("--iters", bench.iters, "Max convergence sweeps");
  bench_cmd->add_option("--prune-threshold", bench.prune_threshold, "ARD prune threshold");
  bench_cmd->add_option("--elbo-tol", bench.elbo_tol, "Relative ELBO stopping tolerance");
  bench_cmd->add_option("--ridge", bench.ridge, "LWR ridge regularizer");
  bench_cmd->add_flag("--deterministic", bench.deterministic, "Zero wall-clock fields");
  bench_cmd->add_option("--out-table", bench.out_table, "Aggregate table CSV path");
  bench_cmd->add_option("--report", bench.report, "Full report JSON path");
  bench_cmd->add_option("--workers", bench.workers, "Parallel cells");
  bench_cmd->add_option("--config", config_placeholder,
                        "Flat key=value file mirroring the flags; flags override it");

  std::vector<std::string> expanded;
  try {
    expanded = apply_config_file(args);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (gen_cmd->parsed()) {
      cmd_gen_data(gen, err);
    } else if (train_cmd->parsed()) {
      cmd_train(train, err);
    } else if (predict_cmd->parsed()) {
      cmd_predict(predict, err);
    } else if (bench_cmd->parsed()) {
      cmd_benchmark(bench, err);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  }
  return kOk;
}

}  // namespace lgr::cli
