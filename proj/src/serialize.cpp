#include "lgr/serialize.hpp"

#include <fstream>

#include <json.hpp>

#include "lgr/errors.hpp"

namespace lgr {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

// Lower triangle of a symmetric matrix, row by row.
json tril_to_json(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) arr.push_back(m(r, c));
  }
  return arr;
}

Matrix tril_from_json(const json& arr, Eigen::Index k) {
  Matrix m(k, k);
  size_t i = 0;
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) {
      m(r, c) = arr.at(i++).get<double>();
      m(c, r) = m(r, c);
    }
  }
  return m;
}

json config_to_json(const FitConfig& cfg) {
  return json{{"w_gen", cfg.w_gen},
              {"prune_threshold", cfg.prune_threshold},
              {"lambda_init", vector_to_json(cfg.lambda_init)},
              {"learning_rate", cfg.learning_rate},
              {"convergence_iters", cfg.convergence_iters},
              {"elbo_tol", cfg.elbo_tol},
              {"learn_lengthscales", cfg.learn_lengthscales},
              {"seed", cfg.seed},
              {"deterministic", cfg.deterministic},
              {"var_floor", cfg.var_floor},
              {"alpha_max", cfg.alpha_max},
              {"lambda_min", cfg.lambda_min},
              {"lambda_max", cfg.lambda_max},
              {"beta_f_init_factor", cfg.beta_f_init_factor}};
}

FitConfig config_from_json(const json& j) {
  FitConfig cfg;
  cfg.w_gen = j.at("w_gen").get<double>();
  cfg.prune_threshold = j.at("prune_threshold").get<double>();
  cfg.lambda_init = vector_from_json(j.at("lambda_init"));
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.convergence_iters = j.at("convergence_iters").get<int>();
  cfg.elbo_tol = j.at("elbo_tol").get<double>();
  cfg.learn_lengthscales = j.at("learn_lengthscales").get<bool>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.deterministic = j.at("deterministic").get<bool>();
  cfg.var_floor = j.at("var_floor").get<double>();
  cfg.alpha_max = j.at("alpha_max").get<double>();
  cfg.lambda_min = j.at("lambda_min").get<double>();
  cfg.lambda_max = j.at("lambda_max").get<double>();
  cfg.beta_f_init_factor = j.at("beta_f_init_factor").get<double>();
  return cfg;
}

void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("save_model: cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw DataError("save_model: write to '" + path + "' failed");
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_model: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("load_model: '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

void check_header(const json& j, const std::string& path, const std::string& want_type) {
  if (j.value("format", "") != "lgr-model" || !j.contains("version") || !j.contains("type")) {
    throw DataError("load_model: '" + path + "' is not a model file");
  }
  if (j.at("version").get<int>() != kFormatVersion) {
    throw DataError("load_model: unsupported model file version in '" + path + "'");
  }
  if (j.at("type").get<std::string>() != want_type) {
    throw DataError("load_model: '" + path + "' has type '" +
                    j.at("type").get<std::string>() + "', expected '" + want_type + "'");
  }
}

}  // namespace

void save_model(const std::string& path, const LGRModel& model) {
  json models = json::array();
  for (const auto& m : model.models()) {
    models.push_back(json{{"center", vector_to_json(m.center.c)},
                          {"log_lambda", vector_to_json(m.scales.log_lambda)},
                          {"mu_w", vector_to_json(m.weights.mu_w)},
                          {"sigma_w_tril", tril_to_json(m.weights.sigma_w)},
                          {"beta_f", m.beta_f},
                          {"alpha", vector_to_json(m.alpha)}});
  }
  write_file(path, json{{"format", "lgr-model"},
                        {"version", kFormatVersion},
                        {"type", "lgr"},
                        {"dim", model.dim()},
                        {"beta_y", model.beta_y()},
                        {"models", models},
                        {"config", config_to_json(model.config())}});
}

void save_model(const std::string& path, const LWRModel& model) {
  json models = json::array();
  for (int m = 0; m < model.model_count(); ++m) {
    models.push_back(json{{"center", vector_to_json(model.centers.row(m).transpose())},
                          {"lambda", vector_to_json(model.scales.row(m).transpose())},
                          {"w", vector_to_json(model.weights.row(m).transpose())}});
  }
  write_file(path, json{{"format", "lgr-model"},
                        {"version", kFormatVersion},
                        {"type", "lwr"},
                        {"dim", model.dim()},
                        {"ridge", model.ridge},
                        {"models", models}});
}

std::string model_file_type(const std::string& path) {
  const json j = read_file(path);
  if (j.value("format", "") != "lgr-model" || !j.contains("type")) {
    throw DataError("model_file_type: '" + path + "' is not a model file");
  }
  return j.at("type").get<std::string>();
}

LGRModel load_lgr_model(const std::string& path) {
  const json j = read_file(path);
  check_header(j, path, "lgr");
  const int dim = j.at("dim").get<int>();
  LGRModel model(dim, j.at("beta_y").get<double>(), config_from_json(j.at("config")));
  for (const auto& jm : j.at("models")) {
    LocalModel m;
    m.center = Center{vector_from_json(jm.at("center"))};
    m.scales = LengthScales{vector_from_json(jm.at("log_lambda"))};
    m.weights.mu_w = vector_from_json(jm.at("mu_w"));
    m.weights.sigma_w = tril_from_json(jm.at("sigma_w_tril"), m.weights.mu_w.size());
    m.beta_f = jm.at("beta_f").get<double>();
    m.alpha = vector_from_json(jm.at("alpha"));
    model.models().push_back(std::move(m));
  }
  return model;
}

LWRModel load_lwr_model(const std::string& path) {
  const json j = read_file(path);
  check_header(j, path, "lwr");
  const int dim = j.at("dim").get<int>();
  const auto& jmodels = j.at("models");
  LWRModel model;
  model.ridge = j.at("ridge").get<double>();
  model.centers.resize(jmodels.size(), dim);
  model.scales.resize(jmodels.size(), dim);
  model.weights.resize(jmodels.size(), dim + 1);
  for (size_t m = 0; m < jmodels.size(); ++m) {
    model.centers.row(m) = vector_from_json(jmodels[m].at("center")).transpose();
    model.scales.row(m) = vector_from_json(jmodels[m].at("lambda")).transpose();
    model.weights.row(m) = vector_from_json(jmodels[m].at("w")).transpose();
  }
  return model;
}

}  // namespace lgr
