#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lgr/data.hpp"
#include "lgr/lwr.hpp"
#include "lgr/model.hpp"
#include "lgr/serialize.hpp"

namespace py = pybind11;

namespace {

lgr::FitConfig make_config(double w_gen, double prune_threshold, double lambda_init,
                           double learning_rate, int iters, double elbo_tol,
                           bool learn_lengthscales, std::uint64_t seed, bool deterministic) {
  lgr::FitConfig cfg;
  cfg.w_gen = w_gen;
  cfg.prune_threshold = prune_threshold;
  cfg.lambda_init = lgr::Vector::Constant(1, lambda_init);
  cfg.learning_rate = learning_rate;
  cfg.convergence_iters = iters;
  cfg.elbo_tol = elbo_tol;
  cfg.learn_lengthscales = learn_lengthscales;
  cfg.seed = seed;
  cfg.deterministic = deterministic;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_lgr, m) {
  m.doc() = "Local Gaussian regression: probabilistic localized linear models trained by "
            "variational EM, with a classical LWR baseline.";

  py::class_<lgr::Dataset>(m, "Dataset")
      .def(py::init([](lgr::Matrix inputs, lgr::Vector targets) {
             lgr::Dataset d;
             d.inputs = std::move(inputs);
             d.targets = std::move(targets);
             return d;
           }),
           py::arg("inputs"), py::arg("targets"))
      .def_readwrite("inputs", &lgr::Dataset::inputs)
      .def_readwrite("targets", &lgr::Dataset::targets)
      .def_readwrite("clean_targets", &lgr::Dataset::clean_targets)
      .def_property_readonly("n", &lgr::Dataset::n)
      .def_property_readonly("dim", &lgr::Dataset::dim);

  m.def("gen_sine", &lgr::gen_sine, py::arg("n"), py::arg("noise_sd"), py::arg("seed"));
  m.def("gen_cross2d", &lgr::gen_cross2d, py::arg("n"), py::arg("noise_sd"), py::arg("seed"));
  m.def("cross2d_grid", &lgr::cross2d_grid, py::arg("edge"));
  m.def("cross2d_value", &lgr::cross2d_value, py::arg("x1"), py::arg("x2"));
  m.def("load_csv", &lgr::load_csv, py::arg("path"), py::arg("target_column"),
        py::arg("select_patterns") = std::vector<std::string>{});
  m.def("save_csv", &lgr::save_csv, py::arg("path"), py::arg("dataset"),
        py::arg("input_names") = std::vector<std::string>{}, py::arg("target_name") = "y",
        py::arg("clean_name") = "y_clean");
  m.def("mse", &lgr::mse, py::arg("predictions"), py::arg("targets"));
  m.def("nmse", &lgr::nmse, py::arg("predictions"), py::arg("targets"));
  m.def("train_test_split", &lgr::train_test_split, py::arg("dataset"), py::arg("fraction"),
        py::arg("seed"));

  m.def(
      "rbf_weight",
      [](const lgr::Vector& x, const lgr::Vector& center, const lgr::Vector& lambdas) {
        return lgr::rbf_weight(x, lgr::Center{center}, lgr::LengthScales::from_lambda(lambdas));
      },
      py::arg("x"), py::arg("center"), py::arg("lambdas"));
  m.def(
      "local_features",
      [](const lgr::Vector& x, const lgr::Vector& center, const lgr::Vector& lambdas) {
        return lgr::local_features(x, lgr::Center{center},
                                   lgr::LengthScales::from_lambda(lambdas));
      },
      py::arg("x"), py::arg("center"), py::arg("lambdas"));

  py::class_<lgr::FitReport>(m, "FitReport")
      .def_readonly("elbo_trace", &lgr::FitReport::elbo_trace)
      .def_readonly("model_count_trace", &lgr::FitReport::model_count_trace)
      .def_readonly("final_mse", &lgr::FitReport::final_mse)
      .def_readonly("final_nmse", &lgr::FitReport::final_nmse)
      .def_readonly("sweeps_run", &lgr::FitReport::sweeps_run)
      .def_readonly("fit_seconds", &lgr::FitReport::fit_seconds);

  py::class_<lgr::LGRModel>(m, "LGRModel")
      .def_property_readonly("dim", &lgr::LGRModel::dim)
      .def_property_readonly("model_count", &lgr::LGRModel::model_count)
      .def_property_readonly("beta_y", &lgr::LGRModel::beta_y)
      .def("predict", &lgr::LGRModel::predict, py::arg("x"))
      .def("predict_batch", &lgr::LGRModel::predict_batch, py::arg("X"))
      .def("centers",
           [](const lgr::LGRModel& model) {
             lgr::Matrix out(model.model_count(), model.dim());
             for (int i = 0; i < model.model_count(); ++i) {
               out.row(i) = model.models()[i].center.c.transpose();
             }
             return out;
           })
      .def("length_scales",
           [](const lgr::LGRModel& model) {
             lgr::Matrix out(model.model_count(), model.dim());
             for (int i = 0; i < model.model_count(); ++i) {
               out.row(i) = model.models()[i].scales.lambdas().transpose();
             }
             return out;
           })
      .def("save",
           [](const lgr::LGRModel& model, const std::string& path) {
             lgr::save_model(path, model);
           },
           py::arg("path"));

  m.def(
      "fit",
      [](const lgr::Dataset& data, double w_gen, double prune_threshold, double lambda_init,
         double learning_rate, int iters, double elbo_tol, bool learn_lengthscales,
         std::uint64_t seed, bool deterministic) {
        lgr::FitConfig cfg = make_config(w_gen, prune_threshold, lambda_init, learning_rate,
                                         iters, elbo_tol, learn_lengthscales, seed,
                                         deterministic);
        py::gil_scoped_release release;
        return lgr::fit(data, cfg);
      },
      py::arg("dataset"), py::arg("w_gen") = 0.3, py::arg("prune_threshold") = 1e3,
      py::arg("lambda_init") = 0.3, py::arg("learning_rate") = 1e-2, py::arg("iters") = 1000,
      py::arg("elbo_tol") = 1e-8, py::arg("learn_lengthscales") = true, py::arg("seed") = 0,
      py::arg("deterministic") = false);

  m.def("load_lgr_model", &lgr::load_lgr_model, py::arg("path"));

  py::class_<lgr::LWRModel>(m, "LWRModel")
      .def_readonly("centers", &lgr::LWRModel::centers)
      .def_readonly("scales", &lgr::LWRModel::scales)
      .def_readonly("weights", &lgr::LWRModel::weights)
      .def_readonly("ridge", &lgr::LWRModel::ridge)
      .def_property_readonly("model_count", &lgr::LWRModel::model_count)
      .def(
          "predict",
          [](const lgr::LWRModel& model, const lgr::Vector& x) {
            bool fallback = false;
            const double mean = lgr::lwr_predict(model, x, &fallback);
            return py::make_tuple(mean, fallback);
          },
          py::arg("x"))
      .def("predict_batch", &lgr::lwr_predict_batch, py::arg("X"))
      .def("save",
           [](const lgr::LWRModel& model, const std::string& path) {
             lgr::save_model(path, model);
           },
           py::arg("path"));

  m.def("lwr_place_centers", &lgr::lwr_place_centers, py::arg("dataset"), py::arg("w_gen"),
        py::arg("lambda_init"));
  m.def("lwr_fit", &lgr::lwr_fit, py::arg("dataset"), py::arg("centers"), py::arg("scales"),
        py::arg("ridge") = 1e-6);
  m.def("load_lwr_model", &lgr::load_lwr_model, py::arg("path"));
}
