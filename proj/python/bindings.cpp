// Python surface: checkpoints, prediction, metrics and the pipeline commands.

#include "hypervae/app/checkpoint.hpp"
#include "hypervae/app/commands.hpp"
#include "hypervae/app/config.hpp"
#include "hypervae/error.hpp"
#include "hypervae/metrics/metrics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace py = pybind11;
using namespace hypervae;

namespace {

using Settings = std::map<std::string, std::string>;

app::RunConfig resolve(const Settings& settings, const std::optional<std::string>& config_file) {
  std::optional<std::filesystem::path> file;
  if (config_file) file = *config_file;
  return app::resolve_config(file, settings);
}

py::dict report_dict(const metrics::MetricsReport& r) {
  py::dict d;
  d["n"] = r.n;
  d["male"] = r.male;
  d["rmse"] = r.rmse;
  d["rmsle"] = r.rmsle;
  d["log_bias"] = r.log_bias;
  d["slope"] = r.slope;
  d["mape"] = r.mape;
  d["epsilon"] = r.epsilon;
  d["beta"] = r.beta;
  return d;
}

/// A loaded checkpoint of either family.
class PyModel {
 public:
  explicit PyModel(app::Model model) : model_(std::move(model)) {}

  static PyModel load(const std::filesystem::path& path) { return PyModel(app::load_checkpoint(path)); }
  void save(const std::filesystem::path& path) const { app::save_checkpoint(model_, path); }

  std::string family() const { return is_vae() ? "vae" : "mdn"; }

  std::string target() const {
    if (is_vae()) return std::string(vae::kind_name(vae().arch.kind));
    return std::string(mdn::target_name(mdn().arch.target));
  }

  std::vector<double> band_centers() const {
    const auto& grid = is_vae() ? vae().grid : mdn().grid;
    return grid ? grid->band_centers : std::vector<double>{};
  }

  int output_dim() const { return is_vae() ? vae().arch.output_dim : mdn().arch.output_dim; }

  nn::Matrix predict(const nn::Matrix& rrs, std::uint64_t seed, const std::string& mode) const {
    nn::Rng rng(seed);
    if (is_vae()) return vae::predict(vae(), rrs, rng);
    return mdn::predict(mdn(), rrs, mdn::parse_mode(mode), rng);
  }

  std::pair<nn::Matrix, nn::Matrix> predict_ensemble(const nn::Matrix& rrs, int n,
                                                     std::uint64_t seed) const {
    if (!is_vae()) fail(ErrorCode::invalid_argument, "ensembles are drawn from VAE checkpoints");
    nn::Rng rng(seed);
    auto e = vae::predict_ensemble(vae(), rrs, n, rng);
    return {std::move(e.mean), std::move(e.std)};
  }

 private:
  bool is_vae() const { return std::holds_alternative<vae::VaeParameters>(model_); }
  const vae::VaeParameters& vae() const { return std::get<vae::VaeParameters>(model_); }
  const mdn::MdnParameters& mdn() const { return std::get<mdn::MdnParameters>(model_); }

  app::Model model_;
};

}  // namespace

PYBIND11_MODULE(_hypervae, m) {
  m.doc() = "Hyperspectral VAE / MDN inversion toolkit";
  m.attr("__version__") = app::toolkit_version;

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] {
    return py::object(py::exception<Error>(m, "HypervaeError", PyExc_RuntimeError));
  });
  // Raised with the message "CODE: text" and the bare token in `.code`.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string code(error_code_name(e.code()));
      const py::object& type = error_type.get_stored();
      py::object instance = type(code + ": " + e.what());
      instance.attr("code") = code;
      PyErr_SetObject(type.ptr(), instance.ptr());
    }
  });

  py::class_<PyModel>(m, "Model")
      .def_static("load", &PyModel::load, py::arg("path"), "Read and verify a checkpoint.")
      .def("save", &PyModel::save, py::arg("path"))
      .def_property_readonly("family", &PyModel::family, "'vae' or 'mdn'")
      .def_property_readonly("target", &PyModel::target, "'aphy' or 'chla'")
      .def_property_readonly("band_centers", &PyModel::band_centers, "Input grid in nm.")
      .def_property_readonly("output_dim", &PyModel::output_dim)
      .def("predict", &PyModel::predict, py::arg("rrs"), py::arg("seed") = 0,
           py::arg("mode") = "highest_weight",
           "Rows of Rrs on the model grid -> physical-unit predictions. `mode` "
           "applies to MDN checkpoints only.")
      .def("predict_ensemble", &PyModel::predict_ensemble, py::arg("rrs"), py::arg("n"),
           py::arg("seed") = 0, "VAE only: (mean, std) over n stochastic draws.");

  m.def("evaluate_all", [](const std::vector<double>& e, const std::vector<double>& t) {
    return report_dict(metrics::evaluate_all(e, t));
  }, py::arg("estimated"), py::arg("measured"));
  m.def("male", [](const std::vector<double>& e, const std::vector<double>& t) {
    return metrics::male(e, t);
  }, py::arg("estimated"), py::arg("measured"));
  m.def("rmse", [](const std::vector<double>& e, const std::vector<double>& t) {
    return metrics::rmse(e, t);
  }, py::arg("estimated"), py::arg("measured"));
  m.def("rmsle", [](const std::vector<double>& e, const std::vector<double>& t) {
    return metrics::rmsle(e, t);
  }, py::arg("estimated"), py::arg("measured"));
  m.def("log_bias", [](const std::vector<double>& e, const std::vector<double>& t) {
    return metrics::log_bias(e, t);
  }, py::arg("estimated"), py::arg("measured"));
  m.def("slope", [](const std::vector<double>& e, const std::vector<double>& t) {
    return metrics::slope(e, t);
  }, py::arg("estimated"), py::arg("measured"));

  // Commands take string settings keyed like the config file.
  const auto settings = py::arg("settings");
  const auto config_file = py::arg("config_file") = std::optional<std::string>{};

  m.def("config_json", [](const Settings& s, const std::optional<std::string>& f) {
    return app::config_to_json(resolve(s, f));
  }, settings, config_file, "Fully resolved configuration as JSON.");

  m.def("preprocess", [](const Settings& s, const std::optional<std::string>& f) {
    const auto out = app::cmd_preprocess(resolve(s, f));
    py::dict d;
    d["output"] = out.output;
    d["rejections"] = out.rejections;
    d["kept"] = out.kept;
    d["rejected"] = out.rejected;
    d["train"] = out.train;
    d["test"] = out.test;
    return d;
  }, settings, config_file);

  m.def("train", [](const Settings& s, const std::optional<std::string>& f) {
    const auto out = app::cmd_train(resolve(s, f));
    py::dict d;
    d["checkpoint"] = out.checkpoint;
    d["history"] = out.history;
    d["experiment"] = out.experiment;
    d["epochs"] = out.train_history.epochs();
    d["best_epoch"] = out.train_history.best_epoch;
    d["test_metrics"] = out.test_metrics ? py::object(report_dict(*out.test_metrics)) : py::none();
    return d;
  }, settings, config_file);

  m.def("predict", [](const Settings& s, const std::optional<std::string>& f) {
    const auto out = app::cmd_predict(resolve(s, f));
    py::dict d;
    d["output"] = out.output;
    d["samples"] = out.samples;
    d["rows"] = out.rows;
    return d;
  }, settings, config_file);

  m.def("evaluate", [](const Settings& s, const std::optional<std::string>& f) {
    return app::cmd_evaluate(resolve(s, f)).to_json();
  }, settings, config_file, "Metrics report as JSON text.");

  m.def("sweep", [](const Settings& s, const std::optional<std::string>& f) {
    return app::cmd_sweep(resolve(s, f)).to_csv();
  }, settings, config_file, "Per-band metrics as CSV text.");

  m.def("gen_synthetic", [](const Settings& s, const std::optional<std::string>& f) {
    return app::cmd_gen_synthetic(resolve(s, f));
  }, settings, config_file);
}
