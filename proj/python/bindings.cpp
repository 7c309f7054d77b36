#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "marlids/commands.hpp"
#include "marlids/errors.hpp"
#include "marlids/model_io.hpp"
#include "marlids/report.hpp"
#include "marlids/reward_model.hpp"
#include "marlids/synthetic.hpp"
#include "marlids/wmse.hpp"

namespace py = pybind11;
using marlids::RunConfig;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

RunConfig make_config(const py::object& config) {
  if (config.is_none()) return {};
  if (py::isinstance<RunConfig>(config)) return config.cast<RunConfig>();
  return RunConfig::from_json(from_python(config));
}

// Commands report progress on a stream; the Python side gets it as a string.
template <typename F>
std::string capture(F&& f) {
  std::ostringstream log;
  f(log);
  return log.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-agent deep Q-learning intrusion detection";

  auto base = py::register_exception<marlids::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<marlids::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<marlids::IoError>(m, "IoError", base.ptr());
  py::register_exception<marlids::IncompatibleError>(m, "IncompatibleError", base.ptr());

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("load", &RunConfig::load, py::arg("path"))
      .def_static("from_dict", [](const py::object& d) { return RunConfig::from_json(from_python(d)); })
      .def("to_dict", [](const RunConfig& c) { return to_python(c.to_json()); })
      .def("set", &RunConfig::apply_override, py::arg("assignment"), "Apply one 'section.key=value' override.")
      .def("validate", &RunConfig::validate);

  using Vec = std::vector<double>;
  m.def(
      "wmse_loss", [](const Vec& p, const Vec& t, const Vec& w) { return marlids::wmse_loss<double>(p, t, w); },
      py::arg("pred"), py::arg("target"), py::arg("weights"));
  m.def(
      "wmse_gradient", [](const Vec& p, const Vec& t, const Vec& w) { return marlids::wmse_gradient<double>(p, t, w); },
      py::arg("pred"), py::arg("target"), py::arg("weights"));
  m.def(
      "l1_reward",
      [](int truth, int action, double k) {
        return marlids::l1_reward(static_cast<marlids::L1Category>(truth), static_cast<marlids::L1Category>(action), k);
      },
      py::arg("truth"), py::arg("action"), py::arg("k") = 5.0,
      "Categories: 0 = agent's attack, 1 = other attack, 2 = normal.");
  m.def(
      "decider_reward", [](std::size_t a, std::size_t t) { return marlids::decider_reward(a, t); }, py::arg("action"),
      py::arg("truth"));

  m.def(
      "make_synthetic",
      [](const std::vector<std::pair<std::string, std::size_t>>& classes, const std::filesystem::path& out,
         std::size_t feature_dim, double separation, double noise, std::uint64_t seed) {
        std::vector<marlids::ClassSpec> specs;
        for (const auto& [label, count] : classes) specs.push_back({label, count});
        marlids::write_flows_csv(marlids::make_gaussian_flows(specs, {feature_dim, separation, noise, seed}), out);
      },
      py::arg("classes"), py::arg("out"), py::arg("feature_dim") = 8, py::arg("separation") = 6.0,
      py::arg("noise") = 1.0, py::arg("seed") = 7);

  m.def(
      "preprocess",
      [](const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
         const py::object& config) {
        const auto cfg = make_config(config);
        return capture([&](std::ostream& log) { marlids::cmd_preprocess(inputs, cfg, out_dir, log); });
      },
      py::arg("inputs"), py::arg("out_dir"), py::arg("config") = py::none());

  m.def(
      "train",
      [](const std::filesystem::path& train, const std::filesystem::path& model_out, const py::object& config,
         std::optional<std::filesystem::path> log_out) {
        const auto cfg = make_config(config);
        const auto log_path = log_out.value_or(std::filesystem::path(model_out.string() + ".log.jsonl"));
        return capture([&](std::ostream& log) { marlids::cmd_train(train, cfg, model_out, log_path, log); });
      },
      py::arg("train"), py::arg("model_out"), py::arg("config") = py::none(), py::arg("log_out") = py::none());

  m.def(
      "evaluate",
      [](const std::filesystem::path& model, const std::filesystem::path& test, bool allow_unknown_labels) {
        const auto ensemble = marlids::load_model(model);
        const auto data = marlids::read_dataset(test);
        return to_python(marlids::report_to_json(marlids::evaluate_model(ensemble, data.data, allow_unknown_labels)));
      },
      py::arg("model"), py::arg("test"), py::arg("allow_unknown_labels") = false,
      "Returns the evaluation report as a dict.");

  m.def(
      "predict_csv",
      [](const std::filesystem::path& model, const std::filesystem::path& csv) {
        std::ostringstream out, log;
        const auto failures = marlids::cmd_predict(model, {csv, std::nullopt}, marlids::DataConfig{}, out, log);
        return py::make_tuple(out.str(), failures, log.str());
      },
      py::arg("model"), py::arg("csv"), "Returns (csv_text, failed_rows, log).");

  m.def(
      "adapt",
      [](const std::filesystem::path& model, const std::filesystem::path& new_data,
         const std::set<std::string>& affected, const std::filesystem::path& model_out,
         std::optional<std::filesystem::path> previous_train, std::optional<std::size_t> episodes,
         bool allow_new_labels, const std::vector<std::string>& overrides) {
        marlids::AdaptRequest req;
        req.model = model;
        req.new_data = new_data;
        req.affected = affected;
        req.model_out = model_out;
        req.previous_train = std::move(previous_train);
        req.episodes = episodes;
        req.allow_new_labels = allow_new_labels;
        std::ostringstream log;
        return to_python(marlids::cmd_adapt(req, overrides, log));
      },
      py::arg("model"), py::arg("new_data"), py::arg("affected"), py::arg("model_out"),
      py::arg("previous_train") = py::none(), py::arg("episodes") = py::none(), py::arg("allow_new_labels") = false,
      py::arg("overrides") = std::vector<std::string>{}, "Returns the per-agent digest diff.");

  m.def("model_digest", [](const std::filesystem::path& model) { return marlids::model_digest(marlids::load_model(model)); },
        py::arg("model"));
  m.def("agent_digests", [](const std::filesystem::path& model) { return marlids::load_model(model).agent_digests(); },
        py::arg("model"));
  m.def("model_labels", [](const std::filesystem::path& model) { return marlids::load_model(model).registry().labels(); },
        py::arg("model"));
}
