#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "tneb/config.hpp"
#include "tneb/dip.hpp"
#include "tneb/pipeline.hpp"

namespace py = pybind11;
using namespace tneb;

// Structured arguments cross the boundary as JSON text; the Python package
// wraps these with dict-based signatures.
namespace {

PointSet make_points(const Matrix& points, const std::optional<Labels>& labels) {
  PointSet ps;
  ps.points = points;
  ps.labels = labels;
  ps.validate();
  return ps;
}

PipelineConfig pipeline_config(const std::string& config_json) {
  PipelineConfig cfg;
  update_from_json(cfg, nlohmann::json::parse(config_json));
  cfg.validate();
  return cfg;
}

py::tuple generate_points(const std::string& spec_json) {
  const PointSet ps = generate(dataset_spec_from_json(nlohmann::json::parse(spec_json)));
  py::object groups = py::none();
  if (!ps.label_groups.empty()) groups = py::cast(ps.group_labels());
  return py::make_tuple(ps.points, *ps.labels, groups);
}

std::string fit_model(const Matrix& points, const std::string& config_json) {
  return to_json(fit(make_points(points, std::nullopt), pipeline_config(config_json).fit)).dump();
}

Vector model_log_density(const std::string& model_json, const Matrix& points) {
  const MixtureDensity density(mixture_from_json(nlohmann::json::parse(model_json)));
  return density.log_density(points.transpose());
}

std::string compare(const Matrix& points, const Labels& labels, const std::string& config_json,
                    const std::vector<std::uint64_t>& seeds, std::optional<std::size_t> k) {
  PointSet ps = make_points(points, labels);
  ps.name = "data";
  const auto strategies = default_strategies();
  const std::vector<Comparison> rows{compare_strategies(ps, pipeline_config(config_json), strategies, seeds, k)};
  return comparison_long_csv(rows);
}

std::string stability(const Matrix& points, const std::string& config_json, const std::vector<std::uint64_t>& seeds,
                      const std::vector<std::size_t>& component_counts, std::size_t k) {
  const PointSet ps = make_points(points, std::nullopt);
  const PipelineConfig cfg = pipeline_config(config_json);
  const StabilityReport r = component_counts.empty() ? seed_stability(ps, cfg, seeds, k, cfg.jobs)
                                                     : overcluster_stability(ps, cfg, component_counts, k, cfg.jobs);
  return to_json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_tneb, m) {
  m.doc() = "density-path hierarchical clustering";
  m.attr("__version__") = TNEB_VERSION;

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<IngestionError>(m, "IngestionError", base);
  py::register_exception<FitError>(m, "FitError", base);
  py::register_exception<FilterError>(m, "FilterError", base);
  py::register_exception<NumericalError>(m, "NumericalError", base);

  m.def("generate", &generate_points, py::arg("spec_json"));
  m.def("fit", &fit_model, py::arg("points"), py::arg("config_json"));
  m.def("log_density", &model_log_density, py::arg("model_json"), py::arg("points"));
  m.def("ari", &ari, py::arg("a"), py::arg("b"));
  m.def("dip", [](const std::vector<double>& v) { return dip_statistic(v); }, py::arg("values"));
  m.def("compare", &compare, py::arg("points"), py::arg("labels"), py::arg("config_json"), py::arg("seeds"),
        py::arg("k") = py::none(), py::call_guard<py::gil_scoped_release>());
  m.def("stability", &stability, py::arg("points"), py::arg("config_json"), py::arg("seeds"),
        py::arg("component_counts"), py::arg("k"), py::call_guard<py::gil_scoped_release>());

  py::class_<PipelineResult>(m, "PipelineResult")
      .def("cut", [](const PipelineResult& r, std::size_t k) { return cut(r, k).point_labels; }, py::arg("k"))
      .def_property_readonly("n_leaves", [](const PipelineResult& r) { return r.dendrogram.n_leaves(); })
      .def_property_readonly("assignments", [](const PipelineResult& r) { return r.filtered.assignments; })
      .def_property_readonly("ranked_jumps", [](const PipelineResult& r) { return r.curve.ranked_jumps(); })
      .def_property_readonly("thresholds_csv", [](const PipelineResult& r) { return threshold_csv(r.curve); })
      .def_property_readonly("model_json", [](const PipelineResult& r) { return to_json(r.model).dump(); })
      .def_property_readonly("dendrogram_json", [](const PipelineResult& r) { return to_json(r.dendrogram).dump(); })
      .def_property_readonly("graph_json", [](const PipelineResult& r) { return to_json(r.graph).dump(); })
      .def_property_readonly("newick", [](const PipelineResult& r) { return to_newick(r.dendrogram); })
      .def_property_readonly("timings", [](const PipelineResult& r) { return r.timings; });

  m.def(
      "run",
      [](const Matrix& points, const std::string& config_json) {
        const PointSet ps = make_points(points, std::nullopt);
        const PipelineConfig cfg = pipeline_config(config_json);
        py::gil_scoped_release release;
        return run_pipeline(ps, cfg);
      },
      py::arg("points"), py::arg("config_json"));
}
