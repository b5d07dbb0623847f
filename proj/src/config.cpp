#include "tneb/config.hpp"

#include <fstream>
#include <set>

namespace tneb {

namespace {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

template <class T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& into) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    into.reset();
  else
    into = j.at(key).get<T>();
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ValidationError("unknown " + what + " key: " + item.key());
}

const std::set<std::string> kDatasetKeys{
    "kind",          "n_points",       "dimension",         "n_classes",       "seed",
    "noise",         "circle_factor",  "blob_std",          "centers",         "anisotropic_transform",
    "class_weights", "group_radius",   "pair_separation",   "hierarchical_std", "sphere_radius",
    "min_center_separation", "scale_min", "scale_max",      "student_df",
    "spine_segments", "spine_step", "spine_bend"};

const std::set<std::string> kRunKeys{
    "dataset", "input", "label_column", "k_target", "strategy", "recompute_centers", "backend", "seeds",
    "stability", "component_counts", "output",
    // pipeline keys
    "n_components", "family", "df", "max_em_steps", "tolerance", "ridge", "seed", "retries", "kmeans_iterations",
    "filter", "min_points", "elongation_factor", "n_path_points", "n_steps", "step_size", "step_scale", "beta1",
    "beta2", "epsilon", "keep_best", "knn", "jobs"};

}  // namespace

nlohmann::json to_json(const DatasetSpec& spec) {
  return {{"kind", std::string(to_string(spec.kind))},
          {"n_points", spec.n_points},
          {"dimension", spec.dimension},
          {"n_classes", spec.n_classes},
          {"seed", spec.seed},
          {"noise", optional_json(spec.noise)},
          {"circle_factor", spec.circle_factor},
          {"blob_std", optional_json(spec.blob_std)},
          {"centers", optional_json(spec.centers)},
          {"anisotropic_transform", spec.anisotropic_transform},
          {"class_weights", optional_json(spec.class_weights)},
          {"group_radius", spec.group_radius},
          {"pair_separation", spec.pair_separation},
          {"hierarchical_std", spec.hierarchical_std},
          {"sphere_radius", spec.sphere_radius},
          {"min_center_separation", spec.min_center_separation},
          {"scale_min", spec.scale_min},
          {"scale_max", spec.scale_max},
          {"student_df", spec.student_df},
          {"spine_segments", spec.spine_segments},
          {"spine_step", spec.spine_step},
          {"spine_bend", spec.spine_bend}};
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  reject_unknown(j, kDatasetKeys, "dataset");
  try {
    DatasetSpec spec;
    if (!j.contains("kind")) throw ValidationError("dataset needs a kind");
    spec.kind = dataset_kind_from_string(j.at("kind").get<std::string>());
    if (!is_two_dimensional(spec.kind)) spec.dimension = 8;
    read_key(j, "n_points", spec.n_points);
    read_key(j, "dimension", spec.dimension);
    read_key(j, "n_classes", spec.n_classes);
    read_key(j, "seed", spec.seed);
    read_optional(j, "noise", spec.noise);
    read_key(j, "circle_factor", spec.circle_factor);
    read_optional(j, "blob_std", spec.blob_std);
    read_optional(j, "centers", spec.centers);
    read_key(j, "anisotropic_transform", spec.anisotropic_transform);
    read_optional(j, "class_weights", spec.class_weights);
    read_key(j, "group_radius", spec.group_radius);
    read_key(j, "pair_separation", spec.pair_separation);
    read_key(j, "hierarchical_std", spec.hierarchical_std);
    read_key(j, "sphere_radius", spec.sphere_radius);
    read_key(j, "min_center_separation", spec.min_center_separation);
    read_key(j, "scale_min", spec.scale_min);
    read_key(j, "scale_max", spec.scale_max);
    read_key(j, "student_df", spec.student_df);
    read_key(j, "spine_segments", spec.spine_segments);
    read_key(j, "spine_step", spec.spine_step);
    read_key(j, "spine_bend", spec.spine_bend);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid dataset specification: ") + e.what());
  }
}

void RunConfig::validate() const {
  if (dataset.has_value() == input.has_value())
    throw ValidationError("give exactly one of 'dataset' and 'input'");
  if (dataset) dataset->validate();
  pipeline.validate();
  strategy.validate();
  if (k_target && *k_target < 1) throw ValidationError("k_target must be >= 1");
  if (output.empty()) throw ValidationError("output directory must not be empty");
}

void RunConfig::resolve_for(const PointSet& ps) {
  if (!auto_components) return;
  pipeline.fit.n_components = ps.dim() == 2 ? 15 : 25;
  auto_components = false;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, kRunKeys, "config");
  RunConfig cfg;
  try {
    if (j.contains("dataset") && !j.at("dataset").is_null()) cfg.dataset = dataset_spec_from_json(j.at("dataset"));
    read_optional(j, "input", cfg.input);
    read_optional(j, "label_column", cfg.label_column);
    update_from_json(cfg.pipeline, j);
    cfg.auto_components = !j.contains("n_components") || j.at("n_components").is_null();
    read_optional(j, "k_target", cfg.k_target);
    if (j.contains("strategy")) cfg.strategy.kind = strategy_kind_from_string(j.at("strategy").get<std::string>());
    read_key(j, "recompute_centers", cfg.strategy.recompute_centers);
    if (j.contains("backend")) cfg.strategy.backend = backend_from_string(j.at("backend").get<std::string>());
    read_key(j, "seeds", cfg.seeds);
    if (cfg.seeds.empty()) cfg.seeds.push_back(cfg.pipeline.fit.seed);
    if (j.contains("stability")) {
      const auto mode = j.at("stability").get<std::string>();
      if (mode == "seeds")
        cfg.stability = StabilityMode::seeds;
      else if (mode == "components")
        cfg.stability = StabilityMode::components;
      else
        throw ValidationError("stability must be 'seeds' or 'components'");
    }
    read_key(j, "component_counts", cfg.component_counts);
    read_key(j, "output", cfg.output);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid configuration: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = to_json(cfg.pipeline);
  if (cfg.auto_components) j["n_components"] = nullptr;
  j["dataset"] = cfg.dataset ? to_json(*cfg.dataset) : nlohmann::json();
  j["input"] = optional_json(cfg.input);
  j["label_column"] = optional_json(cfg.label_column);
  j["k_target"] = optional_json(cfg.k_target);
  j["strategy"] = std::string(to_string(cfg.strategy.kind));
  j["recompute_centers"] = cfg.strategy.recompute_centers;
  j["backend"] = std::string(to_string(cfg.strategy.backend));
  j["seeds"] = cfg.seeds;
  j["stability"] = cfg.stability == StabilityMode::seeds ? "seeds" : "components";
  j["component_counts"] = cfg.component_counts;
  j["output"] = cfg.output;
  return j;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace tneb
