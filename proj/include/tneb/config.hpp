#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tneb/pipeline.hpp"

namespace tneb {

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

enum class StabilityMode { seeds, components };

// Everything a CLI run needs. Pipeline keys sit at the top level of the JSON
// file next to the run keys; see README for the schema.
struct RunConfig {
  std::optional<DatasetSpec> dataset;
  std::optional<std::string> input;  // CSV path
  std::optional<std::string> label_column;
  PipelineConfig pipeline;
  bool auto_components = true;  // n_components not given: 15 for 2D data, else 25
  std::optional<std::size_t> k_target;
  MergeStrategy strategy;
  std::vector<std::uint64_t> seeds;
  StabilityMode stability = StabilityMode::seeds;
  std::vector<std::size_t> component_counts;  // empty: n + 5i, i = 2..9
  std::string output = "tneb_out";

  void validate() const;
  // Fixes n_components from the data dimension when it was left unset.
  void resolve_for(const PointSet& ps);
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json read_json_file(const std::string& path);

}  // namespace tneb
