#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tneb/baselines.hpp"
#include "tneb/clustergraph.hpp"
#include "tneb/hierarchy.hpp"
#include "tneb/metrics.hpp"

namespace tneb {

struct PipelineConfig {
  FitConfig fit;
  FilterConfig filter;
  bool filter_enabled = true;
  NebConfig neb;
  std::size_t knn = 10;
  std::size_t jobs = 1;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
// Keys missing from j keep the values already in cfg.
void update_from_json(PipelineConfig& cfg, const nlohmann::json& j);
// Stable hash of the configuration (seed included).
std::string fingerprint(const PipelineConfig& cfg);

using StageTimings = std::vector<std::pair<std::string, double>>;  // stage, seconds

struct FitResult {
  MixtureModel model;
  FilteredModel filtered;
};

struct PipelineResult {
  MixtureModel model;
  FilteredModel filtered;
  ClusterGraph graph;
  Dendrogram dendrogram;
  ThresholdCurve curve;
  StageTimings timings;
};

// Mixture fit followed by component filtering. Errors carry the stage name.
FitResult fit_stage(const PointSet& ps, const PipelineConfig& cfg, StageTimings* timings = nullptr);

// Fit, filter, NEB graph, dendrogram and threshold curve.
PipelineResult run_pipeline(const PointSet& ps, const PipelineConfig& cfg, NebCache* cache = nullptr);

// Graph, dendrogram and curve for an already filtered model.
void hierarchy_stage(PipelineResult& result, const PipelineConfig& cfg, NebCache* cache = nullptr);

// Flat clustering at k from a finished pipeline run.
Clustering cut(const PipelineResult& result, std::size_t k);

// Seed and component-count sweeps of the full pipeline, cut at k.
StabilityReport seed_stability(const PointSet& ps, const PipelineConfig& cfg, std::span<const std::uint64_t> seeds,
                               std::size_t k, std::size_t jobs = 1);
StabilityReport overcluster_stability(const PointSet& ps, const PipelineConfig& cfg,
                                      std::span<const std::size_t> component_counts, std::size_t k,
                                      std::size_t jobs = 1);

struct StrategyScores {
  MergeStrategy strategy;
  std::vector<double> ari;  // one per successful seed
  MeanStd summary;
};

struct Comparison {
  std::string dataset;
  std::vector<std::uint64_t> seeds;
  std::vector<StrategyScores> scores;
  std::vector<std::string> warnings;
};

// Oracle, Euclidean and dip with and without recomputation, NEB, and the
// k-means backend with Euclidean merging.
std::vector<MergeStrategy> default_strategies();

// Scores every strategy against the point labels at k (the number of classes
// when unset). Mixture-backed strategies share one fit per seed.
Comparison compare_strategies(const PointSet& ps, const PipelineConfig& cfg, std::span<const MergeStrategy> strategies,
                              std::span<const std::uint64_t> seeds, std::optional<std::size_t> k = std::nullopt);

// One row per dataset, one "mean ± std" column per strategy.
std::string comparison_table_csv(std::span<const Comparison> rows);
// dataset,strategy,mean,std,n_seeds,values
std::string comparison_long_csv(std::span<const Comparison> rows);

}  // namespace tneb
