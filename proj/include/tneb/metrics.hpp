#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "tneb/common.hpp"

namespace tneb {

// Hubert-Arabie adjusted Rand index. Two constant labelings score 1.
double ari(const Labels& a, const Labels& b);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // unbiased (n - 1); 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

struct StabilityRun {
  std::uint64_t parameter = 0;  // seed or component count
  Labels labels;
};

struct StabilityReport {
  std::string parameter_name;  // "seed" or "n_components"
  std::string fingerprint;     // configuration shared by all runs
  std::vector<StabilityRun> runs;
  Matrix pairwise_ari;         // symmetric, unit diagonal
  double mean = 1.0;           // over off-diagonal pairs
  double min = 1.0;
  double std = 0.0;
  std::vector<std::string> warnings;
};

StabilityReport stability_report(std::vector<StabilityRun> runs, std::string parameter_name, std::string fingerprint);

// Produces labels for one seed or component count. Throwing FitError marks the
// run as failed: it is left out of the matrix with a warning.
using StabilityRunner = std::function<Labels(std::uint64_t)>;

StabilityReport seed_stability(const StabilityRunner& run, std::span<const std::uint64_t> seeds, std::size_t jobs = 1,
                               std::string fingerprint = {});
StabilityReport overcluster_stability(const StabilityRunner& run, std::span<const std::size_t> component_counts,
                                      std::size_t jobs = 1, std::string fingerprint = {});

// Component counts n_clusters + 5i for i in [first, last].
std::vector<std::size_t> overcluster_sweep(std::size_t n_clusters, std::size_t first = 2, std::size_t last = 9);

nlohmann::json to_json(const StabilityReport& r);
std::string matrix_csv(const StabilityReport& r);
// Header plus one row: dataset,dim,mean,std,min.
std::string summary_csv(const std::string& dataset, std::size_t dim, const StabilityReport& r);

}  // namespace tneb
