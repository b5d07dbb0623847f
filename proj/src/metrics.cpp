#include "tneb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "tneb/dataset.hpp"

namespace tneb {

namespace {

using Wide = __int128;

Wide pairs_of(std::uint64_t count) { return static_cast<Wide>(count) * static_cast<Wide>(count - (count > 0)) / 2; }

std::vector<std::uint64_t> dense_counts(const Labels& labels, std::vector<std::size_t>& dense) {
  std::map<int, std::size_t> ids;
  dense.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) dense[i] = ids.try_emplace(labels[i], ids.size()).first->second;
  std::vector<std::uint64_t> counts(ids.size(), 0);
  for (std::size_t id : dense) ++counts[id];
  return counts;
}

StabilityReport run_sweep(const StabilityRunner& run, const std::vector<std::uint64_t>& parameters, std::size_t jobs,
                          std::string parameter_name, std::string fingerprint) {
  std::vector<std::optional<Labels>> labels(parameters.size());
  std::vector<std::string> failures(parameters.size());
  parallel_for(parameters.size(), jobs, [&](std::size_t i) {
    try {
      labels[i] = run(parameters[i]);
    } catch (const FitError& e) {
      failures[i] = e.what();
    }
  });
  std::vector<StabilityRun> runs;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    if (labels[i])
      runs.push_back({parameters[i], std::move(*labels[i])});
    else
      warnings.push_back(parameter_name + " " + std::to_string(parameters[i]) + " failed: " + failures[i]);
  }
  StabilityReport report = stability_report(std::move(runs), std::move(parameter_name), std::move(fingerprint));
  report.warnings = std::move(warnings);
  return report;
}

}  // namespace

double ari(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw ValidationError("ARI needs labelings of equal length");
  if (a.size() < 2) throw ValidationError("ARI needs at least two points");
  std::vector<std::size_t> da, db;
  const auto ca = dense_counts(a, da);
  const auto cb = dense_counts(b, db);
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> table;
  for (std::size_t i = 0; i < a.size(); ++i) ++table[{da[i], db[i]}];

  Wide together = 0;
  for (const auto& [cell, count] : table) together += pairs_of(count);
  Wide sa = 0, sb = 0;
  for (auto c : ca) sa += pairs_of(c);
  for (auto c : cb) sb += pairs_of(c);
  const Wide total = pairs_of(a.size());

  // ARI scaled by 2 * total to stay in integers.
  const Wide numerator = 2 * together * total - 2 * sa * sb;
  const Wide denominator = (sa + sb) * total - 2 * sa * sb;
  if (denominator == 0) return 1.0;
  return static_cast<double>(static_cast<long double>(numerator) / static_cast<long double>(denominator));
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

StabilityReport stability_report(std::vector<StabilityRun> runs, std::string parameter_name, std::string fingerprint) {
  StabilityReport r;
  r.parameter_name = std::move(parameter_name);
  r.fingerprint = std::move(fingerprint);
  r.runs = std::move(runs);
  const auto n = static_cast<Eigen::Index>(r.runs.size());
  r.pairwise_ari = Matrix::Identity(n, n);
  std::vector<double> off_diagonal;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = ari(r.runs[static_cast<std::size_t>(i)].labels, r.runs[static_cast<std::size_t>(j)].labels);
      r.pairwise_ari(i, j) = r.pairwise_ari(j, i) = v;
      off_diagonal.push_back(v);
    }
  if (!off_diagonal.empty()) {
    const MeanStd s = mean_std(off_diagonal);
    r.mean = s.mean;
    r.std = s.std;
    r.min = *std::min_element(off_diagonal.begin(), off_diagonal.end());
  }
  return r;
}

StabilityReport seed_stability(const StabilityRunner& run, std::span<const std::uint64_t> seeds, std::size_t jobs,
                               std::string fingerprint) {
  return run_sweep(run, {seeds.begin(), seeds.end()}, jobs, "seed", std::move(fingerprint));
}

StabilityReport overcluster_stability(const StabilityRunner& run, std::span<const std::size_t> component_counts,
                                      std::size_t jobs, std::string fingerprint) {
  return run_sweep(run, {component_counts.begin(), component_counts.end()}, jobs, "n_components",
                   std::move(fingerprint));
}

std::vector<std::size_t> overcluster_sweep(std::size_t n_clusters, std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  for (std::size_t i = first; i <= last; ++i) out.push_back(n_clusters + 5 * i);
  return out;
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json matrix = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.pairwise_ari.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.pairwise_ari.cols()));
    for (Eigen::Index j = 0; j < r.pairwise_ari.cols(); ++j) row[static_cast<std::size_t>(j)] = r.pairwise_ari(i, j);
    matrix.push_back(row);
  }
  std::vector<std::uint64_t> parameters;
  for (const auto& run : r.runs) parameters.push_back(run.parameter);
  return {{"parameter", r.parameter_name}, {"fingerprint", r.fingerprint}, {"values", parameters},
          {"pairwise_ari", matrix},        {"mean", r.mean},               {"min", r.min},
          {"std", r.std},                  {"warnings", r.warnings}};
}

std::string matrix_csv(const StabilityReport& r) {
  std::string out = r.parameter_name;
  for (const auto& run : r.runs) out += "," + std::to_string(run.parameter);
  out += "\n";
  for (Eigen::Index i = 0; i < r.pairwise_ari.rows(); ++i) {
    out += std::to_string(r.runs[static_cast<std::size_t>(i)].parameter);
    for (Eigen::Index j = 0; j < r.pairwise_ari.cols(); ++j) out += "," + format_double(r.pairwise_ari(i, j));
    out += "\n";
  }
  return out;
}

std::string summary_csv(const std::string& dataset, std::size_t dim, const StabilityReport& r) {
  return "dataset,dim,mean,std,min\n" + dataset + "," + std::to_string(dim) + "," + format_double(r.mean) + "," +
         format_double(r.std) + "," + format_double(r.min) + "\n";
}

}  // namespace tneb
