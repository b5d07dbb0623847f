#include "tneb/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "tneb/dataset.hpp"
#include "tneb/hash.hpp"

namespace tneb {

namespace {

// Runs fn and prefixes any library error with the stage name, keeping its type.
template <class Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = stage + ": ";
  try {
    return fn();
  } catch (const FitError& e) {
    throw FitError(prefix + e.what(), e.diagnostics());
  } catch (const IngestionError& e) {
    throw IngestionError(prefix + e.what(), e.row());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what(), e.step());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const FilterError& e) {
    throw FilterError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void record(StageTimings* timings, const std::string& stage, const Stopwatch& watch) {
  if (timings) timings->push_back({stage, watch.seconds()});
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

std::size_t checked_k(std::optional<std::size_t> k, const PointSet& ps) {
  if (k) return *k;
  if (!ps.has_labels()) throw ValidationError("a target cluster count is needed for unlabeled data");
  return ps.n_label_values();
}

}  // namespace

void PipelineConfig::validate() const {
  fit.validate();
  filter.validate();
  neb.validate();
  if (knn < 1) throw ValidationError("knn must be >= 1");
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json retries = nlohmann::json::array();
  for (const auto& r : cfg.fit.retries) retries.push_back({{"tolerance", r.tolerance}, {"max_steps", r.max_steps}});
  return {{"n_components", cfg.fit.n_components},
          {"family", std::string(to_string(cfg.fit.family))},
          {"df", cfg.fit.df},
          {"max_em_steps", cfg.fit.max_em_steps},
          {"tolerance", cfg.fit.tolerance},
          {"ridge", cfg.fit.ridge},
          {"seed", cfg.fit.seed},
          {"retries", retries},
          {"kmeans_iterations", cfg.fit.kmeans_iterations},
          {"filter", cfg.filter_enabled},
          {"min_points", cfg.filter.min_points},
          {"elongation_factor", cfg.filter.elongation_factor},
          {"n_path_points", cfg.neb.n_path_points},
          {"n_steps", cfg.neb.n_steps},
          {"step_size", cfg.neb.step_size ? nlohmann::json(*cfg.neb.step_size) : nlohmann::json()},
          {"step_scale", cfg.neb.step_scale},
          {"beta1", cfg.neb.beta1},
          {"beta2", cfg.neb.beta2},
          {"epsilon", cfg.neb.epsilon},
          {"keep_best", cfg.neb.keep_best},
          {"knn", cfg.knn},
          {"jobs", cfg.jobs}};
}

void update_from_json(PipelineConfig& cfg, const nlohmann::json& j) {
  try {
    // null means "pick from the data dimension", resolved by the caller
    if (j.contains("n_components") && !j.at("n_components").is_null())
      cfg.fit.n_components = j.at("n_components").get<std::size_t>();
    if (j.contains("family")) cfg.fit.family = family_from_string(j.at("family").get<std::string>());
    read_key(j, "df", cfg.fit.df);
    read_key(j, "max_em_steps", cfg.fit.max_em_steps);
    read_key(j, "tolerance", cfg.fit.tolerance);
    read_key(j, "ridge", cfg.fit.ridge);
    read_key(j, "seed", cfg.fit.seed);
    if (j.contains("retries")) {
      cfg.fit.retries.clear();
      for (const auto& r : j.at("retries"))
        cfg.fit.retries.push_back({r.at("tolerance").get<double>(), r.at("max_steps").get<std::size_t>()});
    }
    read_key(j, "kmeans_iterations", cfg.fit.kmeans_iterations);
    read_key(j, "filter", cfg.filter_enabled);
    read_key(j, "min_points", cfg.filter.min_points);
    read_key(j, "elongation_factor", cfg.filter.elongation_factor);
    read_key(j, "n_path_points", cfg.neb.n_path_points);
    read_key(j, "n_steps", cfg.neb.n_steps);
    if (j.contains("step_size")) {
      const auto& s = j.at("step_size");
      cfg.neb.step_size = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
    }
    read_key(j, "step_scale", cfg.neb.step_scale);
    read_key(j, "beta1", cfg.neb.beta1);
    read_key(j, "beta2", cfg.neb.beta2);
    read_key(j, "epsilon", cfg.neb.epsilon);
    read_key(j, "keep_best", cfg.neb.keep_best);
    read_key(j, "knn", cfg.knn);
    read_key(j, "jobs", cfg.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid pipeline configuration: ") + e.what());
  }
}

std::string fingerprint(const PipelineConfig& cfg) {
  nlohmann::json j = to_json(cfg);
  j.erase("jobs");  // never changes results
  return sha256_hex(j.dump()).substr(0, 16);
}

FitResult fit_stage(const PointSet& ps, const PipelineConfig& cfg, StageTimings* timings) {
  staged("config", [&] { cfg.validate(); });
  FitResult out;
  Stopwatch fit_watch;
  out.model = staged("fit", [&] { return fit(ps, cfg.fit); });
  record(timings, "fit", fit_watch);
  Stopwatch filter_watch;
  out.filtered = staged("filter", [&] {
    return cfg.filter_enabled ? filter_components(out.model, ps, cfg.filter) : unfiltered(out.model, ps);
  });
  record(timings, "filter", filter_watch);
  return out;
}

void hierarchy_stage(PipelineResult& result, const PipelineConfig& cfg, NebCache* cache) {
  Stopwatch graph_watch;
  result.graph = staged("graph", [&] {
    GraphOptions options;
    options.k = cfg.knn;
    options.jobs = cfg.jobs;
    options.cache = cache;
    return build_graph(result.filtered, cfg.neb, options);
  });
  result.timings.push_back({"graph", graph_watch.seconds()});
  Stopwatch tree_watch;
  result.dendrogram = staged("hierarchy", [&] { return build_dendrogram(result.graph, result.filtered.survivors); });
  result.curve = threshold_curve(result.dendrogram);
  result.timings.push_back({"hierarchy", tree_watch.seconds()});
}

PipelineResult run_pipeline(const PointSet& ps, const PipelineConfig& cfg, NebCache* cache) {
  PipelineResult result;
  FitResult fitted = fit_stage(ps, cfg, &result.timings);
  result.model = std::move(fitted.model);
  result.filtered = std::move(fitted.filtered);
  hierarchy_stage(result, cfg, cache);
  return result;
}

Clustering cut(const PipelineResult& result, std::size_t k) {
  return staged("cut", [&] { return cut(result.dendrogram, k, result.filtered.assignments); });
}

StabilityReport seed_stability(const PointSet& ps, const PipelineConfig& cfg, std::span<const std::uint64_t> seeds,
                               std::size_t k, std::size_t jobs) {
  PipelineConfig inner = cfg;
  inner.jobs = jobs > 1 ? 1 : cfg.jobs;
  const StabilityRunner run = [&](std::uint64_t seed) {
    PipelineConfig c = inner;
    c.fit.seed = seed;
    return cut(run_pipeline(ps, c), k).point_labels;
  };
  return seed_stability(run, seeds, jobs, fingerprint(cfg));
}

StabilityReport overcluster_stability(const PointSet& ps, const PipelineConfig& cfg,
                                      std::span<const std::size_t> component_counts, std::size_t k, std::size_t jobs) {
  PipelineConfig inner = cfg;
  inner.jobs = jobs > 1 ? 1 : cfg.jobs;
  const StabilityRunner run = [&](std::uint64_t n_components) {
    PipelineConfig c = inner;
    c.fit.n_components = static_cast<std::size_t>(n_components);
    return cut(run_pipeline(ps, c), k).point_labels;
  };
  return overcluster_stability(run, component_counts, jobs, fingerprint(cfg));
}

std::vector<MergeStrategy> default_strategies() {
  using K = StrategyKind;
  using B = OverclusterBackend;
  return {{K::oracle, true, B::mixture},    {K::euclidean, true, B::mixture}, {K::euclidean, false, B::mixture},
          {K::dip, true, B::mixture},       {K::dip, false, B::mixture},      {K::neb, true, B::mixture},
          {K::euclidean, true, B::kmeans},  {K::euclidean, false, B::kmeans}};
}

Comparison compare_strategies(const PointSet& ps, const PipelineConfig& cfg, std::span<const MergeStrategy> strategies,
                              std::span<const std::uint64_t> seeds, std::optional<std::size_t> k) {
  if (!ps.has_labels()) throw ValidationError("strategy comparison needs ground-truth labels");
  const std::size_t target = checked_k(k, ps);
  for (const auto& s : strategies) s.validate();
  const Labels& truth = *ps.labels;

  Comparison out;
  out.dataset = ps.name;
  out.seeds.assign(seeds.begin(), seeds.end());
  for (const auto& s : strategies) out.scores.push_back({s, {}, {}});

  bool needs_mixture = false;
  for (const auto& s : strategies) needs_mixture = needs_mixture || s.backend == OverclusterBackend::mixture;

  for (std::uint64_t seed : seeds) {
    PipelineConfig c = cfg;
    c.fit.seed = seed;
    std::optional<PipelineResult> run;
    if (needs_mixture) {
      try {
        run.emplace();
        FitResult fitted = fit_stage(ps, c);
        run->model = std::move(fitted.model);
        run->filtered = std::move(fitted.filtered);
      } catch (const FitError& e) {
        out.warnings.push_back("seed " + std::to_string(seed) + ": " + e.what());
        run.reset();
      }
    }
    bool have_hierarchy = false;
    for (auto& scores : out.scores) {
      const MergeStrategy& s = scores.strategy;
      if (s.backend == OverclusterBackend::kmeans) {
        const Clustering cl = staged(s.label(), [&] {
          return kmeans_overcluster_merge(ps, c.fit.n_components, target, s.recompute_centers, seed);
        });
        scores.ari.push_back(ari(cl.point_labels, truth));
        continue;
      }
      if (!run) continue;
      const FilteredModel& fm = run->filtered;
      if (target > fm.n_components()) {
        out.warnings.push_back("seed " + std::to_string(seed) + ": only " + std::to_string(fm.n_components()) +
                               " components survived, fewer than k");
        continue;
      }
      Clustering cl;
      switch (s.kind) {
        case StrategyKind::oracle:
          cl = oracle_merge(fm.assignments, truth, fm.n_components(), target);
          break;
        case StrategyKind::euclidean:
          cl = euclidean_merge(fm, target, s.recompute_centers);
          break;
        case StrategyKind::dip:
          cl = dip_merge(fm, ps, target, s.recompute_centers, c.jobs);
          break;
        case StrategyKind::neb:
          if (!have_hierarchy) {
            hierarchy_stage(*run, c);
            have_hierarchy = true;
          }
          cl = cut(*run, target);
          break;
      }
      scores.ari.push_back(ari(cl.point_labels, truth));
    }
  }
  for (auto& scores : out.scores) scores.summary = mean_std(scores.ari);
  return out;
}

std::string comparison_table_csv(std::span<const Comparison> rows) {
  std::vector<std::string> columns;
  for (const auto& row : rows)
    for (const auto& s : row.scores) {
      const std::string label = s.strategy.label();
      if (std::find(columns.begin(), columns.end(), label) == columns.end()) columns.push_back(label);
    }
  std::string out = "dataset";
  for (const auto& c : columns) out += "," + c;
  out += "\n";
  for (const auto& row : rows) {
    out += row.dataset;
    for (const auto& c : columns) {
      out += ",";
      for (const auto& s : row.scores)
        if (s.strategy.label() == c && !s.ari.empty()) {
          char cell[64];
          std::snprintf(cell, sizeof cell, "%.2f ± %.2f", s.summary.mean, s.summary.std);
          out += cell;
        }
    }
    out += "\n";
  }
  return out;
}

std::string comparison_long_csv(std::span<const Comparison> rows) {
  std::string out = "dataset,strategy,mean,std,n_seeds,values\n";
  for (const auto& row : rows)
    for (const auto& s : row.scores) {
      std::string values;
      for (double v : s.ari) values += (values.empty() ? "" : " ") + format_double(v);
      out += row.dataset + "," + s.strategy.label() + "," + format_double(s.summary.mean) + "," +
             format_double(s.summary.std) + "," + std::to_string(s.ari.size()) + "," + values + "\n";
    }
  return out;
}

}  // namespace tneb
