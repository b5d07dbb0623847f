// Command line front end: generate, fit, cluster, compare, stability, eval.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tneb/config.hpp"
#include "tneb/hash.hpp"
#include "tneb/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Config keys that can be overridden from the command line with --<key>.
const std::vector<std::string> kOverrideKeys{
    "input",      "label_column", "k_target",   "strategy",      "recompute_centers", "backend",
    "seeds",      "stability",    "component_counts", "output",  "n_components",      "family",
    "df",         "max_em_steps", "tolerance",  "ridge",         "seed",              "kmeans_iterations",
    "filter",     "min_points",   "elongation_factor", "n_path_points", "n_steps",    "step_size",
    "step_scale", "beta1",        "beta2",      "epsilon",       "keep_best",         "knn",
    "jobs"};

const std::vector<std::string> kListKeys{"seeds", "component_counts"};

struct Options {
  std::string config_path;
  std::string dataset;  // kind name or inline JSON
  std::map<std::string, std::string> overrides;
};

// Numbers, booleans, null and JSON arrays pass through; anything else is a string.
json flag_value(const std::string& key, const std::string& raw) {
  const bool list = std::find(kListKeys.begin(), kListKeys.end(), key) != kListKeys.end();
  const std::string text = list && !raw.empty() && raw.front() != '[' ? "[" + raw + "]" : raw;
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded() || parsed.is_object()) return raw;
  return parsed;
}

tneb::RunConfig resolve_config(const Options& opts) {
  json j = opts.config_path.empty() ? json::object() : tneb::read_json_file(opts.config_path);
  if (!opts.dataset.empty()) {
    json spec = json::parse(opts.dataset, nullptr, false);
    if (spec.is_discarded() || !spec.is_object()) spec = json{{"kind", opts.dataset}};
    j["dataset"] = spec;
    j.erase("input");
  }
  for (const auto& [key, raw] : opts.overrides) {
    j[key] = flag_value(key, raw);
    if (key == "input") j.erase("dataset");
  }
  return tneb::run_config_from_json(j);
}

tneb::PointSet load_points(tneb::RunConfig& cfg) {
  tneb::PointSet ps = cfg.dataset ? tneb::generate(*cfg.dataset) : tneb::load_csv(*cfg.input, cfg.label_column);
  cfg.resolve_for(ps);
  return ps;
}

class Run {
 public:
  Run(std::string command, const tneb::RunConfig& cfg) : command_(std::move(command)), dir_(cfg.output) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw tneb::IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    manifest_["tool"] = "tneb";
    manifest_["version"] = TNEB_VERSION;
    manifest_["command"] = command_;
  }

  void write(const std::string& name, const std::string& content) {
    tneb::write_text(content, (dir_ / name).string());
    outputs_.push_back({{"file", name}, {"sha256", tneb::sha256_hex(content)}, {"bytes", content.size()}});
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void time(const std::string& stage, double seconds) { timings_[stage] = seconds; }
  void times(const tneb::StageTimings& t) {
    for (const auto& [stage, seconds] : t) timings_[stage] = seconds;
  }
  void warn(const std::vector<std::string>& w) { warnings_.insert(warnings_.end(), w.begin(), w.end()); }
  json& manifest() { return manifest_; }

  void finish(const tneb::RunConfig& cfg) {
    manifest_["resolved_config"] = tneb::to_json(cfg);
    manifest_["timings_seconds"] = timings_;
    manifest_["warnings"] = warnings_;
    manifest_["outputs"] = outputs_;
    tneb::write_text(manifest_.dump(2) + "\n", (dir_ / "manifest.json").string());
  }

 private:
  std::string command_;
  fs::path dir_;
  json manifest_;
  json outputs_ = json::array();
  std::map<std::string, double> timings_;
  std::vector<std::string> warnings_;
};

json filter_report(const tneb::FilteredModel& fm) {
  json j = tneb::to_json(fm);
  return {{"survivors", fm.survivors}, {"removed", j.at("removed")}, {"retained_mass", fm.retained_mass}};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t target_k(const tneb::RunConfig& cfg, const tneb::PointSet& ps) {
  if (cfg.k_target) return *cfg.k_target;
  if (!ps.has_labels()) throw tneb::ValidationError("k_target is required for unlabeled data");
  return ps.n_label_values();
}

int cmd_generate(tneb::RunConfig cfg) {
  if (!cfg.dataset) throw tneb::ValidationError("generate needs a dataset specification");
  Run run("generate", cfg);
  const auto start = std::chrono::steady_clock::now();
  const tneb::PointSet ps = load_points(cfg);
  run.time("generate", seconds_since(start));
  run.write("data.csv", tneb::to_csv(ps));
  if (!ps.label_groups.empty()) run.write("group_labels.csv", tneb::labels_to_csv(ps.group_labels()));
  run.finish(cfg);
  std::cout << "wrote " << ps.size() << " points in " << ps.dim() << "D to " << cfg.output << "\n";
  return 0;
}

int cmd_fit(tneb::RunConfig cfg) {
  Run run("fit", cfg);
  const tneb::PointSet ps = load_points(cfg);
  tneb::StageTimings timings;
  const tneb::FitResult fitted = tneb::fit_stage(ps, cfg.pipeline, &timings);
  run.times(timings);
  run.write_json("model.json", {{"model", tneb::to_json(fitted.model)}, {"filtered", tneb::to_json(fitted.filtered)}});
  run.manifest()["model_hash"] = tneb::model_hash(fitted.model);
  run.manifest()["filter_report"] = filter_report(fitted.filtered);
  run.finish(cfg);
  std::cout << fitted.filtered.n_components() << " of " << fitted.model.n_components()
            << " components survived filtering\n";
  return 0;
}

int cmd_cluster(tneb::RunConfig cfg) {
  Run run("cluster", cfg);
  const tneb::PointSet ps = load_points(cfg);
  const tneb::PipelineResult result = tneb::run_pipeline(ps, cfg.pipeline);
  run.times(result.timings);
  run.warn(result.graph.warnings);
  run.write_json("model.json", {{"model", tneb::to_json(result.model)}, {"filtered", tneb::to_json(result.filtered)}});
  run.write_json("graph.json", tneb::to_json(result.graph));
  run.write("graph.dot", tneb::to_dot(result.graph));
  run.write_json("dendrogram.json", tneb::to_json(result.dendrogram));
  run.write("dendrogram.newick", tneb::to_newick(result.dendrogram));
  run.write("thresholds.csv", tneb::threshold_csv(result.curve));
  run.manifest()["model_hash"] = tneb::model_hash(result.model);
  run.manifest()["filter_report"] = filter_report(result.filtered);
  run.manifest()["neb_invocations"] = result.graph.neb_invocations;

  if (cfg.k_target) {
    const tneb::Clustering c = tneb::cut(result, *cfg.k_target);
    run.write("labels.csv", tneb::labels_to_csv(c.point_labels));
    run.write_json("clustering.json", tneb::to_json(c));
    if (ps.has_labels()) {
      const double score = tneb::ari(c.point_labels, *ps.labels);
      run.manifest()["ari"] = score;
      std::cout << "ARI vs. labels: " << tneb::format_double(score) << "\n";
    }
  } else {
    std::cout << "largest threshold jumps at k =";
    const auto ranked = result.curve.ranked_jumps();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i) std::cout << " " << ranked[i];
    std::cout << "\n";
  }
  run.finish(cfg);
  return 0;
}

int cmd_compare(tneb::RunConfig cfg) {
  Run run("compare", cfg);
  const tneb::PointSet ps = load_points(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto strategies = tneb::default_strategies();
  const tneb::Comparison cmp = tneb::compare_strategies(ps, cfg.pipeline, strategies, cfg.seeds, cfg.k_target);
  run.time("compare", seconds_since(start));
  run.warn(cmp.warnings);
  const std::vector<tneb::Comparison> rows{cmp};
  run.write("compare.csv", tneb::comparison_table_csv(rows));
  run.write("compare_long.csv", tneb::comparison_long_csv(rows));
  run.finish(cfg);
  std::cout << tneb::comparison_table_csv(rows);
  return 0;
}

int cmd_stability(tneb::RunConfig cfg) {
  Run run("stability", cfg);
  const tneb::PointSet ps = load_points(cfg);
  const std::size_t k = target_k(cfg, ps);
  const auto start = std::chrono::steady_clock::now();
  tneb::StabilityReport report;
  if (cfg.stability == tneb::StabilityMode::seeds) {
    report = tneb::seed_stability(ps, cfg.pipeline, cfg.seeds, k, cfg.pipeline.jobs);
  } else {
    if (cfg.component_counts.empty()) cfg.component_counts = tneb::overcluster_sweep(k);
    report = tneb::overcluster_stability(ps, cfg.pipeline, cfg.component_counts, k, cfg.pipeline.jobs);
  }
  run.time("stability", seconds_since(start));
  run.warn(report.warnings);
  run.write_json("stability.json", tneb::to_json(report));
  run.write("stability_matrix.csv", tneb::matrix_csv(report));
  run.write("stability_summary.csv", tneb::summary_csv(ps.name, ps.dim(), report));
  run.finish(cfg);
  std::cout << "pairwise ARI mean " << tneb::format_double(report.mean) << ", min " << tneb::format_double(report.min)
            << ", std " << tneb::format_double(report.std) << "\n";
  return 0;
}

int cmd_eval(const std::string& a, const std::string& b, const std::string& column_a, const std::string& column_b) {
  auto column = [](const std::string& c) { return c.empty() ? std::nullopt : std::optional<std::string>(c); };
  const tneb::Labels la = tneb::load_labels_csv(a, column(column_a));
  const tneb::Labels lb = tneb::load_labels_csv(b, column(column_b));
  std::cout << tneb::format_double(tneb::ari(la, lb)) << "\n";
  return 0;
}

void add_run_options(CLI::App* sub, Options& opts) {
  sub->add_option("-c,--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--dataset", opts.dataset, "dataset kind or inline JSON specification");
  for (const auto& key : kOverrideKeys)
    sub->add_option_function<std::string>("--" + key, [&opts, key](const std::string& v) { opts.overrides[key] = v; },
                                          "override config key '" + key + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical clustering along maximum-density paths between mixture components"};
  app.set_version_flag("--version", std::string(TNEB_VERSION));
  app.require_subcommand(1);

  Options opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"generate", "write a synthetic dataset"},
           {"fit", "fit and filter the mixture model"},
           {"cluster", "full run: graph, dendrogram, thresholds and optional flat cut"},
           {"compare", "score all merging strategies over seeds"},
           {"stability", "pairwise ARI across seeds or component counts"}}) {
    subs[name] = app.add_subcommand(name, help);
    add_run_options(subs[name], opts);
  }
  std::string eval_a, eval_b, column_a, column_b;
  CLI::App* eval = app.add_subcommand("eval", "ARI between two label CSV files");
  eval->add_option("a", eval_a, "first labels CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("b", eval_b, "second labels CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--column_a", column_a, "label column in the first file");
  eval->add_option("--column_b", column_b, "label column in the second file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (eval->parsed()) return cmd_eval(eval_a, eval_b, column_a, column_b);
    tneb::RunConfig cfg = resolve_config(opts);
    if (subs["generate"]->parsed()) return cmd_generate(cfg);
    if (subs["fit"]->parsed()) return cmd_fit(cfg);
    if (subs["cluster"]->parsed()) return cmd_cluster(cfg);
    if (subs["compare"]->parsed()) return cmd_compare(cfg);
    if (subs["stability"]->parsed()) return cmd_stability(cfg);
  } catch (const tneb::FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << d << "\n";
    return 3;
  } catch (const tneb::FilterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const tneb::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const tneb::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const tneb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
