#include "tneb/clustergraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tneb/dataset.hpp"
#include "tneb/hash.hpp"

namespace tneb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    parent[std::max(x, y)] = std::min(x, y);
    return true;
  }
};

std::pair<std::size_t, std::size_t> ordered(std::size_t a, std::size_t b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

std::vector<KnnEdge> knn_graph(const Matrix& centers, std::size_t k) {
  const auto n = static_cast<std::size_t>(centers.rows());
  if (n < 2) return {};
  k = std::min(k, n - 1);
  if (k == 0) throw ValidationError("kNN graph needs k >= 1");

  std::vector<KnnEdge> edges;
  std::vector<std::pair<double, std::size_t>> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dist =
          (centers.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(j))).norm();
      row[r++] = {dist, j};
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
    for (std::size_t r2 = 0; r2 < k; ++r2) {
      const auto [a, b] = ordered(i, row[r2].second);
      edges.push_back({a, b, row[r2].first});
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const KnnEdge& x, const KnnEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const KnnEdge& x, const KnnEdge& y) { return x.a == y.a && x.b == y.b; }),
              edges.end());
  return edges;
}

std::vector<std::size_t> widest_path_tree(std::size_t n_nodes, std::span<const WeightedEdge> edges) {
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& ex = edges[x];
    const auto& ey = edges[y];
    if (ex.weight != ey.weight) return ex.weight > ey.weight;
    return ordered(ex.a, ex.b) < ordered(ey.a, ey.b);
  });
  DisjointSets sets(n_nodes);
  std::vector<std::size_t> tree;
  for (std::size_t idx : order) {
    const auto& e = edges[idx];
    if (e.a >= n_nodes || e.b >= n_nodes) throw ValidationError("edge endpoint out of range");
    if (sets.unite(e.a, e.b)) tree.push_back(idx);
  }
  return tree;
}

Matrix tree_bottleneck_matrix(std::size_t n_nodes, std::span<const WeightedEdge> edges,
                              std::span<const std::size_t> tree) {
  const auto n = static_cast<Eigen::Index>(n_nodes);
  Matrix out = Matrix::Constant(n, n, -kInf);
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacent(n_nodes);
  for (std::size_t idx : tree) {
    const auto& e = edges[idx];
    adjacent[e.a].push_back({e.b, e.weight});
    adjacent[e.b].push_back({e.a, e.weight});
  }
  // One traversal per source carrying the running minimum along the path.
  std::vector<std::pair<std::size_t, double>> stack;
  std::vector<char> seen(n_nodes);
  for (std::size_t s = 0; s < n_nodes; ++s) {
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, {s, kInf});
    seen[s] = 1;
    while (!stack.empty()) {
      const auto [node, bottleneck] = stack.back();
      stack.pop_back();
      out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(node)) = bottleneck;
      for (const auto& [next, w] : adjacent[node]) {
        if (seen[next]) continue;
        seen[next] = 1;
        stack.push_back({next, std::min(bottleneck, w)});
      }
    }
  }
  return out;
}

std::optional<DensityPath> NebCache::find(const std::string& model_hash, std::size_t a, std::size_t b,
                                          const std::string& cfg) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(Key{model_hash, a, b, cfg});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void NebCache::store(const std::string& model_hash, const std::string& cfg, const DensityPath& path) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(Key{model_hash, path.a, path.b, cfg}, path);
}

std::size_t NebCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

void finish_graph(ClusterGraph& g) {
  std::vector<WeightedEdge> weighted;
  weighted.reserve(g.neb_edges.size());
  for (const auto& e : g.neb_edges) weighted.push_back({e.a, e.b, e.bottleneck_log_density});
  g.tree_edges = widest_path_tree(g.n_nodes, weighted);
  std::sort(g.tree_edges.begin(), g.tree_edges.end());
  for (std::size_t idx : g.tree_edges) g.neb_edges[idx].in_tree = true;
  g.pairwise_bottleneck = tree_bottleneck_matrix(g.n_nodes, weighted, g.tree_edges);
}

}  // namespace

ClusterGraph build_graph(const FilteredModel& m, const NebConfig& neb_cfg, const GraphOptions& options) {
  neb_cfg.validate();
  ClusterGraph g;
  g.n_nodes = m.n_components();
  g.centers = m.model.means;
  g.knn_edges = knn_graph(g.centers, options.k);

  const MixtureDensity density(m.model);
  const std::string hash = options.cache ? model_hash(m.model) : std::string();
  const std::string fingerprint = neb_cfg.fingerprint();

  const std::size_t n_edges = g.knn_edges.size();
  std::vector<std::optional<DensityPath>> results(n_edges);
  std::vector<std::string> failures(n_edges);
  std::vector<char> computed(n_edges, 0);
  parallel_for(n_edges, options.jobs, [&](std::size_t i) {
    const auto& e = g.knn_edges[i];
    if (options.cache) {
      if (auto hit = options.cache->find(hash, e.a, e.b, fingerprint)) {
        results[i] = std::move(hit);
        return;
      }
    }
    computed[i] = 1;
    try {
      results[i] = optimize_component_path(density, g.centers, e.a, e.b, neb_cfg);
    } catch (const NumericalError& err) {
      failures[i] = err.what();
      return;
    }
    if (options.cache) options.cache->store(hash, fingerprint, *results[i]);
  });

  for (std::size_t i = 0; i < n_edges; ++i) {
    g.neb_invocations += static_cast<std::size_t>(computed[i]);
    const auto& e = g.knn_edges[i];
    if (!results[i]) {
      g.warnings.push_back("dropped edge " + std::to_string(e.a) + "-" + std::to_string(e.b) + ": " + failures[i]);
      continue;
    }
    g.neb_edges.push_back({e.a, e.b, results[i]->bottleneck_log_density, false});
    if (options.keep_paths) g.paths.push_back(std::move(*results[i]));
  }
  finish_graph(g);
  return g;
}

ClusterGraph graph_from_edges(const Matrix& centers, std::span<const WeightedEdge> edges) {
  ClusterGraph g;
  g.n_nodes = static_cast<std::size_t>(centers.rows());
  g.centers = centers;
  for (const auto& e : edges) {
    if (e.a == e.b) throw ValidationError("self-loop edge");
    if (e.a >= g.n_nodes || e.b >= g.n_nodes) throw ValidationError("edge endpoint out of range");
    const auto [a, b] = ordered(e.a, e.b);
    const double dist =
        (centers.row(static_cast<Eigen::Index>(a)) - centers.row(static_cast<Eigen::Index>(b))).norm();
    g.knn_edges.push_back({a, b, dist});
    g.neb_edges.push_back({a, b, e.weight, false});
  }
  finish_graph(g);
  return g;
}

nlohmann::json to_json(const ClusterGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (Eigen::Index i = 0; i < g.centers.rows(); ++i) {
    std::vector<double> center;
    for (Eigen::Index j = 0; j < g.centers.cols(); ++j) center.push_back(g.centers(i, j));
    nodes.push_back({{"id", i}, {"center", center}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.neb_edges) {
    const double dist = (g.centers.row(static_cast<Eigen::Index>(e.a)) - g.centers.row(static_cast<Eigen::Index>(e.b))).norm();
    edges.push_back({{"a", e.a},
                     {"b", e.b},
                     {"distance", dist},
                     {"bottleneck_log_density", e.bottleneck_log_density},
                     {"in_tree", e.in_tree}});
  }
  return {{"n_nodes", g.n_nodes},
          {"nodes", nodes},
          {"edges", edges},
          {"neb_invocations", g.neb_invocations},
          {"warnings", g.warnings}};
}

std::string to_dot(const ClusterGraph& g) {
  std::ostringstream out;
  out << "graph clusters {\n";
  for (std::size_t i = 0; i < g.n_nodes; ++i) out << "  " << i << ";\n";
  for (const auto& e : g.neb_edges) {
    out << "  " << e.a << " -- " << e.b << " [label=\"" << format_double(e.bottleneck_log_density) << "\"";
    if (e.in_tree) out << ", style=bold";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace tneb
