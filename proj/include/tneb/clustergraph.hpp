#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "tneb/neb.hpp"

namespace tneb {

struct KnnEdge {
  std::size_t a;  // a < b
  std::size_t b;
  double distance;
};

struct WeightedEdge {
  std::size_t a;
  std::size_t b;
  double weight;  // similarity: larger is closer
};

struct NebEdge {
  std::size_t a;  // a < b
  std::size_t b;
  double bottleneck_log_density;
  bool in_tree = false;
};

// Surviving components as nodes, NEB bottlenecks on the kNN edges, and the
// all-pairs bottleneck implied by the maximum spanning forest.
struct ClusterGraph {
  std::size_t n_nodes = 0;
  Matrix centers;  // n_nodes x d
  std::vector<KnnEdge> knn_edges;
  std::vector<NebEdge> neb_edges;         // one per kNN edge that produced a path
  std::vector<std::size_t> tree_edges;    // indices into neb_edges
  Matrix pairwise_bottleneck;             // +inf diagonal, -inf across forest components
  std::vector<DensityPath> paths;         // parallel to neb_edges when kept
  std::vector<std::string> warnings;
  std::size_t neb_invocations = 0;
};

// Undirected union of each node's k nearest centers (k capped at n-1).
// Ties in distance are broken by node index. Sorted by (a, b).
std::vector<KnnEdge> knn_graph(const Matrix& centers, std::size_t k);

// Maximum spanning forest by similarity (Kruskal, descending weight, ties by
// the lexicographically smaller node pair). Returns indices into edges.
std::vector<std::size_t> widest_path_tree(std::size_t n_nodes, std::span<const WeightedEdge> edges);

// Minimum edge weight along the tree path between every pair of nodes:
// +inf on the diagonal, -inf between different trees.
Matrix tree_bottleneck_matrix(std::size_t n_nodes, std::span<const WeightedEdge> edges,
                              std::span<const std::size_t> tree);

// Cache of NEB results keyed by (model hash, a, b, NEB config).
class NebCache {
 public:
  std::optional<DensityPath> find(const std::string& model_hash, std::size_t a, std::size_t b,
                                  const std::string& cfg) const;
  void store(const std::string& model_hash, const std::string& cfg, const DensityPath& path);
  std::size_t size() const;

 private:
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::string>;
  mutable std::mutex mutex_;
  std::map<Key, DensityPath> entries_;
};

struct GraphOptions {
  std::size_t k = 10;
  std::size_t jobs = 1;
  bool keep_paths = false;
  NebCache* cache = nullptr;
};

ClusterGraph build_graph(const FilteredModel& m, const NebConfig& neb_cfg, const GraphOptions& options = {});

// Assembles a graph from precomputed edge similarities (log-density bottlenecks).
ClusterGraph graph_from_edges(const Matrix& centers, std::span<const WeightedEdge> edges);

nlohmann::json to_json(const ClusterGraph& g);
std::string to_dot(const ClusterGraph& g);

}  // namespace tneb
