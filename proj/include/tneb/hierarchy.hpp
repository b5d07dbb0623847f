#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "tneb/clustergraph.hpp"

namespace tneb {

struct Merge {
  std::size_t left;   // smaller of the two child ids
  std::size_t right;
  std::size_t node;   // new id; leaves are 0..L-1, merges L, L+1, ...
  double bottleneck_log_density;  // -inf for merges across forest components
  double height;                  // -bottleneck_log_density
  bool cross_component = false;
  std::size_t size = 0;           // leaves below the new node
};

struct Dendrogram {
  std::vector<std::size_t> leaves;  // original mixture index of each leaf
  std::vector<Merge> merges;        // leaves.size() - 1 entries in merge order

  std::size_t n_leaves() const { return leaves.size(); }
};

// Single linkage on the bottleneck similarities: tree edges by descending
// similarity, then merges between forest components by ascending Euclidean
// distance between their closest centers.
Dendrogram build_dendrogram(const ClusterGraph& g, std::vector<std::size_t> leaves = {});

// Cluster of every leaf after applying the first L-k merges. Cluster ids are
// ordered by the smallest leaf they contain.
Labels cut_components(const Dendrogram& d, std::size_t k);

struct Clustering {
  Labels point_labels;
  Labels component_to_cluster;
  std::size_t k = 0;
};

// Maps component clusters onto points and relabels to [0, k): clusters by
// point count descending, then first point occurrence; clusters without
// points go last, ordered by their smallest component.
Clustering make_clustering(const Labels& component_to_cluster, const Labels& assignments, std::size_t k);

Clustering cut(const Dendrogram& d, std::size_t k, const Labels& assignments);

struct ThresholdEntry {
  std::size_t k;
  double log_density;  // bottleneck of the merge that leaves k clusters
  double density;
  double threshold;    // 1 / density; rises as k drops
  double log_jump;     // log(threshold[k-1] / threshold[k]); NaN for k = 1
  double jump;
};

struct ThresholdCurve {
  std::vector<ThresholdEntry> entries;  // k = 1 .. L-1

  // Cluster counts sorted by decreasing jump (ties towards smaller k).
  std::vector<std::size_t> ranked_jumps() const;
};

ThresholdCurve threshold_curve(const Dendrogram& d);

nlohmann::json to_json(const Dendrogram& d);
Dendrogram dendrogram_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Clustering& c);
std::string to_newick(const Dendrogram& d);
std::string threshold_csv(const ThresholdCurve& curve);

}  // namespace tneb
