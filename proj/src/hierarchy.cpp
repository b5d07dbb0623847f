#include "tneb/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include "tneb/dataset.hpp"

namespace tneb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Forest {
  std::vector<std::size_t> parent;
  std::vector<std::size_t> node;  // current dendrogram id per root
  std::vector<std::size_t> size;

  explicit Forest(std::size_t n) : parent(n), node(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), 0);
    std::iota(node.begin(), node.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

// Joins the clusters holding leaves a and b; returns false if already joined.
bool join(Forest& f, Dendrogram& d, std::size_t a, std::size_t b, double bottleneck, bool cross) {
  const std::size_t ra = f.find(a);
  const std::size_t rb = f.find(b);
  if (ra == rb) return false;
  Merge m;
  m.left = std::min(f.node[ra], f.node[rb]);
  m.right = std::max(f.node[ra], f.node[rb]);
  m.node = d.n_leaves() + d.merges.size();
  m.bottleneck_log_density = bottleneck;
  m.height = -bottleneck;
  m.cross_component = cross;
  m.size = f.size[ra] + f.size[rb];
  const std::size_t root = std::min(ra, rb);
  f.parent[std::max(ra, rb)] = root;
  f.node[root] = m.node;
  f.size[root] = m.size;
  d.merges.push_back(m);
  return true;
}

double json_number(const nlohmann::json& j, double missing) { return j.is_null() ? missing : j.get<double>(); }

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

Dendrogram build_dendrogram(const ClusterGraph& g, std::vector<std::size_t> leaves) {
  const std::size_t n = g.n_nodes;
  Dendrogram d;
  if (leaves.empty()) {
    leaves.resize(n);
    std::iota(leaves.begin(), leaves.end(), 0);
  }
  if (leaves.size() != n) throw ValidationError("leaf list does not match the graph size");
  d.leaves = std::move(leaves);
  if (n < 2) return d;

  std::vector<const NebEdge*> tree;
  for (std::size_t idx : g.tree_edges) tree.push_back(&g.neb_edges.at(idx));
  std::sort(tree.begin(), tree.end(), [](const NebEdge* x, const NebEdge* y) {
    if (x->bottleneck_log_density != y->bottleneck_log_density)
      return x->bottleneck_log_density > y->bottleneck_log_density;
    return std::tie(x->a, x->b) < std::tie(y->a, y->b);
  });

  Forest forest(n);
  for (const NebEdge* e : tree) join(forest, d, e->a, e->b, e->bottleneck_log_density, false);
  if (d.merges.size() == n - 1) return d;

  // Remaining forest components: single linkage on center distance.
  struct Pair {
    double distance;
    std::size_t a, b;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (forest.find(a) != forest.find(b))
        pairs.push_back({(g.centers.row(static_cast<Eigen::Index>(a)) - g.centers.row(static_cast<Eigen::Index>(b))).norm(), a, b});
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& x, const Pair& y) { return std::tie(x.distance, x.a, x.b) < std::tie(y.distance, y.a, y.b); });
  for (const Pair& p : pairs) {
    join(forest, d, p.a, p.b, -kInf, true);
    if (d.merges.size() == n - 1) break;
  }
  return d;
}

Labels cut_components(const Dendrogram& d, std::size_t k) {
  const std::size_t n = d.n_leaves();
  if (k < 1 || k > n) throw ValidationError("cut size " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (d.merges.size() + 1 != n) throw ValidationError("dendrogram is incomplete");

  std::vector<std::size_t> representative(2 * n - 1);
  std::iota(representative.begin(), representative.begin() + static_cast<std::ptrdiff_t>(n), 0);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n - k; ++i) {
    const Merge& m = d.merges[i];
    const std::size_t ra = find(representative.at(m.left));
    const std::size_t rb = find(representative.at(m.right));
    parent[std::max(ra, rb)] = std::min(ra, rb);
    representative.at(m.node) = std::min(ra, rb);
  }
  Labels labels(n, -1);
  std::vector<int> id_of_root(n, -1);
  int next = 0;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    const std::size_t root = find(leaf);
    if (id_of_root[root] < 0) id_of_root[root] = next++;
    labels[leaf] = id_of_root[root];
  }
  return labels;
}

Clustering make_clustering(const Labels& component_to_cluster, const Labels& assignments, std::size_t k) {
  struct Info {
    std::size_t count = 0;
    std::size_t first_point = std::numeric_limits<std::size_t>::max();
    std::size_t first_component = std::numeric_limits<std::size_t>::max();
  };
  std::vector<Info> info(k);
  for (std::size_t c = 0; c < component_to_cluster.size(); ++c) {
    const int cluster = component_to_cluster[c];
    if (cluster < 0 || static_cast<std::size_t>(cluster) >= k) throw ValidationError("cluster id out of range");
    info[static_cast<std::size_t>(cluster)].first_component =
        std::min(info[static_cast<std::size_t>(cluster)].first_component, c);
  }
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int comp = assignments[i];
    if (comp < 0 || static_cast<std::size_t>(comp) >= component_to_cluster.size())
      throw ValidationError("point assigned to an unknown component");
    Info& cell = info[static_cast<std::size_t>(component_to_cluster[static_cast<std::size_t>(comp)])];
    if (cell.count++ == 0) cell.first_point = i;
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const Info& a = info[x];
    const Info& b = info[y];
    if (a.count != b.count) return a.count > b.count;
    if (a.first_point != b.first_point) return a.first_point < b.first_point;
    return a.first_component < b.first_component;
  });
  std::vector<int> rename(k);
  for (std::size_t r = 0; r < k; ++r) rename[order[r]] = static_cast<int>(r);

  Clustering out;
  out.k = k;
  out.component_to_cluster.reserve(component_to_cluster.size());
  for (int c : component_to_cluster) out.component_to_cluster.push_back(rename[static_cast<std::size_t>(c)]);
  out.point_labels.reserve(assignments.size());
  for (int comp : assignments) out.point_labels.push_back(out.component_to_cluster[static_cast<std::size_t>(comp)]);
  return out;
}

Clustering cut(const Dendrogram& d, std::size_t k, const Labels& assignments) {
  return make_clustering(cut_components(d, k), assignments, k);
}

std::vector<std::size_t> ThresholdCurve::ranked_jumps() const {
  std::vector<const ThresholdEntry*> valid;
  for (const auto& e : entries)
    if (!std::isnan(e.log_jump)) valid.push_back(&e);
  std::stable_sort(valid.begin(), valid.end(),
                   [](const ThresholdEntry* x, const ThresholdEntry* y) { return x->log_jump > y->log_jump; });
  std::vector<std::size_t> ks;
  for (const auto* e : valid) ks.push_back(e->k);
  return ks;
}

ThresholdCurve threshold_curve(const Dendrogram& d) {
  ThresholdCurve curve;
  const std::size_t n = d.n_leaves();
  if (n < 2) return curve;
  for (std::size_t k = 1; k < n; ++k) {
    const double ld = d.merges.at(n - k - 1).bottleneck_log_density;
    ThresholdEntry e{k, ld, std::exp(ld), std::exp(-ld), std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN()};
    if (k > 1) {
      const double prev = curve.entries.back().log_density;
      e.log_jump = (std::isinf(prev) && std::isinf(ld)) ? 0.0 : ld - prev;
      e.jump = std::exp(e.log_jump);
    }
    curve.entries.push_back(e);
  }
  return curve;
}

nlohmann::json to_json(const Dendrogram& d) {
  nlohmann::json merges = nlohmann::json::array();
  for (const Merge& m : d.merges)
    merges.push_back({{"left", m.left},
                      {"right", m.right},
                      {"node", m.node},
                      {"bottleneck_log_density", finite_or_null(m.bottleneck_log_density)},
                      {"height", finite_or_null(m.height)},
                      {"cross_component", m.cross_component},
                      {"size", m.size}});
  return {{"leaves", d.leaves}, {"merges", merges}};
}

Dendrogram dendrogram_from_json(const nlohmann::json& j) {
  try {
    Dendrogram d;
    d.leaves = j.at("leaves").get<std::vector<std::size_t>>();
    for (const auto& m : j.at("merges")) {
      Merge merge;
      merge.left = m.at("left").get<std::size_t>();
      merge.right = m.at("right").get<std::size_t>();
      merge.node = m.at("node").get<std::size_t>();
      merge.bottleneck_log_density = json_number(m.at("bottleneck_log_density"), -kInf);
      merge.height = json_number(m.at("height"), kInf);
      merge.cross_component = m.at("cross_component").get<bool>();
      merge.size = m.at("size").get<std::size_t>();
      d.merges.push_back(merge);
    }
    if (!d.leaves.empty() && d.merges.size() + 1 != d.leaves.size())
      throw ValidationError("dendrogram needs exactly one merge fewer than leaves");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed dendrogram JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Clustering& c) {
  return {{"k", c.k}, {"component_to_cluster", c.component_to_cluster}};
}

std::string to_newick(const Dendrogram& d) {
  const std::size_t n = d.n_leaves();
  if (n == 0) return ";\n";
  if (n == 1) return "c" + std::to_string(d.leaves[0]) + ";\n";

  double lowest = kInf;
  double highest = -kInf;
  for (const Merge& m : d.merges)
    if (std::isfinite(m.height)) {
      lowest = std::min(lowest, m.height);
      highest = std::max(highest, m.height);
    }
  if (!std::isfinite(lowest)) lowest = highest = 0.0;

  std::vector<double> height(2 * n - 1, lowest);
  for (const Merge& m : d.merges) height[m.node] = std::isfinite(m.height) ? m.height : highest + 1.0;

  auto subtree = [&](auto&& self, std::size_t node) -> std::string {
    if (node < n) return "c" + std::to_string(d.leaves[node]);
    const Merge& m = d.merges[node - n];
    return "(" + self(self, m.left) + ":" + format_double(height[node] - height[m.left]) + "," + self(self, m.right) +
           ":" + format_double(height[node] - height[m.right]) + ")";
  };
  return subtree(subtree, d.merges.back().node) + ";\n";
}

std::string threshold_csv(const ThresholdCurve& curve) {
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  std::string out = "k,threshold,log_density,density,log_jump,jump\n";
  for (const auto& e : curve.entries)
    out += std::to_string(e.k) + "," + cell(e.threshold) + "," + cell(e.log_density) + "," + cell(e.density) + "," +
           cell(e.log_jump) + "," + cell(e.jump) + "\n";
  return out;
}

}  // namespace tneb
