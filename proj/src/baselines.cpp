#include "tneb/baselines.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <numeric>
#include <tuple>

#include "tneb/dip.hpp"
#include "tneb/kmeans.hpp"

namespace tneb {

namespace {

constexpr std::array<std::pair<StrategyKind, std::string_view>, 4> kStrategyNames{{
    {StrategyKind::oracle, "oracle"},
    {StrategyKind::euclidean, "euclidean"},
    {StrategyKind::dip, "dip"},
    {StrategyKind::neb, "neb"},
}};

struct Cluster {
  std::vector<std::size_t> points;
  Vector center;
  double count = 0.0;
};

using PairCost = std::function<double(const Cluster&, const Cluster&)>;

std::vector<Cluster> component_clusters(const Matrix& centers, const Labels& assignments) {
  const auto n_components = static_cast<std::size_t>(centers.rows());
  std::vector<Cluster> clusters(n_components);
  for (std::size_t c = 0; c < n_components; ++c) clusters[c].center = centers.row(static_cast<Eigen::Index>(c)).transpose();
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int comp = assignments[i];
    if (comp < 0 || static_cast<std::size_t>(comp) >= n_components)
      throw ValidationError("point assigned to an unknown component");
    clusters[static_cast<std::size_t>(comp)].points.push_back(i);
    clusters[static_cast<std::size_t>(comp)].count += 1.0;
  }
  return clusters;
}

void absorb(Cluster& into, Cluster& from) {
  const double total = into.count + from.count;
  if (total > 0.0)
    into.center = (into.count * into.center + from.count * from.center) / total;
  else
    into.center = 0.5 * (into.center + from.center);
  into.count = total;
  into.points.insert(into.points.end(), from.points.begin(), from.points.end());
  from.points.clear();
}

// Agglomerates until k clusters remain; ties go to the lexicographically
// smallest pair of cluster slots. Returns the cluster of every component,
// numbered by smallest component.
Labels agglomerate(std::vector<Cluster> clusters, std::size_t k, bool recompute, const PairCost& cost, std::size_t jobs) {
  const std::size_t n = clusters.size();
  if (k < 1 || k > n) throw ValidationError("target cluster count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");

  Matrix costs = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                  std::numeric_limits<double>::infinity());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
  std::vector<double> initial(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    initial[p] = cost(clusters[pairs[p].first], clusters[pairs[p].second]);
  });
  for (std::size_t p = 0; p < pairs.size(); ++p)
    costs(static_cast<Eigen::Index>(pairs[p].first), static_cast<Eigen::Index>(pairs[p].second)) = initial[p];

  std::vector<std::size_t> owner(n);
  std::iota(owner.begin(), owner.end(), 0);
  auto find = [&](std::size_t x) {
    while (owner[x] != x) x = owner[x] = owner[owner[x]];
    return x;
  };

  if (!recompute) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return initial[x] < initial[y]; });
    std::size_t merges = 0;
    for (std::size_t p : order) {
      if (merges == n - k) break;
      const std::size_t a = find(pairs[p].first);
      const std::size_t b = find(pairs[p].second);
      if (a == b) continue;
      owner[std::max(a, b)] = std::min(a, b);
      ++merges;
    }
  } else {
    std::vector<char> alive(n, 1);
    for (std::size_t merges = 0; merges < n - k; ++merges) {
      std::size_t best_i = 0, best_j = 0;
      double best = std::numeric_limits<double>::infinity();
      bool found = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (!alive[j]) continue;
          const double c = costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          if (!found || c < best) {
            best = c;
            best_i = i;
            best_j = j;
            found = true;
          }
        }
      }
      absorb(clusters[best_i], clusters[best_j]);
      alive[best_j] = 0;
      owner[best_j] = best_i;
      std::vector<std::size_t> others;
      for (std::size_t l = 0; l < n; ++l)
        if (alive[l] && l != best_i) others.push_back(l);
      std::vector<double> updated(others.size());
      parallel_for(others.size(), jobs, [&](std::size_t t) { updated[t] = cost(clusters[best_i], clusters[others[t]]); });
      for (std::size_t t = 0; t < others.size(); ++t) {
        const auto lo = static_cast<Eigen::Index>(std::min(best_i, others[t]));
        const auto hi = static_cast<Eigen::Index>(std::max(best_i, others[t]));
        costs(lo, hi) = updated[t];
      }
    }
  }

  Labels out(n);
  std::vector<int> id(n, -1);
  int next = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t root = find(c);
    if (id[root] < 0) id[root] = next++;
    out[c] = id[root];
  }
  return out;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  for (const auto& [k, name] : kStrategyNames)
    if (k == kind) return name;
  return "unknown";
}

StrategyKind strategy_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kStrategyNames)
    if (n == name) return k;
  throw ValidationError("unknown merge strategy: " + std::string(name));
}

std::string_view to_string(OverclusterBackend backend) {
  return backend == OverclusterBackend::kmeans ? "kmeans" : "mixture";
}

OverclusterBackend backend_from_string(std::string_view name) {
  if (name == "mixture") return OverclusterBackend::mixture;
  if (name == "kmeans") return OverclusterBackend::kmeans;
  throw ValidationError("unknown overclustering backend: " + std::string(name));
}

void MergeStrategy::validate() const {
  if (backend == OverclusterBackend::kmeans && kind == StrategyKind::neb)
    throw ValidationError("NEB merging needs the mixture backend");
}

std::string MergeStrategy::label() const {
  std::string out = backend == OverclusterBackend::kmeans ? "kmeans " : "";
  out += to_string(kind);
  const bool uses_recompute = kind == StrategyKind::euclidean || kind == StrategyKind::dip;
  if (uses_recompute && !recompute_centers) out += " w/o recompute";
  return out;
}

Clustering oracle_merge(const Labels& assignments, const Labels& truth, std::size_t n_components, std::size_t k) {
  if (truth.size() != assignments.size()) throw ValidationError("oracle merging needs one truth label per point");
  Labels classes = truth;
  std::vector<int> values(truth.begin(), truth.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (int& c : classes) c = static_cast<int>(std::lower_bound(values.begin(), values.end(), c) - values.begin());
  if (k != values.size())
    throw ValidationError("oracle merging needs k equal to the number of truth classes (" + std::to_string(values.size()) + ")");

  std::vector<std::vector<std::size_t>> overlap(n_components, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int comp = assignments[i];
    if (comp < 0 || static_cast<std::size_t>(comp) >= n_components)
      throw ValidationError("point assigned to an unknown component");
    ++overlap[static_cast<std::size_t>(comp)][static_cast<std::size_t>(classes[i])];
  }
  Labels component_to_cluster(n_components);
  for (std::size_t c = 0; c < n_components; ++c)
    component_to_cluster[c] =
        static_cast<int>(std::max_element(overlap[c].begin(), overlap[c].end()) - overlap[c].begin());
  return make_clustering(component_to_cluster, assignments, k);
}

Clustering euclidean_merge(const Matrix& centers, const Labels& assignments, std::size_t k, bool recompute) {
  const PairCost distance = [](const Cluster& a, const Cluster& b) { return (a.center - b.center).norm(); };
  return make_clustering(agglomerate(component_clusters(centers, assignments), k, recompute, distance, 1), assignments, k);
}

Clustering euclidean_merge(const FilteredModel& m, std::size_t k, bool recompute) {
  return euclidean_merge(m.model.means, m.assignments, k, recompute);
}

double projected_dip(const Matrix& points, std::span<const std::size_t> first, std::span<const std::size_t> second,
                     const Vector& first_center, const Vector& second_center) {
  const std::size_t total = first.size() + second.size();
  if (total < 2) return 0.0;
  Vector axis = second_center - first_center;
  const double scale = std::max({1.0, first_center.norm(), second_center.norm()});
  if (!(axis.norm() > 1e-12 * scale)) {
    Matrix combined(static_cast<Eigen::Index>(total), points.cols());
    Eigen::Index r = 0;
    for (std::size_t i : first) combined.row(r++) = points.row(static_cast<Eigen::Index>(i));
    for (std::size_t i : second) combined.row(r++) = points.row(static_cast<Eigen::Index>(i));
    const Matrix centred = combined.rowwise() - combined.colwise().mean();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(centred.transpose() * centred);
    axis = eig.eigenvectors().col(eig.eigenvalues().size() - 1);
  }
  std::vector<double> projected;
  projected.reserve(total);
  for (std::size_t i : first) projected.push_back(points.row(static_cast<Eigen::Index>(i)).dot(axis));
  for (std::size_t i : second) projected.push_back(points.row(static_cast<Eigen::Index>(i)).dot(axis));
  return dip_statistic(projected);
}

Clustering dip_merge(const Matrix& points, const Matrix& centers, const Labels& assignments, std::size_t k,
                     bool recompute, std::size_t jobs) {
  if (static_cast<std::size_t>(points.rows()) != assignments.size())
    throw ValidationError("dip merging needs one assignment per point");
  const PairCost dip = [&points](const Cluster& a, const Cluster& b) {
    return projected_dip(points, a.points, b.points, a.center, b.center);
  };
  return make_clustering(agglomerate(component_clusters(centers, assignments), k, recompute, dip, jobs), assignments,
                         k);
}

Clustering dip_merge(const FilteredModel& m, const PointSet& ps, std::size_t k, bool recompute, std::size_t jobs) {
  return dip_merge(ps.points, m.model.means, m.assignments, k, recompute, jobs);
}

Clustering kmeans_overcluster_merge(const PointSet& ps, std::size_t n_centers, std::size_t k, bool recompute,
                                    std::uint64_t seed) {
  if (n_centers > ps.size())
    throw ValidationError("k-means needs at most as many centers as points");
  if (k > n_centers) throw ValidationError("target cluster count exceeds the number of k-means centers");
  const KMeansResult km = kmeans(ps.points, n_centers, seed);
  return euclidean_merge(km.centers, km.labels, k, recompute);
}

}  // namespace tneb
