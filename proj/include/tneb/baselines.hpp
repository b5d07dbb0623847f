#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "tneb/dataset.hpp"
#include "tneb/filtering.hpp"
#include "tneb/hierarchy.hpp"

namespace tneb {

enum class StrategyKind { oracle, euclidean, dip, neb };
enum class OverclusterBackend { mixture, kmeans };

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(std::string_view name);
std::string_view to_string(OverclusterBackend backend);
OverclusterBackend backend_from_string(std::string_view name);

struct MergeStrategy {
  StrategyKind kind = StrategyKind::neb;
  bool recompute_centers = true;  // ignored by neb and oracle
  OverclusterBackend backend = OverclusterBackend::mixture;

  void validate() const;
  // Short column name such as "euclidean", "dip w/o recompute" or "kmeans euclidean".
  std::string label() const;
};

// Maps every component to the truth class holding most of its points (ties to
// the smaller class). Truth values are renumbered densely first.
Clustering oracle_merge(const Labels& assignments, const Labels& truth, std::size_t n_components, std::size_t k);

// Agglomerates components by center distance down to k clusters. With
// recompute the merged center is the point-count weighted mean and distances
// are recomputed after every merge; without it all initial distances are
// sorted once and applied as single linkage.
Clustering euclidean_merge(const Matrix& centers, const Labels& assignments, std::size_t k, bool recompute);
Clustering euclidean_merge(const FilteredModel& m, std::size_t k, bool recompute);

// As euclidean_merge, but the pair to merge is the one whose combined points,
// projected on the line through the two centers, have the smallest dip.
Clustering dip_merge(const Matrix& points, const Matrix& centers, const Labels& assignments, std::size_t k,
                     bool recompute, std::size_t jobs = 1);
Clustering dip_merge(const FilteredModel& m, const PointSet& ps, std::size_t k, bool recompute, std::size_t jobs = 1);

// Dip of the two point groups projected onto the line through their centers,
// or onto the first principal axis of the union when the centers coincide.
double projected_dip(const Matrix& points, std::span<const std::size_t> first, std::span<const std::size_t> second,
                     const Vector& first_center, const Vector& second_center);

// k-means with n_centers clusters followed by Euclidean merging to k.
Clustering kmeans_overcluster_merge(const PointSet& ps, std::size_t n_centers, std::size_t k, bool recompute,
                                    std::uint64_t seed);

}  // namespace tneb
