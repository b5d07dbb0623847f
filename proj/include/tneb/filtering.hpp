#pragma once

#include <string_view>
#include <vector>

#include "json.hpp"

#include "tneb/mixture.hpp"

namespace tneb {

struct FilterConfig {
  std::size_t min_points = 10;
  double elongation_factor = 500.0;  // eigenvalue-ratio threshold is factor * d

  void validate() const;
};

enum class RemovalReason { too_small, too_elongated };
std::string_view to_string(RemovalReason reason);

struct RemovedComponent {
  std::size_t component;  // index in the unfiltered model
  RemovalReason reason;
  std::size_t assigned_points;
  double eigen_ratio;  // largest / smallest covariance eigenvalue
};

// A mixture restricted to the components that survived filtering. Surviving
// components are re-indexed 0..L-1 in their original order.
struct FilteredModel {
  MixtureModel model;                   // survivors, weights renormalised
  std::vector<std::size_t> survivors;   // surviving index -> original index
  std::vector<int> survivor_map;        // original index -> surviving index, -1 if removed
  std::vector<RemovedComponent> removed;
  double retained_mass = 1.0;           // original weight mass of the survivors
  Labels assignments;                   // per-point surviving component

  std::size_t n_components() const { return survivors.size(); }
};

// Removes components with fewer than min_points hard-assigned points or an
// eigenvalue ratio above elongation_factor * d, then reassigns the orphaned
// points by argmax responsibility under the renormalised survivor model.
FilteredModel filter_components(const MixtureModel& m, const PointSet& ps, const FilterConfig& cfg);

// Wraps a model without removing anything.
FilteredModel unfiltered(const MixtureModel& m, const PointSet& ps);

// Applies filter_components until nothing more is removed.
FilteredModel filter_until_stable(const MixtureModel& m, const PointSet& ps, const FilterConfig& cfg);

double eigenvalue_ratio(const Matrix& covariance);

nlohmann::json to_json(const FilteredModel& fm);
FilteredModel filtered_from_json(const nlohmann::json& j);

}  // namespace tneb
