#include "tneb/filtering.hpp"

#include <cmath>
#include <limits>

namespace tneb {

void FilterConfig::validate() const {
  if (min_points < 1) throw ValidationError("min_points must be >= 1");
  if (!(elongation_factor > 0.0)) throw ValidationError("elongation_factor must be positive");
}

std::string_view to_string(RemovalReason reason) {
  return reason == RemovalReason::too_small ? "too_small" : "too_elongated";
}

double eigenvalue_ratio(const Matrix& covariance) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

namespace {

FilteredModel restrict_to(const MixtureModel& m, const PointSet& ps, const std::vector<bool>& keep,
                          std::vector<RemovedComponent> removed, const Labels& original_assign) {
  FilteredModel fm;
  fm.removed = std::move(removed);
  fm.survivor_map.assign(m.n_components(), -1);
  for (std::size_t c = 0; c < m.n_components(); ++c) {
    if (!keep[c]) continue;
    fm.survivor_map[c] = static_cast<int>(fm.survivors.size());
    fm.survivors.push_back(c);
  }
  if (fm.survivors.empty()) throw FilterError("filtering removed every mixture component");

  const auto l = static_cast<Eigen::Index>(fm.survivors.size());
  fm.model.family = m.family;
  fm.model.df = m.df;
  fm.model.fit_meta = m.fit_meta;
  fm.model.weights.resize(l);
  fm.model.means.resize(l, m.means.cols());
  for (Eigen::Index s = 0; s < l; ++s) {
    const auto c = static_cast<Eigen::Index>(fm.survivors[static_cast<std::size_t>(s)]);
    fm.model.weights[s] = m.weights[c];
    fm.model.means.row(s) = m.means.row(c);
    fm.model.covariances.push_back(m.covariances[static_cast<std::size_t>(c)]);
  }
  fm.retained_mass = fm.model.weights.sum();
  fm.model.weights /= fm.retained_mass;

  // Points of survivors keep their component; only orphans are reassigned.
  fm.assignments.resize(original_assign.size());
  bool orphans = false;
  for (std::size_t i = 0; i < original_assign.size(); ++i) {
    fm.assignments[i] = fm.survivor_map[static_cast<std::size_t>(original_assign[i])];
    orphans = orphans || fm.assignments[i] < 0;
  }
  if (orphans) {
    const Labels reassigned = hard_assign(fm.model, ps);
    for (std::size_t i = 0; i < fm.assignments.size(); ++i)
      if (fm.assignments[i] < 0) fm.assignments[i] = reassigned[i];
  }
  return fm;
}

}  // namespace

FilteredModel filter_components(const MixtureModel& m, const PointSet& ps, const FilterConfig& cfg) {
  cfg.validate();
  if (ps.dim() != m.dim()) throw ValidationError("model and point set dimensions differ");
  const Labels assign = hard_assign(m, ps);
  std::vector<std::size_t> counts(m.n_components(), 0);
  for (int a : assign) ++counts[static_cast<std::size_t>(a)];

  const double threshold = cfg.elongation_factor * static_cast<double>(m.dim());
  std::vector<bool> keep(m.n_components(), true);
  std::vector<RemovedComponent> removed;
  for (std::size_t c = 0; c < m.n_components(); ++c) {
    const double ratio = eigenvalue_ratio(m.covariances[c]);
    if (counts[c] < cfg.min_points) {
      keep[c] = false;
      removed.push_back({c, RemovalReason::too_small, counts[c], ratio});
    } else if (ratio > threshold) {
      keep[c] = false;
      removed.push_back({c, RemovalReason::too_elongated, counts[c], ratio});
    }
  }
  return restrict_to(m, ps, keep, std::move(removed), assign);
}

FilteredModel unfiltered(const MixtureModel& m, const PointSet& ps) {
  return restrict_to(m, ps, std::vector<bool>(m.n_components(), true), {}, hard_assign(m, ps));
}

FilteredModel filter_until_stable(const MixtureModel& m, const PointSet& ps, const FilterConfig& cfg) {
  FilteredModel current = filter_components(m, ps, cfg);
  for (;;) {
    FilteredModel next = filter_components(current.model, ps, cfg);
    if (next.removed.empty()) return current;
    // Compose the index maps back onto the original model.
    for (auto& r : next.removed) r.component = current.survivors[r.component];
    for (auto& s : next.survivors) s = current.survivors[s];
    std::vector<int> map(m.n_components(), -1);
    for (std::size_t s = 0; s < next.survivors.size(); ++s) map[next.survivors[s]] = static_cast<int>(s);
    next.survivor_map = std::move(map);
    next.removed.insert(next.removed.begin(), current.removed.begin(), current.removed.end());
    next.retained_mass *= current.retained_mass;
    current = std::move(next);
  }
}

nlohmann::json to_json(const FilteredModel& fm) {
  nlohmann::json removed = nlohmann::json::array();
  for (const auto& r : fm.removed)
    removed.push_back({{"component", r.component},
                       {"reason", std::string(to_string(r.reason))},
                       {"assigned_points", r.assigned_points},
                       {"eigen_ratio", std::isfinite(r.eigen_ratio) ? nlohmann::json(r.eigen_ratio) : nlohmann::json()}});
  return {{"model", to_json(fm.model)},
          {"survivors", fm.survivors},
          {"removed", removed},
          {"retained_mass", fm.retained_mass}};
}

FilteredModel filtered_from_json(const nlohmann::json& j) {
  try {
    FilteredModel fm;
    fm.model = mixture_from_json(j.at("model"));
    fm.survivors = j.at("survivors").get<std::vector<std::size_t>>();
    fm.retained_mass = j.value("retained_mass", 1.0);
    std::size_t original = fm.survivors.empty() ? 0 : fm.survivors.back() + 1;
    for (const auto& r : j.value("removed", nlohmann::json::array())) {
      RemovedComponent rc;
      rc.component = r.at("component").get<std::size_t>();
      rc.reason = r.at("reason").get<std::string>() == "too_small" ? RemovalReason::too_small
                                                                   : RemovalReason::too_elongated;
      rc.assigned_points = r.value("assigned_points", std::size_t{0});
      rc.eigen_ratio = r["eigen_ratio"].is_null() ? std::numeric_limits<double>::infinity()
                                                  : r["eigen_ratio"].get<double>();
      original = std::max(original, rc.component + 1);
      fm.removed.push_back(rc);
    }
    fm.survivor_map.assign(original, -1);
    for (std::size_t s = 0; s < fm.survivors.size(); ++s) fm.survivor_map[fm.survivors[s]] = static_cast<int>(s);
    if (fm.survivors.size() != fm.model.n_components()) throw ValidationError("survivor list does not match model");
    return fm;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed filtered model JSON: ") + e.what());
  }
}

}  // namespace tneb
