#include "tneb/mixture.hpp"

namespace tneb {

nlohmann::json to_json(const MixtureModel& m) {
  nlohmann::json j;
  j["family"] = std::string(to_string(m.family));
  j["df"] = m.df;
  j["weights"] = std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size());
  auto& means = j["means"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.means.rows(); ++r) {
    const Vector row = m.means.row(r).transpose();
    means.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  auto& covs = j["covariances"] = nlohmann::json::array();
  for (const auto& cov : m.covariances) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < cov.rows(); ++r) {
      const Vector row = cov.row(r).transpose();
      rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    covs.push_back(std::move(rows));
  }
  j["fit_meta"] = {
      {"seed", m.fit_meta.seed},
      {"iterations_run", m.fit_meta.iterations_run},
      {"final_loglik", m.fit_meta.final_loglik},
      {"converged", m.fit_meta.converged},
      {"attempts", m.fit_meta.attempts},
  };
  return j;
}

MixtureModel mixture_from_json(const nlohmann::json& j) {
  try {
    MixtureModel m;
    m.family = family_from_string(j.at("family").get<std::string>());
    m.df = j.value("df", 1.0);
    const auto weights = j.at("weights").get<std::vector<double>>();
    m.weights = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    const auto means = j.at("means").get<std::vector<std::vector<double>>>();
    const auto k = static_cast<Eigen::Index>(means.size());
    const auto d = k ? static_cast<Eigen::Index>(means[0].size()) : 0;
    m.means.resize(k, d);
    for (Eigen::Index r = 0; r < k; ++r) {
      if (static_cast<Eigen::Index>(means[static_cast<std::size_t>(r)].size()) != d)
        throw ValidationError("ragged means in model JSON");
      m.means.row(r) = Eigen::Map<const Eigen::RowVectorXd>(means[static_cast<std::size_t>(r)].data(), d);
    }
    for (const auto& rows : j.at("covariances")) {
      const auto values = rows.get<std::vector<std::vector<double>>>();
      Matrix cov(static_cast<Eigen::Index>(values.size()), d);
      for (std::size_t r = 0; r < values.size(); ++r) {
        if (static_cast<Eigen::Index>(values[r].size()) != d) throw ValidationError("ragged covariance in model JSON");
        cov.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(values[r].data(), d);
      }
      m.covariances.push_back(std::move(cov));
    }
    if (j.contains("fit_meta")) {
      const auto& meta = j["fit_meta"];
      m.fit_meta.seed = meta.value("seed", std::uint64_t{0});
      m.fit_meta.iterations_run = meta.value("iterations_run", std::size_t{0});
      m.fit_meta.final_loglik = meta.value("final_loglik", 0.0);
      m.fit_meta.converged = meta.value("converged", false);
      m.fit_meta.attempts = meta.value("attempts", std::size_t{0});
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace tneb
