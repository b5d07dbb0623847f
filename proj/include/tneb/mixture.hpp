#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tneb/common.hpp"
#include "tneb/dataset.hpp"

namespace tneb {

enum class Family { gaussian, student_t };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

struct FitMeta {
  std::uint64_t seed = 0;
  std::size_t iterations_run = 0;
  double final_loglik = 0.0;  // mean per-sample log-likelihood
  bool converged = false;
  std::size_t attempts = 0;          // 1 = primary attempt succeeded
  std::vector<double> loglik_trace;  // mean log-likelihood after every E-step
};

// Full-covariance Gaussian or Student-t mixture. df is fixed (never estimated).
struct MixtureModel {
  Family family = Family::student_t;
  double df = 1.0;
  Vector weights;                   // K
  Matrix means;                     // K x d
  std::vector<Matrix> covariances;  // K matrices, d x d
  FitMeta fit_meta;

  std::size_t n_components() const { return static_cast<std::size_t>(weights.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }
  void validate() const;
};

struct RetryStep {
  double tolerance;
  std::size_t max_steps;
};

enum class InitMethod { kmeans };

struct FitConfig {
  std::size_t n_components = 25;
  Family family = Family::student_t;
  double df = 1.0;
  InitMethod init = InitMethod::kmeans;
  std::size_t max_em_steps = 1000;
  double tolerance = 1e-5;  // relative change of the mean log-likelihood
  double ridge = 1e-4;      // added to every covariance diagonal at each M-step
  std::uint64_t seed = 0;
  std::vector<RetryStep> retries{{1e-3, 100000}};
  std::size_t kmeans_iterations = 50;

  void validate() const;
};

// Fits a mixture by EM (ECM with fixed df for the Student-t family), with
// k-means++ initialisation and the retry schedule on numerical failure.
MixtureModel fit(const PointSet& ps, const FitConfig& cfg);

// Pre-factored mixture for repeated evaluation. Batch methods take points as
// the columns of a d x P matrix.
class MixtureDensity {
 public:
  explicit MixtureDensity(const MixtureModel& model);

  std::size_t dim() const { return dim_; }
  std::size_t n_components() const { return components_.size(); }

  // K x P matrix of log(w_k) + log f_k(x_p).
  Matrix weighted_component_log_densities(const Matrix& cols) const;

  Vector log_density(const Matrix& cols) const;

  // Log-density and its gradient (d x P) at every column.
  void log_density_and_gradient(const Matrix& cols, Vector& log_density, Matrix& gradient) const;

 private:
  struct Component {
    Vector mean;
    Matrix inverse_factor;  // L^{-1} with covariance = L L^T
    double log_weight;
    double log_normalizer;
  };
  Family family_;
  double df_;
  std::size_t dim_;
  std::vector<Component> components_;
};

double log_density(const MixtureModel& m, const Vector& x);
Vector log_density_gradient(const MixtureModel& m, const Vector& x);

// n x K, rows on the probability simplex.
Matrix responsibilities(const MixtureModel& m, const PointSet& ps);

// Row-wise argmax of the responsibilities, ties to the lowest index.
Labels hard_assign(const MixtureModel& m, const PointSet& ps);

// Mean per-sample log-likelihood of ps under m.
double mean_log_likelihood(const MixtureModel& m, const PointSet& ps);

// Log-density of a single component (no weight).
double component_log_density(Family family, double df, const Vector& mean, const Matrix& covariance, const Vector& x);

// Cholesky with diagonal jitter escalation (1e-8, 1e-6, 1e-4 times trace/d).
// When jitter was needed, covariance is replaced by the jittered matrix.
// Returns false when every attempt fails.
bool robust_cholesky(Matrix& covariance, Matrix& lower);

nlohmann::json to_json(const MixtureModel& m);
MixtureModel mixture_from_json(const nlohmann::json& j);

}  // namespace tneb
