#include "tneb/mixture.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tneb/kmeans.hpp"

namespace tneb {

namespace {

double log_normalizer(Family family, double df, std::size_t dim, const Matrix& lower) {
  const double d = static_cast<double>(dim);
  const double half_log_det = lower.diagonal().array().log().sum();
  if (family == Family::gaussian) return -0.5 * d * std::log(2.0 * std::numbers::pi) - half_log_det;
  return std::lgamma(0.5 * (df + d)) - std::lgamma(0.5 * df) - 0.5 * d * std::log(df * std::numbers::pi) -
         half_log_det;
}

// log f given squared Mahalanobis distances.
template <typename Derived>
auto kernel_log(Family family, double df, std::size_t dim, const Eigen::ArrayBase<Derived>& mahalanobis) {
  const double d = static_cast<double>(dim);
  if (family == Family::gaussian) return (-0.5 * mahalanobis).eval();
  return (-0.5 * (df + d) * (mahalanobis / df).log1p()).eval();
}

struct EmFailure {
  std::string reason;
};

struct EmState {
  Vector weights;
  Matrix means;  // d x K (columns)
  std::vector<Matrix> covariances;
};

class EmRunner {
 public:
  EmRunner(const PointSet& ps, const FitConfig& cfg)
      : cfg_(cfg), xt_(ps.points.transpose()), n_(ps.points.rows()), d_(ps.points.cols()) {}

  MixtureModel run(double tolerance, std::size_t max_steps) {
    const auto k = static_cast<Eigen::Index>(cfg_.n_components);
    const KMeansResult km = kmeans(xt_.transpose(), cfg_.n_components, cfg_.seed, cfg_.kmeans_iterations);
    resp_ = Matrix::Zero(n_, k);
    for (Eigen::Index i = 0; i < n_; ++i) resp_(i, km.labels[static_cast<std::size_t>(i)]) = 1.0;
    scale_ = Matrix::Ones(n_, k);
    state_ = EmState{};
    m_step();

    std::vector<double> trace;
    bool converged = false;
    std::size_t iterations = 0;
    double previous = 0.0;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const double ll = e_step(step);
      trace.push_back(ll);
      if (step > 0 && std::abs(ll - previous) <= tolerance * std::abs(previous)) {
        converged = true;
        break;
      }
      previous = ll;
      m_step();
      ++iterations;
    }
    if (!converged) trace.push_back(e_step(iterations));

    MixtureModel m;
    m.family = cfg_.family;
    m.df = cfg_.df;
    m.weights = state_.weights;
    m.means = state_.means.transpose();
    m.covariances = state_.covariances;
    m.fit_meta.seed = cfg_.seed;
    m.fit_meta.iterations_run = iterations;
    m.fit_meta.final_loglik = trace.back();
    m.fit_meta.converged = converged;
    m.fit_meta.loglik_trace = std::move(trace);
    return m;
  }

 private:
  void m_step() {
    const auto k = resp_.cols();
    const bool first = state_.covariances.empty();
    if (first) {
      state_.means = Matrix::Zero(d_, k);
      state_.covariances.assign(static_cast<std::size_t>(k), Matrix::Identity(d_, d_));
    }
    state_.weights.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const Vector tau = resp_.col(c);
      const Vector a = tau.cwiseProduct(scale_.col(c));
      const double nk = tau.sum();
      const double sa = a.sum();
      state_.weights[c] = nk / static_cast<double>(n_);
      if (!(sa > 1e-300) || !(nk > 1e-300)) continue;  // dead component keeps its parameters
      const Vector mean = xt_ * a / sa;
      const Matrix centered = xt_.colwise() - mean;
      Matrix cov = (centered.array().rowwise() * a.transpose().array()).matrix() * centered.transpose() / nk;
      cov = 0.5 * (cov + cov.transpose());
      cov.diagonal().array() += cfg_.ridge;
      state_.means.col(c) = mean;
      state_.covariances[static_cast<std::size_t>(c)] = std::move(cov);
    }
    state_.weights /= state_.weights.sum();
  }

  double e_step(std::size_t step) {
    const auto k = static_cast<Eigen::Index>(state_.covariances.size());
    Matrix log_comp(n_, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Matrix& cov = state_.covariances[static_cast<std::size_t>(c)];
      Matrix lower;
      if (!robust_cholesky(cov, lower)) {
        std::ostringstream msg;
        msg << "Cholesky failed for component " << c << " at EM step " << step;
        throw EmFailure{msg.str()};
      }
      const Matrix y =
          lower.triangularView<Eigen::Lower>().solve(xt_.colwise() - state_.means.col(c));
      const Eigen::ArrayXd maha = y.colwise().squaredNorm().transpose().array();
      const double lw = std::log(state_.weights[c]);
      log_comp.col(c) = (lw + log_normalizer(cfg_.family, cfg_.df, static_cast<std::size_t>(d_), lower) +
                         kernel_log(cfg_.family, cfg_.df, static_cast<std::size_t>(d_), maha))
                            .matrix();
      if (cfg_.family == Family::student_t)
        scale_.col(c) = ((cfg_.df + static_cast<double>(d_)) / (cfg_.df + maha)).matrix();
    }
    const Vector row_max = log_comp.rowwise().maxCoeff();
    const Vector lse =
        row_max.array() + (log_comp.colwise() - row_max).array().exp().rowwise().sum().log().matrix().array();
    const double ll = lse.mean();
    if (!std::isfinite(ll)) {
      std::ostringstream msg;
      msg << "non-finite log-likelihood at EM step " << step;
      throw EmFailure{msg.str()};
    }
    resp_ = (log_comp.colwise() - lse).array().exp().matrix();
    return ll;
  }

  const FitConfig& cfg_;
  Matrix xt_;  // d x n
  Eigen::Index n_;
  Eigen::Index d_;
  Matrix resp_;   // n x K
  Matrix scale_;  // n x K latent precision weights (all ones for the Gaussian family)
  EmState state_;
};

}  // namespace

std::string_view to_string(Family family) { return family == Family::gaussian ? "gaussian" : "student_t"; }

Family family_from_string(std::string_view name) {
  if (name == "gaussian" || name == "gmm") return Family::gaussian;
  if (name == "student_t" || name == "tmm" || name == "student-t") return Family::student_t;
  throw ValidationError("unknown mixture family: " + std::string(name));
}

void MixtureModel::validate() const {
  const auto k = weights.size();
  if (k < 1) throw ValidationError("mixture needs at least one component");
  if (means.rows() != k || static_cast<Eigen::Index>(covariances.size()) != k)
    throw ValidationError("mixture component counts disagree");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
    throw ValidationError("mixture weights must lie on the simplex");
  if (family == Family::student_t && !(df > 0.0)) throw ValidationError("Student-t df must be positive");
  for (const auto& cov : covariances) {
    if (cov.rows() != means.cols() || cov.cols() != means.cols())
      throw ValidationError("covariance dimension mismatch");
    if (!cov.isApprox(cov.transpose(), 1e-10)) throw ValidationError("covariance is not symmetric");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw ValidationError("covariance is not positive definite");
  }
}

void FitConfig::validate() const {
  if (n_components < 1) throw ValidationError("n_components must be >= 1");
  if (!(tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (!(ridge >= 0.0)) throw ValidationError("ridge must be nonnegative");
  if (max_em_steps < 1) throw ValidationError("max_em_steps must be >= 1");
  if (family == Family::student_t && !(df > 0.0)) throw ValidationError("df must be positive");
  for (const auto& r : retries)
    if (!(r.tolerance > 0.0) || r.max_steps < 1) throw ValidationError("invalid retry step");
}

bool robust_cholesky(Matrix& covariance, Matrix& lower) {
  auto attempt = [&](const Matrix& c) {
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() != Eigen::Success) return false;
    lower = llt.matrixL();
    return lower.allFinite() && (lower.diagonal().array() > 0.0).all();
  };
  if (attempt(covariance)) return true;
  const double d = static_cast<double>(covariance.rows());
  double scale = covariance.trace() / d;
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  for (double jitter : {1e-8, 1e-6, 1e-4}) {
    Matrix c = covariance;
    c.diagonal().array() += jitter * scale;
    if (attempt(c)) {
      covariance = std::move(c);
      return true;
    }
  }
  return false;
}

MixtureModel fit(const PointSet& ps, const FitConfig& cfg) {
  ps.validate();
  cfg.validate();
  if (ps.size() < cfg.n_components)
    throw ValidationError("need at least n_components points (n=" + std::to_string(ps.size()) +
                          ", K=" + std::to_string(cfg.n_components) + ")");
  std::vector<RetryStep> schedule{{cfg.tolerance, cfg.max_em_steps}};
  schedule.insert(schedule.end(), cfg.retries.begin(), cfg.retries.end());

  std::vector<std::string> diagnostics;
  EmRunner runner(ps, cfg);
  for (std::size_t attempt = 0; attempt < schedule.size(); ++attempt) {
    try {
      MixtureModel m = runner.run(schedule[attempt].tolerance, schedule[attempt].max_steps);
      m.fit_meta.attempts = attempt + 1;
      return m;
    } catch (const EmFailure& failure) {
      std::ostringstream msg;
      msg << "attempt " << attempt + 1 << " (tolerance " << schedule[attempt].tolerance << ", max steps "
          << schedule[attempt].max_steps << "): " << failure.reason;
      diagnostics.push_back(msg.str());
    }
  }
  throw FitError("mixture fit failed after " + std::to_string(schedule.size()) + " attempts", diagnostics);
}

MixtureDensity::MixtureDensity(const MixtureModel& model)
    : family_(model.family), df_(model.df), dim_(model.dim()) {
  const auto k = model.n_components();
  if (k == 0) throw ValidationError("empty mixture");
  components_.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    Matrix cov = model.covariances[c];
    Matrix lower;
    if (!robust_cholesky(cov, lower)) throw ValidationError("covariance " + std::to_string(c) + " is not positive definite");
    Component comp;
    comp.mean = model.means.row(static_cast<Eigen::Index>(c)).transpose();
    comp.inverse_factor = lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(lower.rows(), lower.cols()));
    comp.log_weight = std::log(model.weights[static_cast<Eigen::Index>(c)]);
    comp.log_normalizer = log_normalizer(family_, df_, dim_, lower);
    components_.push_back(std::move(comp));
  }
}

Matrix MixtureDensity::weighted_component_log_densities(const Matrix& cols) const {
  if (static_cast<std::size_t>(cols.rows()) != dim_) throw ValidationError("dimension mismatch");
  Matrix out(static_cast<Eigen::Index>(components_.size()), cols.cols());
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& comp = components_[c];
    const Matrix y = comp.inverse_factor.triangularView<Eigen::Lower>() * (cols.colwise() - comp.mean);
    const Eigen::ArrayXd maha = y.colwise().squaredNorm().transpose().array();
    out.row(static_cast<Eigen::Index>(c)) =
        (comp.log_weight + comp.log_normalizer + kernel_log(family_, df_, dim_, maha)).matrix().transpose();
  }
  return out;
}

Vector MixtureDensity::log_density(const Matrix& cols) const {
  const Matrix lc = weighted_component_log_densities(cols);
  const Eigen::RowVectorXd mx = lc.colwise().maxCoeff();
  return (mx.array() + (lc.rowwise() - mx).array().exp().colwise().sum().log()).matrix().transpose();
}

void MixtureDensity::log_density_and_gradient(const Matrix& cols, Vector& log_density, Matrix& gradient) const {
  if (static_cast<std::size_t>(cols.rows()) != dim_) throw ValidationError("dimension mismatch");
  const auto k = static_cast<Eigen::Index>(components_.size());
  const auto p = cols.cols();
  std::vector<Matrix> whitened(components_.size());
  Matrix lc(k, p);
  Matrix tail(k, p);  // heavy-tail factor (df + d) / (df + maha), 1 for Gaussians
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& comp = components_[static_cast<std::size_t>(c)];
    whitened[static_cast<std::size_t>(c)] =
        comp.inverse_factor.triangularView<Eigen::Lower>() * (cols.colwise() - comp.mean);
    const Eigen::ArrayXd maha = whitened[static_cast<std::size_t>(c)].colwise().squaredNorm().transpose().array();
    lc.row(c) = (comp.log_weight + comp.log_normalizer + kernel_log(family_, df_, dim_, maha)).matrix().transpose();
    if (family_ == Family::gaussian)
      tail.row(c).setOnes();
    else
      tail.row(c) = ((df_ + static_cast<double>(dim_)) / (df_ + maha)).matrix().transpose();
  }
  const Eigen::RowVectorXd mx = lc.colwise().maxCoeff();
  const Eigen::RowVectorXd lse = mx.array() + (lc.rowwise() - mx).array().exp().colwise().sum().log();
  log_density = lse.transpose();
  const Matrix weight = (lc.rowwise() - lse).array().exp().matrix().cwiseProduct(tail);
  gradient = Matrix::Zero(static_cast<Eigen::Index>(dim_), p);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& comp = components_[static_cast<std::size_t>(c)];
    const Matrix scaled = whitened[static_cast<std::size_t>(c)] * weight.row(c).asDiagonal();
    gradient.noalias() -= comp.inverse_factor.transpose().triangularView<Eigen::Upper>() * scaled;
  }
}

double log_density(const MixtureModel& m, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != m.dim()) throw ValidationError("dimension mismatch");
  return MixtureDensity(m).log_density(x)[0];
}

Vector log_density_gradient(const MixtureModel& m, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != m.dim()) throw ValidationError("dimension mismatch");
  Vector ld;
  Matrix grad;
  MixtureDensity(m).log_density_and_gradient(x, ld, grad);
  return grad.col(0);
}

Matrix responsibilities(const MixtureModel& m, const PointSet& ps) {
  if (ps.dim() != m.dim()) throw ValidationError("dimension mismatch");
  const Matrix lc = MixtureDensity(m).weighted_component_log_densities(ps.points.transpose());
  const Eigen::RowVectorXd mx = lc.colwise().maxCoeff();
  const Matrix e = (lc.rowwise() - mx).array().exp().matrix();
  const Eigen::RowVectorXd sums = e.colwise().sum();
  return (e.array().rowwise() / sums.array()).matrix().transpose();
}

Labels hard_assign(const MixtureModel& m, const PointSet& ps) {
  const Matrix r = responsibilities(m, ps);
  Labels out(static_cast<std::size_t>(r.rows()));
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < r.cols(); ++c)
      if (r(i, c) > r(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double mean_log_likelihood(const MixtureModel& m, const PointSet& ps) {
  if (ps.dim() != m.dim()) throw ValidationError("dimension mismatch");
  return MixtureDensity(m).log_density(ps.points.transpose()).mean();
}

double component_log_density(Family family, double df, const Vector& mean, const Matrix& covariance, const Vector& x) {
  Matrix cov = covariance;
  Matrix lower;
  if (!robust_cholesky(cov, lower)) throw ValidationError("covariance is not positive definite");
  const Vector y = lower.triangularView<Eigen::Lower>().solve(x - mean);
  Eigen::ArrayXd maha(1);
  maha[0] = y.squaredNorm();
  return log_normalizer(family, df, static_cast<std::size_t>(mean.size()), lower) +
         kernel_log(family, df, static_cast<std::size_t>(mean.size()), maha)[0];
}

}  // namespace tneb
