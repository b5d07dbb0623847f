#include "tneb/neb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tneb {

void NebConfig::validate() const {
  if (n_path_points < 3) throw ValidationError("NEB needs at least 3 path points");
  if (n_steps < 1) throw ValidationError("NEB needs at least one step");
  if (step_size && !(*step_size >= 0.0)) throw ValidationError("NEB step size must be nonnegative");
  if (!(step_scale >= 0.0)) throw ValidationError("NEB step scale must be nonnegative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("Adam epsilon must be positive");
}

std::string NebConfig::fingerprint() const {
  std::ostringstream out;
  out.precision(17);
  out << n_path_points << '/' << n_steps << '/' << (step_size ? *step_size : -1.0) << '/' << step_scale << '/' << beta1
      << '/' << beta2 << '/' << epsilon << '/' << keep_best;
  return out.str();
}

Matrix respace_uniform(const Matrix& cols) {
  const auto p = cols.cols();
  if (p < 3) return cols;
  std::vector<double> cumulative(static_cast<std::size_t>(p), 0.0);
  for (Eigen::Index j = 1; j < p; ++j)
    cumulative[static_cast<std::size_t>(j)] =
        cumulative[static_cast<std::size_t>(j - 1)] + (cols.col(j) - cols.col(j - 1)).norm();
  const double total = cumulative.back();
  if (!(total > 0.0)) return cols;

  Matrix out(cols.rows(), p);
  out.col(0) = cols.col(0);
  out.col(p - 1) = cols.col(p - 1);
  std::size_t seg = 0;
  const auto last_seg = static_cast<std::size_t>(p - 2);
  for (Eigen::Index j = 1; j < p - 1; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(p - 1);
    while (seg < last_seg && cumulative[seg + 1] < target) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double frac = len > 0.0 ? std::clamp((target - cumulative[seg]) / len, 0.0, 1.0) : 0.0;
    const auto s = static_cast<Eigen::Index>(seg);
    out.col(j) = cols.col(s) + frac * (cols.col(s + 1) - cols.col(s));
  }
  return out;
}

namespace {

Matrix straight_line(const Vector& start, const Vector& end, std::size_t n_points) {
  const auto p = static_cast<Eigen::Index>(n_points);
  Matrix path(start.size(), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(p - 1);
    path.col(j) = start + t * (end - start);
  }
  path.col(0) = start;
  path.col(p - 1) = end;
  return path;
}

DensityPath run_neb(const MixtureDensity& density, const Vector& start, const Vector& end, const NebConfig& cfg) {
  const auto p = static_cast<Eigen::Index>(cfg.n_path_points);
  const auto d = start.size();
  Matrix path = straight_line(start, end, cfg.n_path_points);
  const double lr = cfg.step_size ? *cfg.step_size : cfg.step_scale * (end - start).norm();

  Matrix first_moment = Matrix::Zero(d, p - 2);
  Matrix second_moment = Matrix::Zero(d, p - 2);
  Vector logp;
  Matrix grad;

  DensityPath best;
  best.bottleneck_log_density = -std::numeric_limits<double>::infinity();
  double beta1_power = 1.0;
  double beta2_power = 1.0;
  for (std::size_t step = 0;; ++step) {
    density.log_density_and_gradient(path, logp, grad);
    if (!logp.allFinite() || !grad.allFinite())
      throw NumericalError("non-finite log-density or gradient at NEB step " + std::to_string(step), step);
    Eigen::Index argmin = 0;
    const double bottleneck = logp.minCoeff(&argmin);
    if (step == 0 || !cfg.keep_best || bottleneck > best.bottleneck_log_density) {
      best.points = path.transpose();
      best.log_densities = logp;
      best.bottleneck_log_density = bottleneck;
      best.argmin_index = static_cast<std::size_t>(argmin);
      best.best_step = step;
    }
    if (step == cfg.n_steps) break;

    // Ascent on the interior points only.
    const auto g = grad.middleCols(1, p - 2);
    beta1_power *= cfg.beta1;
    beta2_power *= cfg.beta2;
    first_moment = cfg.beta1 * first_moment + (1.0 - cfg.beta1) * g;
    second_moment = cfg.beta2 * second_moment + (1.0 - cfg.beta2) * g.cwiseAbs2();
    const auto m_hat = first_moment.array() / (1.0 - beta1_power);
    const auto v_hat = second_moment.array() / (1.0 - beta2_power);
    path.middleCols(1, p - 2).array() += lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
    path = respace_uniform(path);
  }
  return best;
}

DensityPath reversed(DensityPath path) {
  std::swap(path.a, path.b);
  path.points = path.points.colwise().reverse().eval();
  path.log_densities = path.log_densities.reverse().eval();
  path.argmin_index = static_cast<std::size_t>(path.log_densities.size()) - 1 - path.argmin_index;
  return path;
}

bool lexicographically_less(const Vector& x, const Vector& y) {
  return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
}

}  // namespace

DensityPath optimize_path(const MixtureDensity& density, const Vector& start, const Vector& end, const NebConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(start.size()) != density.dim() || static_cast<std::size_t>(end.size()) != density.dim())
    throw ValidationError("NEB endpoint dimension mismatch");
  // Always optimise in a canonical direction so (a, b) and (b, a) agree exactly.
  if (lexicographically_less(end, start)) return reversed(run_neb(density, end, start, cfg));
  return run_neb(density, start, end, cfg);
}

DensityPath optimize_component_path(const MixtureDensity& density, const Matrix& means, std::size_t a, std::size_t b,
                                    const NebConfig& cfg) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(means.rows());
  if (a >= k || b >= k) throw ValidationError("NEB endpoint is not a surviving component");
  if (a == b) throw ValidationError("NEB endpoints must differ");
  const bool swap = b < a;
  const auto lo = static_cast<Eigen::Index>(swap ? b : a);
  const auto hi = static_cast<Eigen::Index>(swap ? a : b);
  DensityPath path = run_neb(density, means.row(lo).transpose(), means.row(hi).transpose(), cfg);
  path.a = static_cast<std::size_t>(lo);
  path.b = static_cast<std::size_t>(hi);
  return swap ? reversed(std::move(path)) : path;
}

DensityPath optimize_path(const FilteredModel& m, std::size_t a, std::size_t b, const NebConfig& cfg) {
  if (a >= m.n_components() || b >= m.n_components())
    throw ValidationError("NEB endpoint is not a surviving component");
  return optimize_component_path(MixtureDensity(m.model), m.model.means, a, b, cfg);
}

double straight_line_bottleneck(const FilteredModel& m, std::size_t a, std::size_t b, std::size_t n_points) {
  const std::size_t k = m.n_components();
  if (a >= k || b >= k) throw ValidationError("endpoint is not a surviving component");
  if (a == b) throw ValidationError("endpoints must differ");
  if (n_points < 2) throw ValidationError("need at least two samples");
  const Matrix line = straight_line(m.model.means.row(static_cast<Eigen::Index>(a)).transpose(),
                                    m.model.means.row(static_cast<Eigen::Index>(b)).transpose(), n_points);
  return MixtureDensity(m.model).log_density(line).minCoeff();
}

void save_path_csv(const DensityPath& path, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot open '" + file + "' for writing");
  std::string text;
  for (Eigen::Index j = 0; j < path.points.cols(); ++j) text += "x" + std::to_string(j) + ",";
  text += "log_density\n";
  for (Eigen::Index i = 0; i < path.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < path.points.cols(); ++j) text += format_double(path.points(i, j)) + ",";
    text += format_double(path.log_densities[i]) + "\n";
  }
  out << text;
  if (!out) throw IoError("failed writing '" + file + "'");
}

}  // namespace tneb
