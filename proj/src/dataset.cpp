#include "tneb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace tneb {

namespace {

constexpr std::array<DatasetKind, 8> kAllKinds{
    DatasetKind::noisy_circles,     DatasetKind::noisy_moons,           DatasetKind::varied_density,
    DatasetKind::anisotropic_blobs, DatasetKind::gaussian_blobs,        DatasetKind::hierarchical_gaussians,
    DatasetKind::hd_gaussian_blobs, DatasetKind::hd_student_blobs,
};

// Centers of the scikit-learn demo blobs (make_blobs, random_state=30 / 170).
const std::vector<std::vector<double>> kBlobCenters{
    {2.8828707213667, -2.3850302072976692}, {3.260958106713371, -6.726985477944933},
    {9.252156273486374, -3.0667631924046868}};
const std::vector<std::vector<double>> kAnisoCenters{
    {-8.947091648044037, -5.462764348304834}, {-4.5893898890314855, 0.08876178234712206},
    {1.938754323521918, 0.5051361256709956}};

// Per-class sample counts from weights by largest remainder; ties go to lower classes.
std::vector<std::size_t> class_counts(std::size_t n, std::size_t k, const std::optional<std::vector<double>>& weights) {
  std::vector<double> w(k, 1.0);
  if (weights) w = *weights;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = static_cast<double>(n) * w[c] / total;
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[c];
    remainders.emplace_back(-(exact - std::floor(exact)), c);
  }
  std::stable_sort(remainders.begin(), remainders.end());
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % k].second];
  return counts;
}

Labels shuffled_labels(const std::vector<std::size_t>& counts, std::mt19937_64& rng) {
  Labels labels;
  for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), counts[c], static_cast<int>(c));
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

std::vector<std::vector<double>> box_centers(std::size_t k, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::vector<std::vector<double>> centers(k, std::vector<double>(d));
  for (auto& c : centers)
    for (auto& v : c) v = box(rng);
  return centers;
}

PointSet blobs(const DatasetSpec& spec, std::mt19937_64& rng) {
  const std::size_t k = spec.resolved_n_classes();
  const std::size_t d = spec.dimension;
  std::vector<std::vector<double>> centers;
  std::vector<double> stds(k, 1.0);
  if (spec.kind == DatasetKind::varied_density) {
    stds = {1.0, 2.5, 0.5};
    centers = kAnisoCenters;
    for (auto& c : centers)
      for (auto& v : c) v *= 1.5;
  } else if (spec.kind == DatasetKind::anisotropic_blobs) {
    centers = kAnisoCenters;
  } else {
    centers = kBlobCenters;
  }
  if (spec.centers) {
    centers = *spec.centers;
  } else if (centers.size() != k) {
    centers = box_centers(k, d, rng);
  }
  if (spec.blob_std) stds = *spec.blob_std;
  stds.resize(k, stds.empty() ? 1.0 : stds.back());

  PointSet ps;
  const Labels labels = shuffled_labels(class_counts(spec.n_points, k, spec.class_weights), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  ps.points.resize(static_cast<Eigen::Index>(spec.n_points), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    for (std::size_t j = 0; j < d; ++j)
      ps.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = centers[c][j] + stds[c] * normal(rng);
  }
  if (spec.kind == DatasetKind::anisotropic_blobs) {
    const auto& t = spec.anisotropic_transform;
    Eigen::Matrix2d transform;
    transform << t[0], t[1], t[2], t[3];
    ps.points = ps.points * transform;
  }
  ps.labels = labels;
  return ps;
}

// Shuffles noise-free 2D shape points and adds isotropic Gaussian noise.
PointSet shuffle_with_noise(const std::vector<std::array<double, 2>>& pts, const Labels& labels, double noise,
                            std::mt19937_64& rng) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  PointSet ps;
  ps.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
  Labels shuffled(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    ps.points(r, 0) = pts[order[i]][0];
    ps.points(r, 1) = pts[order[i]][1];
    if (noise > 0.0) {
      ps.points(r, 0) += noise * normal(rng);
      ps.points(r, 1) += noise * normal(rng);
    }
    shuffled[i] = labels[order[i]];
  }
  ps.labels = std::move(shuffled);
  return ps;
}

PointSet moons(const DatasetSpec& spec, std::mt19937_64& rng) {
  const std::size_t n_outer = spec.n_points / 2;
  const std::size_t n_inner = spec.n_points - n_outer;
  const double noise = spec.noise.value_or(0.05);
  std::vector<std::array<double, 2>> pts;
  Labels labels;
  auto linspace = [](std::size_t count, std::size_t i) {
    return count <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = linspace(n_outer, i);
    pts.push_back({std::cos(t), std::sin(t)});
    labels.push_back(0);
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = linspace(n_inner, i);
    pts.push_back({1.0 - std::cos(t), 0.5 - std::sin(t)});
    labels.push_back(1);
  }
  return shuffle_with_noise(pts, labels, noise, rng);
}

PointSet circles(const DatasetSpec& spec, std::mt19937_64& rng) {
  const std::size_t n_outer = spec.n_points / 2;
  const std::size_t n_inner = spec.n_points - n_outer;
  const double noise = spec.noise.value_or(0.05);
  std::vector<std::array<double, 2>> pts;
  Labels labels;
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_outer);
    pts.push_back({std::cos(t), std::sin(t)});
    labels.push_back(0);
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_inner);
    pts.push_back({spec.circle_factor * std::cos(t), spec.circle_factor * std::sin(t)});
    labels.push_back(1);
  }
  return shuffle_with_noise(pts, labels, noise, rng);
}

// Six isotropic Gaussians: three groups on a triangle, two members per group
// offset tangentially. Primary labels 2g, 2g+1; group map {0,0,1,1,2,2}.
PointSet hierarchical(const DatasetSpec& spec, std::mt19937_64& rng) {
  std::vector<std::array<double, 2>> centers;
  for (int g = 0; g < 3; ++g) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * g / 3.0;
    const double cx = spec.group_radius * std::cos(angle);
    const double cy = spec.group_radius * std::sin(angle);
    const double tx = -std::sin(angle);
    const double ty = std::cos(angle);
    const double h = spec.pair_separation / 2.0;
    centers.push_back({cx - h * tx, cy - h * ty});
    centers.push_back({cx + h * tx, cy + h * ty});
  }
  const Labels labels = shuffled_labels(class_counts(spec.n_points, 6, spec.class_weights), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  PointSet ps;
  ps.points.resize(static_cast<Eigen::Index>(spec.n_points), 2);
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    const auto r = static_cast<Eigen::Index>(i);
    ps.points(r, 0) = centers[c][0] + spec.hierarchical_std * normal(rng);
    ps.points(r, 1) = centers[c][1] + spec.hierarchical_std * normal(rng);
  }
  ps.labels = labels;
  ps.label_groups = {0, 0, 1, 1, 2, 2};
  return ps;
}

// Class centers on a sphere (rejection-sampled for a minimum pairwise distance),
// per-class covariance Q diag(s)^2 Q^T with random rotation Q and scales s. The
// Gaussian and Student-t kinds share every draw up to the chi-square scales, so
// large df converges to the Gaussian sample.
PointSet hd_blobs(const DatasetSpec& spec, std::mt19937_64& rng) {
  const std::size_t k = spec.resolved_n_classes();
  const auto d = static_cast<Eigen::Index>(spec.dimension);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scale(spec.scale_min, spec.scale_max);

  std::vector<Vector> centers;
  if (spec.centers) {
    for (const auto& c : *spec.centers) centers.push_back(Eigen::Map<const Vector>(c.data(), d));
  } else {
    std::size_t attempts = 0;
    while (centers.size() < k) {
      if (++attempts > 100000)
        throw ValidationError("hd blobs: cannot place centers with the requested minimum separation");
      Vector dir(d);
      for (Eigen::Index j = 0; j < d; ++j) dir[j] = normal(rng);
      dir *= spec.sphere_radius / dir.norm();
      const bool far_enough = std::all_of(centers.begin(), centers.end(), [&](const Vector& c) {
        return (c - dir).norm() >= spec.min_center_separation;
      });
      if (far_enough) centers.push_back(dir);
    }
  }

  std::vector<Matrix> factors;
  for (std::size_t c = 0; c < k; ++c) {
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
    Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Vector s(d);
    for (Eigen::Index j = 0; j < d; ++j) s[j] = scale(rng);
    factors.push_back(q * s.asDiagonal());
  }

  // Spine vertices, centred on the class center.
  std::vector<Matrix> spines;
  for (std::size_t c = 0; c < k && spec.spine_segments > 0; ++c) {
    Matrix spine(d, static_cast<Eigen::Index>(spec.spine_segments) + 1);
    Vector heading(d);
    for (Eigen::Index j = 0; j < d; ++j) heading[j] = normal(rng);
    heading.normalize();
    spine.col(0).setZero();
    for (Eigen::Index t = 1; t < spine.cols(); ++t) {
      Vector turn(d);
      for (Eigen::Index j = 0; j < d; ++j) turn[j] = normal(rng);
      heading = (heading + spec.spine_bend * turn / std::sqrt(static_cast<double>(d))).normalized();
      spine.col(t) = spine.col(t - 1) + spec.spine_step * heading;
    }
    spine.colwise() -= spine.rowwise().mean() - centers[c];
    spines.push_back(std::move(spine));
  }

  const Labels labels = shuffled_labels(class_counts(spec.n_points, k, spec.class_weights), rng);
  const auto n = static_cast<Eigen::Index>(spec.n_points);
  Matrix z(d, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(j, i) = normal(rng);

  Vector radial = Vector::Ones(n);
  if (spec.kind == DatasetKind::hd_student_blobs) {
    std::chi_squared_distribution<double> chi2(spec.student_df);
    for (Eigen::Index i = 0; i < n; ++i) radial[i] = std::sqrt(spec.student_df / chi2(rng));
  }

  PointSet ps;
  ps.points.resize(n, d);
  std::uniform_real_distribution<double> along(0.0, static_cast<double>(spec.spine_segments));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    Vector base = centers[c];
    if (!spines.empty()) {
      const double t = along(rng);
      const auto seg = std::min<Eigen::Index>(static_cast<Eigen::Index>(t), spines[c].cols() - 2);
      const double frac = t - static_cast<double>(seg);
      base = spines[c].col(seg) + frac * (spines[c].col(seg + 1) - spines[c].col(seg));
    }
    ps.points.row(i) = (base + radial[i] * (factors[c] * z.col(i))).transpose();
  }
  ps.labels = labels;
  return ps;
}

}  // namespace

std::size_t PointSet::n_label_values() const {
  if (!labels) return 0;
  return std::set<int>(labels->begin(), labels->end()).size();
}

Labels PointSet::group_labels() const {
  if (!labels) throw ValidationError("point set has no labels");
  if (label_groups.empty()) return *labels;
  Labels out(labels->size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto l = static_cast<std::size_t>((*labels)[i]);
    if (l >= label_groups.size()) throw ValidationError("label outside the grouping map");
    out[i] = label_groups[l];
  }
  return out;
}

void PointSet::validate() const {
  if (points.rows() < 1 || points.cols() < 1) throw ValidationError("point set needs n >= 1 and d >= 1");
  if (!points.allFinite()) throw ValidationError("point set contains non-finite coordinates");
  if (labels) {
    if (labels->size() != size()) throw ValidationError("label count does not match the number of points");
    if (std::any_of(labels->begin(), labels->end(), [](int l) { return l < 0; }))
      throw ValidationError("labels must be nonnegative");
  }
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::noisy_circles: return "noisy_circles";
    case DatasetKind::noisy_moons: return "noisy_moons";
    case DatasetKind::varied_density: return "varied_density";
    case DatasetKind::anisotropic_blobs: return "anisotropic_blobs";
    case DatasetKind::gaussian_blobs: return "gaussian_blobs";
    case DatasetKind::hierarchical_gaussians: return "hierarchical_gaussians";
    case DatasetKind::hd_gaussian_blobs: return "hd_gaussian_blobs";
    case DatasetKind::hd_student_blobs: return "hd_student_blobs";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  for (auto kind : kAllKinds)
    if (to_string(kind) == name) return kind;
  throw ValidationError("unknown dataset kind: " + std::string(name));
}

bool is_two_dimensional(DatasetKind kind) {
  return kind != DatasetKind::hd_gaussian_blobs && kind != DatasetKind::hd_student_blobs;
}

std::size_t DatasetSpec::resolved_n_classes() const {
  if (n_classes != 0) return n_classes;
  switch (kind) {
    case DatasetKind::noisy_circles:
    case DatasetKind::noisy_moons: return 2;
    case DatasetKind::hierarchical_gaussians:
    case DatasetKind::hd_gaussian_blobs:
    case DatasetKind::hd_student_blobs: return 6;
    default: return 3;
  }
}

void DatasetSpec::validate() const {
  if (n_points == 0) throw ValidationError("dataset needs at least one point");
  const std::size_t k = resolved_n_classes();
  if (is_two_dimensional(kind)) {
    if (dimension != 2) throw ValidationError(std::string(to_string(kind)) + " is two-dimensional");
  } else if (dimension < 2) {
    throw ValidationError("hd datasets need dimension >= 2");
  }
  if ((kind == DatasetKind::noisy_moons || kind == DatasetKind::noisy_circles) && k != 2)
    throw ValidationError("moons and circles have exactly two classes");
  if (kind == DatasetKind::hierarchical_gaussians && k != 6)
    throw ValidationError("hierarchical_gaussians has exactly six classes");
  if (n_points < k) throw ValidationError("fewer points than classes");
  if (noise && *noise < 0.0) throw ValidationError("noise must be nonnegative");
  if (class_weights) {
    if (class_weights->size() != k) throw ValidationError("class_weights needs one entry per class");
    if (std::any_of(class_weights->begin(), class_weights->end(), [](double w) { return !(w > 0.0); }))
      throw ValidationError("class_weights must be positive");
  }
  if (centers) {
    if (centers->size() != k) throw ValidationError("centers needs one entry per class");
    for (const auto& c : *centers)
      if (c.size() != dimension) throw ValidationError("center dimension mismatch");
  }
  if (blob_std && std::any_of(blob_std->begin(), blob_std->end(), [](double s) { return !(s > 0.0); }))
    throw ValidationError("blob_std must be positive");
  if (!is_two_dimensional(kind)) {
    if (!(scale_min > 0.0) || scale_max < scale_min) throw ValidationError("invalid covariance scale range");
    if (!(student_df > 0.0)) throw ValidationError("student_df must be positive");
    if (spine_segments > 0 && !(spine_step > 0.0)) throw ValidationError("spine_step must be positive");
    if (!(spine_bend >= 0.0)) throw ValidationError("spine_bend must be nonnegative");
  }
}

PointSet generate(const DatasetSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  PointSet ps;
  switch (spec.kind) {
    case DatasetKind::noisy_circles: ps = circles(spec, rng); break;
    case DatasetKind::noisy_moons: ps = moons(spec, rng); break;
    case DatasetKind::hierarchical_gaussians: ps = hierarchical(spec, rng); break;
    case DatasetKind::hd_gaussian_blobs:
    case DatasetKind::hd_student_blobs: ps = hd_blobs(spec, rng); break;
    default: ps = blobs(spec, rng); break;
  }
  ps.name = std::string(to_string(spec.kind));
  if (!is_two_dimensional(spec.kind)) ps.name += "_" + std::to_string(spec.dimension) + "d";
  ps.validate();
  return ps;
}

}  // namespace tneb
