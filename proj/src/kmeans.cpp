#include "tneb/kmeans.hpp"

#include <limits>
#include <random>

namespace tneb {

namespace {

// Squared distances from every point (rows) to every center (rows): n x K.
Matrix squared_distances(const Matrix& points, const Matrix& centers) {
  Matrix d2 = -2.0 * points * centers.transpose();
  d2.colwise() += points.rowwise().squaredNorm();
  d2.rowwise() += centers.rowwise().squaredNorm().transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  const auto n = points.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  if (k == 0 || kk > n) throw ValidationError("k-means needs 1 <= k <= n");

  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centers.resize(kk, points.cols());

  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  result.centers.row(0) = points.row(pick(rng));
  Vector closest = (points.rowwise() - result.centers.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index c = 1; c < kk; ++c) {
    const double total = closest.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= closest[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    result.centers.row(c) = points.row(chosen);
    closest = closest.cwiseMin((points.rowwise() - result.centers.row(c)).rowwise().squaredNorm());
  }

  result.labels.assign(static_cast<std::size_t>(n), -1);
  Vector best(n);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iter, 1); ++iter) {
    const Matrix d2 = squared_distances(points, result.centers);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index arg = 0;
      best[i] = d2.row(i).minCoeff(&arg);
      if (result.labels[static_cast<std::size_t>(i)] != static_cast<int>(arg)) {
        result.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(kk, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = result.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        result.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        Eigen::Index far = 0;
        best.maxCoeff(&far);
        result.centers.row(c) = points.row(far);
        best[far] = 0.0;
      }
    }
  }
  const Matrix d2 = squared_distances(points, result.centers);
  result.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    result.inertia += d2.row(i).minCoeff(&arg);
    result.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return result;
}

}  // namespace tneb
