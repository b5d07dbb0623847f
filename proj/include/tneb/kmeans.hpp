#pragma once

#include "tneb/common.hpp"

namespace tneb {

struct KMeansResult {
  Matrix centers;  // K x d
  Labels labels;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

// k-means++ seeding followed by at most max_iter Lloyd iterations. Empty
// clusters are re-seeded at the point farthest from its current center.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 50);

}  // namespace tneb
