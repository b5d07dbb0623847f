#include <doctest.h>

#include <set>

#include <cmath>
#include <queue>
#include <random>

#include "properties.hpp"
#include "tneb/dataset.hpp"
#include "tneb/filtering.hpp"
#include "tneb/neb.hpp"

using namespace tneb;

namespace {

FilteredModel wrap(const MixtureModel& m) {
  FilteredModel fm;
  fm.model = m;
  for (std::size_t c = 0; c < m.n_components(); ++c) {
    fm.survivors.push_back(c);
    fm.survivor_map.push_back(static_cast<int>(c));
  }
  return fm;
}

MixtureModel symmetric_pair(double half_distance, double variance) {
  MixtureModel m;
  m.family = Family::gaussian;
  m.weights = Vector::Constant(2, 0.5);
  m.means.resize(2, 2);
  m.means << -half_distance, 0, half_distance, 0;
  m.covariances = {variance * Matrix::Identity(2, 2), variance * Matrix::Identity(2, 2)};
  return m;
}

// Maximin path value between two grid nodes over an 8-connected mesh of
// log-density values (modified Dijkstra).
double grid_maximin(const MixtureModel& m, const Vector& start, const Vector& end, int cells) {
  const Vector lo = start.cwiseMin(end).array() - 2.5;
  const Vector hi = start.cwiseMax(end).array() + 2.5;
  const MixtureDensity density(m);
  Matrix cols(2, cells * cells);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j)
      cols.col(i * cells + j) << lo[0] + (hi[0] - lo[0]) * i / (cells - 1), lo[1] + (hi[1] - lo[1]) * j / (cells - 1);
  const Vector values = density.log_density(cols);
  auto nearest = [&](const Vector& x) {
    const int i = static_cast<int>(std::lround((x[0] - lo[0]) / (hi[0] - lo[0]) * (cells - 1)));
    const int j = static_cast<int>(std::lround((x[1] - lo[1]) / (hi[1] - lo[1]) * (cells - 1)));
    return i * cells + j;
  };
  const int source = nearest(start), target = nearest(end);
  std::vector<double> best(static_cast<std::size_t>(cells * cells), -INFINITY);
  std::priority_queue<std::pair<double, int>> queue;
  best[static_cast<std::size_t>(source)] = values[source];
  queue.push({values[source], source});
  while (!queue.empty()) {
    const auto [value, node] = queue.top();
    queue.pop();
    if (value < best[static_cast<std::size_t>(node)]) continue;
    if (node == target) return value;
    const int i = node / cells, j = node % cells;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int ni = i + di, nj = j + dj;
        if ((di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= cells || nj >= cells) continue;
        const int next = ni * cells + nj;
        const double through = std::min(value, values[next]);
        if (through > best[static_cast<std::size_t>(next)]) {
          best[static_cast<std::size_t>(next)] = through;
          queue.push({through, next});
        }
      }
  }
  return -INFINITY;
}

}  // namespace

TEST_SUITE("neb") {
  TEST_CASE("symmetric pair: straight path with the saddle at the midpoint") {
    const FilteredModel fm = wrap(symmetric_pair(2.0, 1.0));
    NebConfig cfg;
    cfg.n_path_points = 1025;
    const DensityPath path = optimize_path(fm, 0, 1, cfg);
    CHECK(path.points.col(1).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(path.argmin_index == 512);
    CHECK(path.bottleneck_log_density == doctest::Approx(log_density(fm.model, Vector::Zero(2))).epsilon(1e-9));
  }

  TEST_CASE("zero step size keeps the initial line") {
    std::mt19937_64 rng(2);
    const MixtureModel m = tneb::testing::random_mixture(rng, 3, 2, Family::student_t, 3.0);
    const FilteredModel fm = wrap(m);
    NebConfig cfg;
    cfg.step_size = 0.0;
    cfg.n_steps = 1;
    cfg.n_path_points = 64;
    const DensityPath path = optimize_path(fm, 0, 2, cfg);
    const Vector a = m.means.row(0).transpose(), b = m.means.row(2).transpose();
    for (Eigen::Index j = 0; j < 64; ++j) {
      const Vector expected = a + (static_cast<double>(j) / 63.0) * (b - a);
      CHECK((path.points.row(j).transpose() - expected).norm() < 1e-12);
    }
    CHECK(path.bottleneck_log_density == doctest::Approx(straight_line_bottleneck(fm, 0, 2, 64)).epsilon(1e-12));
  }

  TEST_CASE("curved density: improvement and agreement with a grid search") {
    DatasetSpec spec;
    spec.kind = DatasetKind::noisy_moons;
    spec.n_points = 1000;
    const PointSet ps = generate(spec);
    FitConfig fit_cfg;
    fit_cfg.n_components = 15;
    const FilteredModel fm = filter_components(fit(ps, fit_cfg), ps, {});
    const NebConfig cfg;
    // Neighbouring components only: a long chord across both moons can settle in a
    // worse basin than the global grid optimum, and such pairs never reach the tree.
    const auto k = static_cast<Eigen::Index>(fm.n_components());
    std::set<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index a = 0; a < k && pairs.size() < 6; ++a) {
      Eigen::Index nearest = -1;
      double best = INFINITY;
      for (Eigen::Index b = 0; b < k; ++b) {
        const double dist = (fm.model.means.row(a) - fm.model.means.row(b)).norm();
        if (b != a && dist < best) best = dist, nearest = b;
      }
      pairs.insert({std::min(a, nearest), std::max(a, nearest)});
    }
    for (const auto& [a, b] : pairs) {
      const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      const DensityPath path = optimize_path(fm, ua, ub, cfg);
      CHECK(path.bottleneck_log_density >= straight_line_bottleneck(fm, ua, ub, cfg.n_path_points) - 1e-9);
      const double grid = grid_maximin(fm.model, fm.model.means.row(a).transpose(), fm.model.means.row(b).transpose(), 220);
      INFO("pair " << a << "-" << b << ": neb " << path.bottleneck_log_density << ", grid " << grid);
      // relative agreement, with an absolute floor for log-densities near zero
      CHECK(std::abs(path.bottleneck_log_density - grid) <= 0.05 * std::max(std::abs(grid), 1.0));
    }
  }

  TEST_CASE("straight line bottleneck examples") {
    // Broad unimodal pair: the chord minimum sits at an endpoint.
    const FilteredModel wide = wrap(symmetric_pair(1.0, 100.0));
    CHECK(straight_line_bottleneck(wide, 0, 1, 101) == doctest::Approx(log_density(wide.model, wide.model.means.row(1).transpose())).epsilon(1e-12));
    // Two samples: the smaller endpoint.
    std::mt19937_64 rng(5);
    const FilteredModel random = wrap(tneb::testing::random_mixture(rng, 3, 2, Family::gaussian, 3.0));
    const double ends = std::min(log_density(random.model, random.model.means.row(0).transpose()),
                                 log_density(random.model, random.model.means.row(1).transpose()));
    CHECK(straight_line_bottleneck(random, 0, 1, 2) == ends);
    // Separated symmetric pair: the midpoint.
    const FilteredModel pair = wrap(symmetric_pair(2.0, 1.0));
    CHECK(straight_line_bottleneck(pair, 0, 1, 101) == doctest::Approx(log_density(pair.model, Vector::Zero(2))).epsilon(1e-12));
    CHECK_THROWS_AS(straight_line_bottleneck(pair, 1, 1, 10), ValidationError);
  }

  TEST_CASE("improvement over the straight line on random mixtures") {
    const auto r = tneb::testing::neb_improvement_property(100, 3);
    INFO(r.detail);
    CHECK(r.ok);
  }

  TEST_CASE("respacing is uniform in arc length") {
    const auto r = tneb::testing::respacing_property(200, 4);
    INFO(r.detail);
    INFO("worst " << r.worst);
    CHECK(r.ok);
  }

  TEST_CASE("reversing the endpoints reverses the path") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
      const FilteredModel fm = wrap(tneb::testing::random_mixture(rng, 4, trial % 2 ? 8 : 2, Family::student_t, 3.0));
      NebConfig cfg;
      cfg.n_path_points = 128;
      const DensityPath ab = optimize_path(fm, 1, 3, cfg);
      const DensityPath ba = optimize_path(fm, 3, 1, cfg);
      CHECK(std::abs(ab.bottleneck_log_density - ba.bottleneck_log_density) <= 1e-9);
      CHECK(ba.a == 3);
      CHECK(ba.points.row(0) == fm.model.means.row(3));
      CHECK(ab.points.colwise().reverse() == ba.points);
    }
  }

  TEST_CASE("paths are deterministic") {
    std::mt19937_64 rng(7);
    const FilteredModel fm = wrap(tneb::testing::random_mixture(rng, 5, 3, Family::gaussian, 3.0));
    const DensityPath a = optimize_path(fm, 0, 4, {});
    const DensityPath b = optimize_path(fm, 0, 4, {});
    CHECK(a.points == b.points);
    CHECK(a.log_densities == b.log_densities);
  }

  TEST_CASE("keep_best never ends below the final path") {
    std::mt19937_64 rng(8);
    const FilteredModel fm = wrap(tneb::testing::random_mixture(rng, 5, 2, Family::student_t, 3.0));
    NebConfig cfg;
    cfg.n_path_points = 200;
    const DensityPath best = optimize_path(fm, 0, 1, cfg);
    cfg.keep_best = false;
    const DensityPath last = optimize_path(fm, 0, 1, cfg);
    CHECK(best.bottleneck_log_density >= last.bottleneck_log_density);
    CHECK(last.best_step == cfg.n_steps);
  }

  TEST_CASE("invalid configurations") {
    const FilteredModel fm = wrap(symmetric_pair(2.0, 1.0));
    NebConfig cfg;
    cfg.n_path_points = 2;
    CHECK_THROWS_AS(optimize_path(fm, 0, 1, cfg), ValidationError);
    cfg = {};
    cfg.n_steps = 0;
    CHECK_THROWS_AS(optimize_path(fm, 0, 1, cfg), ValidationError);
    CHECK_THROWS_AS(optimize_path(fm, 0, 0, {}), ValidationError);
    CHECK_THROWS_AS(optimize_path(fm, 0, 5, {}), ValidationError);
  }
}
