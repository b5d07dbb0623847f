#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "tneb/dip.hpp"
#include "tneb/hierarchy.hpp"
#include "tneb/metrics.hpp"
#include "tneb/neb.hpp"

namespace tneb::testing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string describe(const char* what, std::size_t trial, double value) {
  std::ostringstream out;
  out << what << " (trial " << trial << ", value " << value << ")";
  return out.str();
}

PointSet sample_from(std::mt19937_64& rng, const MixtureModel& m, std::size_t n) {
  std::discrete_distribution<std::size_t> pick(m.weights.data(), m.weights.data() + m.weights.size());
  std::normal_distribution<double> normal;
  PointSet ps;
  ps.points.resize(static_cast<Eigen::Index>(n), m.means.cols());
  std::vector<Matrix> factors;
  for (const auto& c : m.covariances) factors.push_back(Eigen::LLT<Matrix>(c).matrixL());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pick(rng);
    Vector z(m.means.cols());
    for (auto& v : z) v = normal(rng);
    ps.points.row(static_cast<Eigen::Index>(i)) = m.means.row(static_cast<Eigen::Index>(c)) + (factors[c] * z).transpose();
  }
  return ps;
}

Vector random_point(std::mt19937_64& rng, Eigen::Index d, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Vector x(d);
  for (auto& v : x) v = u(rng);
  return x;
}

// Edges of a random graph on n nodes; with `connected` a random spanning tree
// is laid down first.
std::vector<WeightedEdge> random_edges(std::mt19937_64& rng, std::size_t n, double density, bool connected,
                                       bool integer_weights) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 3.0);
  auto weight = [&] { return integer_weights ? std::floor(u(rng) * 5.0) : normal(rng); };
  std::set<std::pair<std::size_t, std::size_t>> present;
  std::vector<WeightedEdge> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    if (a == b || !present.insert({a, b}).second) return;
    edges.push_back({a, b, weight()});
  };
  if (connected)
    for (std::size_t v = 1; v < n; ++v) add(uniform_index(rng, 0, v - 1), v);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (u(rng) < density) add(a, b);
  return edges;
}

Matrix random_centers(std::mt19937_64& rng, std::size_t n) {
  Matrix centers(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) centers.row(static_cast<Eigen::Index>(i)) = random_point(rng, 2, 10.0).transpose();
  return centers;
}

std::vector<std::vector<std::size_t>> merged_leaf_sets(const Dendrogram& d) {
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t l = 0; l < d.n_leaves(); ++l) members.push_back({l});
  std::vector<std::vector<std::size_t>> out;
  for (const Merge& m : d.merges) {
    std::vector<std::size_t> joined = members[m.left];
    joined.insert(joined.end(), members[m.right].begin(), members[m.right].end());
    std::sort(joined.begin(), joined.end());
    members.push_back(joined);
    out.push_back(std::move(joined));
  }
  return out;
}

}  // namespace

Matrix random_spd(std::mt19937_64& rng, Eigen::Index d, double lo, double hi) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> eig(lo, hi);
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector s(d);
  for (auto& v : s) v = eig(rng);
  Matrix c = q * s.asDiagonal() * q.transpose();
  return 0.5 * (c + c.transpose());
}

MixtureModel random_mixture(std::mt19937_64& rng, std::size_t k, Eigen::Index d, Family family, double spread) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  MixtureModel m;
  m.family = family;
  m.df = family == Family::student_t ? std::array{1.0, 3.0, 10.0}[uniform_index(rng, 0, 2)] : 1.0;
  m.weights.resize(static_cast<Eigen::Index>(k));
  for (auto& w : m.weights) w = u(rng);
  m.weights /= m.weights.sum();
  m.means.resize(static_cast<Eigen::Index>(k), d);
  for (std::size_t c = 0; c < k; ++c) {
    m.means.row(static_cast<Eigen::Index>(c)) = random_point(rng, d, spread).transpose();
    m.covariances.push_back(random_spd(rng, d, 0.3, 2.0));
  }
  return m;
}

PropertyResult gradient_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.5);
  PropertyResult r;
  const std::array<Eigen::Index, 5> dims{1, 2, 3, 5, 8};
  for (std::size_t t = 0; t < trials; ++t) {
    const Family family = t % 2 ? Family::gaussian : Family::student_t;
    const Eigen::Index d = dims[uniform_index(rng, 0, dims.size() - 1)];
    const MixtureModel m = random_mixture(rng, uniform_index(rng, 1, 5), d, family, 3.0);
    Vector x = m.means.row(static_cast<Eigen::Index>(uniform_index(rng, 0, m.n_components() - 1))).transpose();
    for (auto& v : x) v += normal(rng);
    const Vector g = log_density_gradient(m, x);
    const double h = 1e-5 * std::max(1.0, x.norm());
    Vector fd(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      Vector up = x, down = x;
      up[j] += h;
      down[j] -= h;
      fd[j] = (log_density(m, up) - log_density(m, down)) / (2.0 * h);
    }
    const double err = (g - fd).norm() / std::max(g.norm(), 1e-3);
    r.worst = std::max(r.worst, err);
    ++r.trials;
    if (!(err < 1e-5)) r.fail(describe("gradient mismatch", t, err));
  }
  return r;
}

PropertyResult em_monotonicity_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (std::size_t t = 0; t < trials; ++t) {
    const Family family = t % 2 ? Family::gaussian : Family::student_t;
    const Eigen::Index d = static_cast<Eigen::Index>(uniform_index(rng, 1, 4));
    const MixtureModel truth = random_mixture(rng, uniform_index(rng, 1, 4), d, Family::gaussian, 4.0);
    const PointSet ps = sample_from(rng, truth, 300);
    FitConfig cfg;
    cfg.family = family;
    cfg.n_components = uniform_index(rng, 1, 5);
    cfg.max_em_steps = 200;
    cfg.seed = rng();
    const MixtureModel m = fit(ps, cfg);
    const auto& trace = m.fit_meta.loglik_trace;
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const double drop = (trace[i - 1] - trace[i]) / std::max(1.0, std::abs(trace[i - 1]));
      r.worst = std::max(r.worst, drop);
      if (drop > 1e-8) {
        r.fail(describe("log-likelihood decreased", t, drop));
        break;
      }
    }
    ++r.trials;
  }
  return r;
}

Matrix brute_force_widest_paths(std::size_t n, const std::vector<WeightedEdge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : edges) {
    adj[e.a].push_back({e.b, e.weight});
    adj[e.b].push_back({e.a, e.weight});
  }
  const auto sn = static_cast<Eigen::Index>(n);
  Matrix best = Matrix::Constant(sn, sn, -kInf);
  std::vector<char> on_path(n, 0);
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t source, std::size_t v, double bottleneck) {
    auto& cell = best(static_cast<Eigen::Index>(source), static_cast<Eigen::Index>(v));
    cell = std::max(cell, bottleneck);
    on_path[v] = 1;
    for (const auto& [w, weight] : adj[v])
      if (!on_path[w]) walk(source, w, std::min(bottleneck, weight));
    on_path[v] = 0;
  };
  for (std::size_t s = 0; s < n; ++s) walk(s, s, kInf);
  for (Eigen::Index i = 0; i < sn; ++i) best(i, i) = kInf;
  return best;
}

PropertyResult widest_path_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = uniform_index(rng, 1, 10);
    const auto edges = random_edges(rng, n, 0.45, false, t % 3 == 0);
    const auto tree = widest_path_tree(n, edges);
    const Matrix tree_matrix = tree_bottleneck_matrix(n, edges, tree);
    const Matrix oracle = brute_force_widest_paths(n, edges);
    ++r.trials;
    if (tree.size() > (n == 0 ? 0 : n - 1)) r.fail(describe("tree has too many edges", t, static_cast<double>(tree.size())));
    for (Eigen::Index i = 0; i < oracle.rows(); ++i)
      for (Eigen::Index j = 0; j < oracle.cols(); ++j)
        if (tree_matrix(i, j) != oracle(i, j) || tree_matrix(i, j) != tree_matrix(j, i))
          r.fail(describe("tree bottleneck differs from widest path", t, tree_matrix(i, j)));
  }
  return r;
}

std::vector<NaiveMerge> naive_single_linkage(const Matrix& similarity) {
  const auto n = static_cast<std::size_t>(similarity.rows());
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  std::vector<NaiveMerge> out;
  while (clusters.size() > 1) {
    double best = -kInf;
    std::size_t bi = 0, bj = 1;
    bool found = false;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double link = -kInf;
        for (std::size_t a : clusters[i])
          for (std::size_t b : clusters[j])
            link = std::max(link, similarity(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        if (!found || link > best) {
          best = link;
          bi = i;
          bj = j;
          found = true;
        }
      }
    std::vector<std::size_t> joined = clusters[bi];
    joined.insert(joined.end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(joined.begin(), joined.end());
    out.push_back({joined, best});
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    clusters[bi] = std::move(joined);
  }
  return out;
}

PropertyResult single_linkage_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = uniform_index(rng, 1, 12);
    // Alternate complete graphs with sparse connected ones; weights distinct.
    const auto edges = random_edges(rng, n, t % 2 ? 1.0 : 0.3, true, false);
    const auto sn = static_cast<Eigen::Index>(n);
    Matrix similarity = Matrix::Constant(sn, sn, -kInf);
    for (const auto& e : edges) {
      similarity(static_cast<Eigen::Index>(e.a), static_cast<Eigen::Index>(e.b)) = e.weight;
      similarity(static_cast<Eigen::Index>(e.b), static_cast<Eigen::Index>(e.a)) = e.weight;
    }
    const Dendrogram d = build_dendrogram(graph_from_edges(random_centers(rng, n), edges));
    const auto naive = naive_single_linkage(similarity);
    const auto sets = merged_leaf_sets(d);
    ++r.trials;
    if (sets.size() != naive.size()) {
      r.fail(describe("merge count differs", t, static_cast<double>(sets.size())));
      continue;
    }
    for (std::size_t s = 0; s < sets.size(); ++s) {
      if (sets[s] != naive[s].leaves) r.fail(describe("merge differs from single linkage at step", t, static_cast<double>(s)));
      if (d.merges[s].bottleneck_log_density != naive[s].similarity || d.merges[s].cross_component)
        r.fail(describe("merge height differs at step", t, static_cast<double>(s)));
    }
  }
  return r;
}

PropertyResult nesting_and_transform_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = uniform_index(rng, 1, 15);
    const auto edges = random_edges(rng, n, 0.3, t % 2 == 0, t % 4 == 1);
    const Matrix centers = random_centers(rng, n);
    auto transformed = edges;
    for (auto& e : transformed) e.weight = std::exp(e.weight / 4.0) * 3.0 - 7.0;
    const Dendrogram d = build_dendrogram(graph_from_edges(centers, edges));
    const Dendrogram dt = build_dendrogram(graph_from_edges(centers, transformed));
    ++r.trials;
    for (std::size_t s = 0; s < d.merges.size(); ++s) {
      const Merge& a = d.merges[s];
      const Merge& b = dt.merges[s];
      if (a.left != b.left || a.right != b.right || a.cross_component != b.cross_component)
        r.fail(describe("transform changed the merge at step", t, static_cast<double>(s)));
    }
    Labels coarser = cut_components(d, 1);
    for (std::size_t k = 1; k <= n; ++k) {
      const Labels finer = cut_components(d, k);
      if (finer != cut_components(dt, k)) r.fail(describe("transform changed the cut at k", t, static_cast<double>(k)));
      std::set<int> distinct(finer.begin(), finer.end());
      if (distinct.size() != k) r.fail(describe("cut has the wrong cluster count at k", t, static_cast<double>(k)));
      // Every cluster at k lies inside one cluster at k - 1.
      std::map<int, int> parent;
      for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const auto [it, inserted] = parent.emplace(finer[leaf], coarser[leaf]);
        if (!inserted && it->second != coarser[leaf]) r.fail(describe("cuts are not nested at k", t, static_cast<double>(k)));
      }
      coarser = finer;
    }
  }
  return r;
}

double pair_counting_ari(const Labels& a, const Labels& b) {
  double both = 0, only_a = 0, only_b = 0, neither = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      if (sa && sb)
        ++both;
      else if (sa)
        ++only_a;
      else if (sb)
        ++only_b;
      else
        ++neither;
    }
  const double den = (neither + only_a) * (only_a + both) + (neither + only_b) * (only_b + both);
  if (den == 0.0) return 1.0;
  return 2.0 * (neither * both - only_a * only_b) / den;
}

PropertyResult ari_pair_counting_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = uniform_index(rng, 2, 200);
    const int ka = static_cast<int>(uniform_index(rng, 1, 6));
    const int kb = static_cast<int>(uniform_index(rng, 1, 6));
    Labels a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::uniform_int_distribution<int>(0, ka - 1)(rng);
      // Correlate b with a in half of the trials.
      b[i] = t % 2 && std::uniform_real_distribution<double>()(rng) < 0.7 ? a[i] % kb
                                                                          : std::uniform_int_distribution<int>(0, kb - 1)(rng);
    }
    const double err = std::abs(ari(a, b) - pair_counting_ari(a, b));
    r.worst = std::max(r.worst, err);
    ++r.trials;
    if (!(err <= 1e-12)) r.fail(describe("ari differs from pair counting", t, err));
  }
  return r;
}

PropertyResult dip_reference_property(const std::string& reference_csv) {
  PropertyResult r;
  std::ifstream in(reference_csv);
  if (!in) {
    r.fail("cannot open " + reference_csv);
    return r;
  }
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::istringstream sample(line.substr(0, comma));
    std::vector<double> values;
    for (double v; sample >> v;) values.push_back(v);
    const double expected = std::stod(line.substr(comma + 1));
    const double err = std::abs(dip_statistic(values) - expected);
    r.worst = std::max(r.worst, err);
    if (!(err <= 1e-9)) r.fail("dip differs from the reference for sample " + line.substr(0, comma));
    ++r.trials;
  }
  if (r.trials == 0) r.fail("reference file is empty");
  return r;
}

PropertyResult neb_improvement_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  const NebConfig cfg;
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::Index d = t % 2 ? 8 : 2;
    const Family family = (t / 2) % 2 ? Family::gaussian : Family::student_t;
    const MixtureModel m = random_mixture(rng, uniform_index(rng, 2, 5), d, family, 3.0);
    const MixtureDensity density(m);
    const std::size_t a = uniform_index(rng, 0, m.n_components() - 1);
    std::size_t b = uniform_index(rng, 0, m.n_components() - 2);
    if (b >= a) ++b;
    const DensityPath path = optimize_component_path(density, m.means, a, b, cfg);

    Matrix line(d, static_cast<Eigen::Index>(cfg.n_path_points));
    const Vector start = m.means.row(static_cast<Eigen::Index>(a)).transpose();
    const Vector end = m.means.row(static_cast<Eigen::Index>(b)).transpose();
    for (Eigen::Index j = 0; j < line.cols(); ++j)
      line.col(j) = start + (static_cast<double>(j) / static_cast<double>(line.cols() - 1)) * (end - start);
    const double straight = density.log_density(line).minCoeff();
    const double deficit = straight - path.bottleneck_log_density;
    r.worst = std::max(r.worst, deficit);
    ++r.trials;
    if (deficit > 1e-9) r.fail(describe("optimised path ends below the straight line", t, deficit));
    if (path.points.row(0).transpose() != start || path.points.row(path.points.rows() - 1).transpose() != end)
      r.fail(describe("endpoints moved", t, 0.0));
    if (path.log_densities.minCoeff() != path.bottleneck_log_density ||
        path.log_densities[static_cast<Eigen::Index>(path.argmin_index)] != path.bottleneck_log_density)
      r.fail(describe("bottleneck and argmin disagree with the path", t, path.bottleneck_log_density));
  }
  return r;
}

PropertyResult respacing_property(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  PropertyResult r;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto d = static_cast<Eigen::Index>(uniform_index(rng, 1, 8));
    const auto p = static_cast<Eigen::Index>(uniform_index(rng, 3, 200));
    Matrix cols(d, p);
    cols.col(0) = Vector::Zero(d);
    for (Eigen::Index j = 1; j < p; ++j) {
      Vector step(d);
      for (auto& v : step) v = normal(rng);
      step(0) = std::abs(step(0)) + 0.1;  // monotone first coordinate, so the walk never revisits a point
      // Occasionally repeat a point to exercise zero-length segments.
      cols.col(j) = cols.col(j - 1) + (uniform_index(rng, 0, 9) == 0 ? Vector::Zero(d) : step);
    }
    std::vector<double> cumulative(static_cast<std::size_t>(p), 0.0);
    for (Eigen::Index j = 1; j < p; ++j)
      cumulative[static_cast<std::size_t>(j)] = cumulative[static_cast<std::size_t>(j - 1)] + (cols.col(j) - cols.col(j - 1)).norm();
    const double total = cumulative.back();
    const Matrix out = respace_uniform(cols);
    ++r.trials;
    if (out.col(0) != cols.col(0) || out.col(p - 1) != cols.col(p - 1)) r.fail(describe("respacing moved an endpoint", t, 0.0));

    // Arc-length position of every output point on the input polyline.
    std::size_t seg = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const Vector x = out.col(j);
      double position = -1.0;
      for (; seg + 1 < static_cast<std::size_t>(p); ++seg) {
        const Vector from = cols.col(static_cast<Eigen::Index>(seg));
        const Vector dir = cols.col(static_cast<Eigen::Index>(seg) + 1) - from;
        const double len = dir.norm();
        const double along = len > 0.0 ? std::clamp((x - from).dot(dir) / (len * len), 0.0, 1.0) : 0.0;
        if ((from + along * dir - x).norm() <= 1e-10 * std::max(1.0, total)) {
          position = cumulative[seg] + along * len;
          break;
        }
      }
      const double target = total * static_cast<double>(j) / static_cast<double>(p - 1);
      const double err = std::abs(position - target) / total;
      r.worst = std::max(r.worst, err);
      if (!(err <= 1e-9)) {
        r.fail(describe("respaced point off its arc-length target", t, err));
        break;
      }
    }
  }
  return r;
}

}  // namespace tneb::testing
