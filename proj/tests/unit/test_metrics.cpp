#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <set>

#include "properties.hpp"
#include "tneb/metrics.hpp"

using namespace tneb;

TEST_SUITE("metrics") {
  TEST_CASE("ari basics") {
    const Labels a{0, 0, 1, 1, 2, 2};
    CHECK(ari(a, a) == 1.0);
    CHECK(ari(a, Labels{7, 7, 3, 3, 5, 5}) == 1.0);
    CHECK(ari(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == -0.5);
    CHECK(ari(Labels(5, 0), Labels(5, 3)) == 1.0);
    CHECK_THROWS_AS(ari(Labels{0, 1}, Labels{0}), ValidationError);
    CHECK_THROWS_AS(ari(Labels{0}, Labels{0}), ValidationError);
  }

  TEST_CASE("ari is symmetric and relabelling invariant") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> label(0, 4);
    for (int trial = 0; trial < 100; ++trial) {
      Labels a(60), b(60);
      for (auto& v : a) v = label(rng);
      for (auto& v : b) v = label(rng);
      CHECK(ari(a, b) == ari(b, a));
      Labels renamed = a;
      for (auto& v : renamed) v = 10 - 3 * v;
      CHECK(ari(renamed, b) == ari(a, b));
      if (std::set<int>(a.begin(), a.end()).size() > 1) CHECK(ari(a, a) == 1.0);
    }
  }

  TEST_CASE("ari matches pair counting") {
    const auto r = tneb::testing::ari_pair_counting_property(100, 42);
    INFO(r.detail);
    CHECK(r.ok);
    CHECK(r.trials == 100);
  }

  TEST_CASE("mean and unbiased std") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const MeanStd s = mean_std(v);
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    const std::vector<double> one{0.7};
    CHECK(mean_std(one).std == 0.0);
  }

  TEST_CASE("constant runner gives an all-ones matrix") {
    const StabilityRunner run = [](std::uint64_t) { return Labels{0, 0, 1, 1, 2}; };
    const std::vector<std::uint64_t> seeds{0, 1, 2, 3};
    const StabilityReport r = seed_stability(run, seeds, 2, "abc");
    CHECK(r.pairwise_ari == Matrix::Ones(4, 4));
    CHECK(r.mean == 1.0);
    CHECK(r.min == 1.0);
    CHECK(r.std == 0.0);
    CHECK(r.fingerprint == "abc");
    CHECK(r.parameter_name == "seed");
  }

  TEST_CASE("two runs give one informative value") {
    const StabilityRunner run = [](std::uint64_t s) { return s == 0 ? Labels{0, 0, 1, 1} : Labels{0, 1, 0, 1}; };
    const std::vector<std::uint64_t> seeds{0, 1};
    const StabilityReport r = seed_stability(run, seeds);
    CHECK(r.pairwise_ari.rows() == 2);
    CHECK(r.pairwise_ari(0, 1) == -0.5);
    CHECK(r.pairwise_ari(1, 0) == -0.5);
    CHECK(r.pairwise_ari(0, 0) == 1.0);
    CHECK(r.mean == -0.5);
    CHECK(r.min == -0.5);
  }

  TEST_CASE("failed runs are excluded with a warning") {
    const StabilityRunner run = [](std::uint64_t s) -> Labels {
      if (s == 2) throw FitError("no convergence", {"retry exhausted"});
      return Labels{0, 0, 1, 1};
    };
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const StabilityReport r = seed_stability(run, seeds);
    CHECK(r.runs.size() == 2);
    CHECK(r.pairwise_ari.rows() == 2);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("2") != std::string::npos);
  }

  TEST_CASE("single run is trivial") {
    const StabilityRunner run = [](std::uint64_t) { return Labels{0, 1}; };
    const std::vector<std::size_t> counts{20};
    const StabilityReport r = overcluster_stability(run, counts);
    CHECK(r.pairwise_ari.rows() == 1);
    CHECK(r.parameter_name == "n_components");
  }

  TEST_CASE("summary recomputes from the matrix") {
    std::mt19937_64 rng(43);
    std::vector<StabilityRun> runs;
    for (std::uint64_t s = 0; s < 5; ++s) {
      Labels l(40);
      for (auto& v : l) v = std::uniform_int_distribution<int>(0, 2)(rng);
      runs.push_back({s, l});
    }
    const StabilityReport r = stability_report(runs, "seed", "");
    std::vector<double> off;
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 5; ++j) {
        CHECK(r.pairwise_ari(i, j) == r.pairwise_ari(j, i));
        if (i < j) off.push_back(r.pairwise_ari(i, j));
      }
    CHECK(r.mean == doctest::Approx(mean_std(off).mean).epsilon(1e-12));
    CHECK(r.std == doctest::Approx(mean_std(off).std).epsilon(1e-12));
    CHECK(r.min == *std::min_element(off.begin(), off.end()));
  }

  TEST_CASE("overclustering sweep") {
    CHECK(overcluster_sweep(6) == std::vector<std::size_t>{16, 21, 26, 31, 36, 41, 46, 51});
    CHECK(overcluster_sweep(3, 2, 2) == std::vector<std::size_t>{13});
  }

  TEST_CASE("report exports") {
    const StabilityRunner run = [](std::uint64_t s) { return s ? Labels{0, 0, 1, 1} : Labels{0, 0, 1, 2}; };
    const std::vector<std::uint64_t> seeds{0, 1};
    const StabilityReport r = seed_stability(run, seeds);
    const auto j = to_json(r);
    CHECK(j.at("pairwise_ari").size() == 2);
    const std::string summary = summary_csv("toy", 2, r);
    CHECK(summary.rfind("dataset,dim,mean,std,min\ntoy,2,", 0) == 0);
    CHECK(matrix_csv(r).find('\n') != std::string::npos);
  }
}
