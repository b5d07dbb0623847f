#include <doctest.h>

#include "tneb/config.hpp"
#include "tneb/hash.hpp"

using namespace tneb;

TEST_SUITE("config") {
  TEST_CASE("defaults follow the data dimension") {
    RunConfig cfg = run_config_from_json({{"dataset", {{"kind", "noisy_moons"}}}});
    CHECK(cfg.auto_components);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{0});
    PointSet flat;
    flat.points = Matrix::Zero(30, 2);
    cfg.resolve_for(flat);
    CHECK(cfg.pipeline.fit.n_components == 15);

    RunConfig high = run_config_from_json({{"dataset", {{"kind", "hd_student_blobs"}}}});
    CHECK(high.dataset->dimension == 8);
    PointSet wide;
    wide.points = Matrix::Zero(30, 8);
    high.resolve_for(wide);
    CHECK(high.pipeline.fit.n_components == 25);

    RunConfig fixed = run_config_from_json({{"dataset", {{"kind", "noisy_moons"}}}, {"n_components", 9}});
    fixed.resolve_for(wide);
    CHECK(fixed.pipeline.fit.n_components == 9);
  }

  TEST_CASE("pipeline keys sit at the top level") {
    const RunConfig cfg = run_config_from_json({{"input", "points.csv"},
                                                {"family", "gaussian"},
                                                {"min_points", 4},
                                                {"n_path_points", 64},
                                                {"strategy", "dip"},
                                                {"recompute_centers", false},
                                                {"seeds", {3, 4}},
                                                {"k_target", 5},
                                                {"stability", "components"}});
    CHECK(cfg.pipeline.fit.family == Family::gaussian);
    CHECK(cfg.pipeline.filter.min_points == 4);
    CHECK(cfg.pipeline.neb.n_path_points == 64);
    CHECK(cfg.strategy.kind == StrategyKind::dip);
    CHECK_FALSE(cfg.strategy.recompute_centers);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(cfg.k_target == 5);
    CHECK(cfg.stability == StabilityMode::components);
  }

  TEST_CASE("resolved config re-reads to itself") {
    const RunConfig cfg = run_config_from_json({{"dataset", {{"kind", "gaussian_blobs"}, {"seed", 4}}}, {"knn", 6}});
    const auto j = to_json(cfg);
    CHECK(to_json(run_config_from_json(j)) == j);
  }

  TEST_CASE("invalid configurations") {
    CHECK_THROWS_AS(run_config_from_json({{"input", "a.csv"}, {"colour", "red"}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json::object()), ValidationError);
    CHECK_THROWS_AS(run_config_from_json({{"input", "a.csv"}, {"dataset", {{"kind", "noisy_moons"}}}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json({{"input", "a.csv"}, {"family", "cauchy"}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json({{"input", "a.csv"}, {"n_steps", "many"}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json({{"input", "a.csv"}, {"stability", "both"}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json({{"input", "a.csv"}, {"k_target", 0}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json({{"input", "a.csv"}, {"strategy", "neb"}, {"backend", "kmeans"}}),
                    ValidationError);
    CHECK_THROWS_AS(read_json_file("/nonexistent/config.json"), IoError);
  }

  TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }
}
