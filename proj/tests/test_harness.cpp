#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cotrain/harness.hpp"
#include "cotrain/presets.hpp"
#include "cotrain/serialize.hpp"

using namespace cotrain;
namespace fs = std::filesystem;

namespace {

// Desk-scale configs shrunk to seconds for unit testing.
ExperimentConfig tiny_experiment(Protocol protocol) {
    ExperimentConfig cfg = preset_experiment(protocol);
    cfg.n_real_demos = 4;
    cfg.n_dc_demos = 12;
    cfg.n_prior_demos = 8;
    cfg.n_source_demos = 3;
    cfg.eval_episodes = 6;
    cfg.seeds = {1, 2};
    cfg.train.steps = 40;
    cfg.train.batch_size = 8;
    cfg.alpha_grid = {0.0, 0.9};
    cfg.real_count_grid = {2, 4};
    cfg.sim_count_grid = {4, 12};
    return cfg;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("mix table produces one row per condition and seed") {
    const ExperimentConfig cfg = tiny_experiment(Protocol::MixTable);
    const ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.rows.size() == 8);  // 4 conditions x 2 seeds
    CHECK(!result.any_diverged);
    for (const ResultRow& r : result.rows) {
        CHECK(r.score >= 0.0);
        CHECK(r.score <= 1.0);
        CHECK(r.checkpoint_used > 0);
        CHECK(r.protocol == "mix_table");
    }
}

TEST_CASE("experiment reruns are byte-identical and thread-count independent") {
    const ExperimentConfig cfg = tiny_experiment(Protocol::MixTable);

    setenv("COTRAIN_THREADS", "1", 1);
    const std::string csv1 = results_csv(run_experiment(cfg).rows);
    setenv("COTRAIN_THREADS", "2", 1);
    const std::string csv2 = results_csv(run_experiment(cfg).rows);
    unsetenv("COTRAIN_THREADS");
    CHECK(csv1 == csv2);
    CHECK(!csv1.empty());
}

TEST_CASE("an empty sim pool degenerates co-training to the real row") {
    ExperimentConfig cfg = tiny_experiment(Protocol::MixTable);
    cfg.n_dc_demos = 0;
    cfg.n_prior_demos = 0;
    cfg.seeds = {5};
    const ExperimentResult result = run_experiment(cfg);
    double real_score = -1.0, dc_score = -2.0, all_score = -3.0;
    for (const ResultRow& r : result.rows) {
        if (r.condition == "real") real_score = r.score;
        if (r.condition == "real+dc") dc_score = r.score;
        if (r.condition == "real+dc+prior") all_score = r.score;
    }
    CHECK(real_score == dc_score);
    CHECK(real_score == all_score);
}

TEST_CASE("ratio sweep emits |grid| x |seeds| rows and alpha=0 matches real-only") {
    ExperimentConfig cfg = tiny_experiment(Protocol::RatioSweep);
    const ExperimentResult result = run_experiment(cfg);
    CHECK(result.rows.size() == cfg.alpha_grid.size() * cfg.seeds.size());

    // alpha=0 rows equal a mix-table real row under the same seeds.
    ExperimentConfig mix_cfg = tiny_experiment(Protocol::MixTable);
    const ExperimentResult mix = run_experiment(mix_cfg);
    for (uint64_t seed : cfg.seeds) {
        double sweep_score = -1.0, real_score = -2.0;
        for (const ResultRow& r : result.rows) {
            if (r.condition == "alpha=0" && r.seed == seed) sweep_score = r.score;
        }
        for (const ResultRow& r : mix.rows) {
            if (r.condition == "real" && r.seed == seed) real_score = r.score;
        }
        CHECK(sweep_score == real_score);
    }
}

TEST_CASE("real scaling pairs real-only and co-trained rows per count") {
    ExperimentConfig cfg = tiny_experiment(Protocol::RealScaling);
    cfg.seeds = {1};
    const ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.rows.size() == cfg.real_count_grid.size() * 2);
    int pairs = 0;
    for (int n : cfg.real_count_grid) {
        const std::string suffix = "/n=" + std::to_string(n);
        bool has_real = false, has_cotrain = false;
        for (const ResultRow& r : result.rows) {
            if (r.condition == "real_only" + suffix) has_real = true;
            if (r.condition == "cotrain" + suffix) has_cotrain = true;
        }
        if (has_real && has_cotrain) ++pairs;
    }
    CHECK(pairs == static_cast<int>(cfg.real_count_grid.size()));
}

TEST_CASE("camera ablation and unseen protocols emit their condition sets") {
    const ExperimentResult cam =
        run_experiment(tiny_experiment(Protocol::CameraAblation));
    CHECK(cam.rows.size() == 6);  // 3 conditions x 2 seeds

    const ExperimentResult pos =
        run_experiment(tiny_experiment(Protocol::UnseenPositions));
    CHECK(pos.rows.size() == 6);

    const ExperimentResult obj =
        run_experiment(tiny_experiment(Protocol::UnseenObjects));
    CHECK(obj.rows.size() == 8);
}

TEST_CASE("emit_results writes byte-stable csv and summary") {
    const ExperimentConfig cfg = tiny_experiment(Protocol::SimQuantity);
    const ExperimentResult result = run_experiment(cfg);
    const fs::path dir1 = fs::temp_directory_path() / "cotrain_emit1";
    const fs::path dir2 = fs::temp_directory_path() / "cotrain_emit2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    emit_results(result, dir1.string());
    emit_results(result, dir2.string());
    CHECK(read_file(dir1 / "results.csv") == read_file(dir2 / "results.csv"));
    CHECK(read_file(dir1 / "summary.json") == read_file(dir2 / "summary.json"));
    CHECK(!read_file(dir1 / "timing.csv").empty());

    // report round-trip
    const auto rows = load_results_csv((dir1 / "results.csv").string());
    REQUIRE(rows.size() == result.rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].condition == result.rows[i].condition);
        CHECK(rows[i].seed == result.rows[i].seed);
        CHECK(std::abs(rows[i].score - result.rows[i].score) < 1e-6);
    }
    const std::string report = format_report(rows);
    CHECK(report.find("sim_quantity") != std::string::npos);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("divergent cells are tagged and flagged") {
    ExperimentConfig cfg = tiny_experiment(Protocol::MixTable);
    cfg.seeds = {1};
    cfg.train.steps = 30;
    cfg.train.learning_rate = 1e12;
    cfg.train.optimizer = Optimizer::Sgd;
    const ExperimentResult result = run_experiment(cfg);
    CHECK(result.any_diverged);
    bool tagged = false;
    for (const ResultRow& r : result.rows) {
        if (r.diverged) tagged = true;
    }
    CHECK(tagged);
    const std::string csv = results_csv(result.rows);
    CHECK(csv.find("diverged") != std::string::npos);
}

}  // TEST_SUITE harness

TEST_SUITE("serialize") {

TEST_CASE("world configs round-trip through json") {
    for (const WorldConfig& cfg :
         {preset_pick_place_real(), preset_pick_place_dc(),
          preset_pick_place_prior(), preset_close_door_real()}) {
        const WorldConfig back = world_config_from_json(world_config_to_json(cfg));
        CHECK(back == cfg);
    }
    // Override rects survive.
    WorldConfig cfg = preset_pick_place_real();
    cfg.gap.init_region_override = Rect{0.2, 0.2, 0.4, 0.4};
    CHECK(world_config_from_json(world_config_to_json(cfg)) == cfg);
}

TEST_CASE("experiment configs round-trip through json") {
    for (Protocol p : {Protocol::MixTable, Protocol::RatioSweep,
                       Protocol::UnseenObjects}) {
        const ExperimentConfig cfg = preset_experiment(p);
        const ExperimentConfig back =
            experiment_config_from_json(experiment_config_to_json(cfg));
        CHECK(back.name == cfg.name);
        CHECK(back.protocol == cfg.protocol);
        CHECK(back.world_real == cfg.world_real);
        CHECK(back.world_dc == cfg.world_dc);
        CHECK(back.worlds_prior == cfg.worlds_prior);
        CHECK(back.alpha_grid == cfg.alpha_grid);
        CHECK(back.seeds == cfg.seeds);
        CHECK(back.train.steps == cfg.train.steps);
        CHECK(back.train.alpha == cfg.train.alpha);
        CHECK(back.unseen_object_set == cfg.unseen_object_set);
    }
}

TEST_CASE("malformed configs raise config errors") {
    CHECK_THROWS_AS(world_config_from_json("{ not json"), ConfigError);
    CHECK_THROWS_AS(world_config_from_json("{\"name\": \"x\"}"), ConfigError);
    CHECK_THROWS_AS(experiment_config_from_json("[]"), ConfigError);
}

}  // TEST_SUITE serialize
