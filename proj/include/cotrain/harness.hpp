#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cotrain/policy.hpp"
#include "cotrain/toyworld.hpp"

namespace cotrain {

// ---------------------------------------------------------------------------
// Experiment orchestration: each protocol trains paired conditions over
// shared demos / eval seeds so score differences isolate the manipulated
// factor, evaluates all checkpoints on the real-proxy world, and reports the
// best checkpoint per run.
// ---------------------------------------------------------------------------

enum class Protocol {
    MixTable,
    RatioSweep,
    RealScaling,
    SimQuantity,
    CameraAblation,
    UnseenPositions,
    UnseenObjects,
};

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

struct HarnessTrainParams {
    int steps = 8000;
    int batch_size = 64;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::AdamLike;
    int checkpoint_count = 3;
    double alpha = 0.9;   // mixture ratio for co-trained conditions
};

struct ExperimentConfig {
    std::string name = "experiment";
    Protocol protocol = Protocol::MixTable;
    WorldConfig world_real;
    WorldConfig world_dc;
    std::vector<WorldConfig> worlds_prior;
    int n_real_demos = 10;
    int n_dc_demos = 1000;
    int n_prior_demos = 500;     // per prior world
    int n_source_demos = 10;     // expert demos fed to the generator
    std::vector<double> alpha_grid{0.0, 0.5, 0.9, 0.99, 0.995, 0.999};
    std::vector<int> real_count_grid{10, 25, 50, 100};
    std::vector<int> sim_count_grid{50, 200, 1000};
    int eval_episodes = 100;
    std::vector<uint64_t> seeds{1, 2, 3};
    HarnessTrainParams train;
    double border_band_frac = 0.2;     // outer fraction per dimension
    double center_eval_shrink = 0.3;   // per-side shrink for center evals
    Pose2 misaligned_camera_offset{0.16, 0.10, 0.35};
    std::vector<ObjectSpec> unseen_object_set;  // held-out eval objects
};

struct ResultRow {
    std::string protocol;
    std::string condition;
    uint64_t seed = 0;
    double score = 0.0;        // max over checkpoint evaluations
    int checkpoint_used = 0;
    bool diverged = false;
    double wallclock_s = 0.0;  // reported separately; excluded from results.csv
    // Full audit trail of the best-of convention.
    std::vector<int> checkpoint_steps;
    std::vector<double> checkpoint_scores;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;  // sorted by (protocol, condition, seed)
    bool any_diverged = false;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// results.csv + summary.json are byte-stable given identical rows; wallclock
// goes to timing.csv which is not.
void emit_results(const ExperimentResult& result, const std::string& out_dir);

std::string results_csv(const std::vector<ResultRow>& rows);

// Reads results.csv back into rows (used by `exp report`).
std::vector<ResultRow> load_results_csv(const std::string& path);

std::string format_report(const std::vector<ResultRow>& rows);

// Number of worker threads for (condition, seed) cells; honors COTRAIN_THREADS.
int harness_thread_count();

}  // namespace cotrain
