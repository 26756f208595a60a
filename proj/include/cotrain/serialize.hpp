#pragma once

#include <string>
#include <vector>

#include "cotrain/harness.hpp"
#include "cotrain/toyworld.hpp"

namespace cotrain {

// JSON config files (schema_version 1). World and experiment configs are
// self-contained; experiment configs embed their world configs.

std::string world_config_to_json(const WorldConfig& cfg);
WorldConfig world_config_from_json(const std::string& text);
void save_world_config(const WorldConfig& cfg, const std::string& path);
WorldConfig load_world_config(const std::string& path);

std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);
ExperimentConfig load_experiment_config(const std::string& path);

// `policy train` CLI input: dataset directories plus mixture and optimizer
// settings.
struct TrainCliSpec {
    std::vector<std::string> real_dirs;
    std::vector<std::string> sim_dirs;
    double alpha = 0.9;
    std::vector<double> sim_subweights;
    TrainConfig train;
    std::string out_dir = "checkpoints";
};

TrainCliSpec train_spec_from_json(const std::string& text);
TrainCliSpec load_train_spec(const std::string& path);

}  // namespace cotrain
