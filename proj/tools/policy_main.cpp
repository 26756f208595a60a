// policy: mixture training and closed-loop evaluation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "cotrain/kernels.hpp"
#include "cotrain/policy.hpp"
#include "cotrain/serialize.hpp"

namespace fs = std::filesystem;

static int run_train(const std::string& config_path) {
    const cotrain::TrainCliSpec spec = cotrain::load_train_spec(config_path);
    cotrain::MixtureSpec mixture;
    for (const auto& dir : spec.real_dirs) {
        mixture.real_pool.push_back(
            std::make_shared<const cotrain::Dataset>(cotrain::load_dataset(dir)));
    }
    for (const auto& dir : spec.sim_dirs) {
        mixture.sim_pool.push_back(
            std::make_shared<const cotrain::Dataset>(cotrain::load_dataset(dir)));
    }
    mixture.alpha = spec.alpha;
    mixture.sim_subweights = spec.sim_subweights;

    std::cout << "kernels: " << cotrain::kernels::backend_name() << "\n";
    const auto checkpoints = cotrain::train(mixture, spec.train);
    fs::create_directories(spec.out_dir);
    for (const auto& c : checkpoints) {
        const std::string path =
            (fs::path(spec.out_dir) / ("ckpt_" + std::to_string(c.step) + ".bin"))
                .string();
        cotrain::save_checkpoint(c, spec.train.seed, path);
        std::cout << "step " << c.step << "  train_loss " << c.train_loss
                  << "  -> " << path << "\n";
    }
    return 0;
}

static int run_eval(const std::string& ckpt_path, const std::string& world_path,
                    int episodes, uint64_t seed) {
    const cotrain::Checkpoint ckpt = cotrain::load_checkpoint(ckpt_path);
    const cotrain::WorldConfig world = cotrain::load_world_config(world_path);
    const double score = cotrain::evaluate(ckpt.params, world, episodes, seed);
    std::cout << "mean_success " << score << " over " << episodes
              << " episodes\n";
    return 0;
}

int main(int argc, char** argv) {
    CLI::App app{"visuomotor policy trainer"};
    app.require_subcommand(1);

    auto* train_cmd = app.add_subcommand("train", "train on a dataset mixture");
    std::string train_config;
    train_cmd->add_option("--config", train_config, "train spec JSON")->required();

    auto* eval_cmd = app.add_subcommand("eval", "closed-loop evaluation");
    std::string ckpt_path, world_path;
    int episodes = 100;
    uint64_t seed = 0;
    eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    eval_cmd->add_option("--world", world_path, "world config JSON")->required();
    eval_cmd->add_option("--episodes", episodes, "episode count")->required();
    eval_cmd->add_option("--seed", seed, "evaluation seed")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return run_train(train_config);
        return run_eval(ckpt_path, world_path, episodes, seed);
    } catch (const cotrain::DivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
