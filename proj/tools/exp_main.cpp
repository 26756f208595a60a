// exp: experiment protocols over the co-training pipeline.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "cotrain/harness.hpp"
#include "cotrain/kernels.hpp"
#include "cotrain/presets.hpp"
#include "cotrain/serialize.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"co-training experiment runner"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run an experiment config");
    std::string config_path, out_dir;
    run_cmd->add_option("--config", config_path, "experiment config JSON")->required();
    run_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* report_cmd = app.add_subcommand("report", "summarize a results directory");
    std::string report_dir;
    report_cmd->add_option("--dir", report_dir, "directory with results.csv")->required();

    auto* make_cmd = app.add_subcommand("make-configs",
                                        "write the preset experiment configs");
    std::string make_dir = "configs";
    make_cmd->add_option("--out", make_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const cotrain::ExperimentConfig cfg =
                cotrain::load_experiment_config(config_path);
            std::cout << "protocol " << cotrain::to_string(cfg.protocol)
                      << ", kernels " << cotrain::kernels::backend_name()
                      << ", threads " << cotrain::harness_thread_count() << "\n";
            const cotrain::ExperimentResult result = cotrain::run_experiment(cfg);
            cotrain::emit_results(result, out_dir);
            std::cout << cotrain::format_report(result.rows);
            if (result.any_diverged) {
                std::cerr << "error: at least one training cell diverged\n";
                return 3;
            }
            return 0;
        }
        if (report_cmd->parsed()) {
            const auto rows = cotrain::load_results_csv(
                (fs::path(report_dir) / "results.csv").string());
            std::cout << cotrain::format_report(rows);
            return 0;
        }
        // make-configs
        fs::create_directories(make_dir);
        const cotrain::Protocol protocols[] = {
            cotrain::Protocol::MixTable,        cotrain::Protocol::RatioSweep,
            cotrain::Protocol::RealScaling,     cotrain::Protocol::SimQuantity,
            cotrain::Protocol::CameraAblation,  cotrain::Protocol::UnseenPositions,
            cotrain::Protocol::UnseenObjects};
        for (cotrain::Protocol p : protocols) {
            const cotrain::ExperimentConfig cfg = cotrain::preset_experiment(p);
            const std::string path =
                (fs::path(make_dir) / (std::string(cotrain::to_string(p)) + ".json"))
                    .string();
            cotrain::save_experiment_config(cfg, path);
            std::cout << "wrote " << path << "\n";
        }
        cotrain::save_world_config(cotrain::preset_pick_place_real(),
                                   (fs::path(make_dir) / "world_real.json").string());
        cotrain::save_world_config(cotrain::preset_pick_place_dc(),
                                   (fs::path(make_dir) / "world_dc.json").string());
        cotrain::save_world_config(cotrain::preset_pick_place_prior(),
                                   (fs::path(make_dir) / "world_prior.json").string());
        cotrain::save_world_config(cotrain::preset_close_door_real(),
                                   (fs::path(make_dir) / "world_closedoor.json").string());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
