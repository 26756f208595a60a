// toyworld: collect scripted-expert demonstrations from a world config.

#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "cotrain/serialize.hpp"
#include "cotrain/toyworld.hpp"

int main(int argc, char** argv) {
    CLI::App app{"deterministic 2D tabletop world"};
    app.require_subcommand(1);

    auto* collect = app.add_subcommand("collect", "collect expert demonstrations");
    std::string config_path, out_dir;
    int n = 10;
    uint64_t seed = 0;
    collect->add_option("--config", config_path, "world config JSON")->required();
    collect->add_option("--n", n, "number of successful demos")->required();
    collect->add_option("--seed", seed, "collection seed")->required();
    collect->add_option("--out", out_dir, "output dataset directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const cotrain::WorldConfig cfg = cotrain::load_world_config(config_path);
        const cotrain::Dataset d = cotrain::collect_demos(cfg, n, seed);
        cotrain::save_dataset(d, out_dir);
        std::cout << "collected " << d.trajectories.size() << " demos ("
                  << d.total_frames() << " frames) -> " << out_dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
