// mimicgen: multiply source demonstrations by retarget-and-replay.

#include <cstdint>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cotrain/mimicgen.hpp"
#include "cotrain/serialize.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic demonstration generator"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "generate demos from sources");
    std::string sources_dir, config_path, out_dir, report_path;
    int n = 100;
    uint64_t seed = 0;
    gen->add_option("--sources", sources_dir, "source demo dataset directory")->required();
    gen->add_option("--config", config_path, "world config JSON")->required();
    gen->add_option("--n", n, "target number of generated successes")->required();
    gen->add_option("--seed", seed, "generation seed")->required();
    gen->add_option("--out", out_dir, "output dataset directory")->required();
    gen->add_option("--report", report_path, "generation report JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        const cotrain::WorldConfig cfg = cotrain::load_world_config(config_path);
        const cotrain::Dataset sources = cotrain::load_dataset(sources_dir);
        auto [generated, report] = cotrain::generate(sources, cfg, n, seed);
        cotrain::save_dataset(generated, out_dir);
        std::cout << "generated " << report.successes << "/" << n << " in "
                  << report.attempts << " attempts (rate "
                  << report.generation_success_rate() << ") -> " << out_dir << "\n";
        if (report.budget_exhausted) {
            std::cout << "warning: attempt budget exhausted; dataset is partial\n";
        }
        if (!report_path.empty()) {
            nlohmann::ordered_json j;
            j["attempts"] = report.attempts;
            j["successes"] = report.successes;
            j["generation_success_rate"] = report.generation_success_rate();
            j["discarded_workspace"] = report.discarded_workspace;
            j["discarded_replay"] = report.discarded_replay;
            j["budget_exhausted"] = report.budget_exhausted;
            j["per_attempt_seeds"] = report.per_attempt_seeds;
            std::ofstream os(report_path, std::ios::binary);
            os << j.dump(2) << "\n";
        }
        return report.budget_exhausted ? 2 : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
