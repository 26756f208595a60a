// compose: dataset composition statistics and pairwise deltas.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cotrain/analyzer.hpp"

int main(int argc, char** argv) {
    CLI::App app{"composition factor analysis"};
    app.require_subcommand(1);

    auto* diff_cmd = app.add_subcommand("diff", "compare two dataset compositions");
    std::string dir_a, dir_b, out_path;
    diff_cmd->add_option("--a", dir_a, "first dataset directory")->required();
    diff_cmd->add_option("--b", dir_b, "second dataset directory")->required();
    diff_cmd->add_option("--out", out_path, "machine-readable delta JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        const cotrain::Dataset a = cotrain::load_dataset(dir_a);
        const cotrain::Dataset b = cotrain::load_dataset(dir_b);
        const cotrain::CompositionManifest ma = cotrain::summarize(a);
        const cotrain::CompositionManifest mb = cotrain::summarize(b);
        const cotrain::CompositionDelta d = cotrain::diff(ma, mb);

        std::printf("factor                      value\n");
        std::printf("categories shared/a/b      %d / %d / %d\n", d.shared_categories,
                    d.a_only_categories, d.b_only_categories);
        std::printf("tasks shared/a/b           %d / %d / %d\n", d.shared_tasks,
                    d.a_only_tasks, d.b_only_tasks);
        std::printf("camera translation delta   %.4f m\n", d.camera_translation_delta);
        std::printf("camera rotation delta      %.2f deg\n", d.camera_rotation_delta_deg);
        std::printf("init region IoU            %.4f\n", d.init_region_iou);
        std::printf("action noise delta         %.6f\n", d.action_noise_delta);
        std::printf("geometry scale delta       %.4f\n", d.geometry_scale_delta);

        if (!out_path.empty()) {
            nlohmann::ordered_json j;
            j["category_overlap"] = {{"shared", d.shared_categories},
                                     {"a_only", d.a_only_categories},
                                     {"b_only", d.b_only_categories}};
            j["task_overlap"] = {{"shared", d.shared_tasks},
                                 {"a_only", d.a_only_tasks},
                                 {"b_only", d.b_only_tasks}};
            j["camera_translation_delta_m"] = d.camera_translation_delta;
            j["camera_rotation_delta_deg"] = d.camera_rotation_delta_deg;
            j["init_region_iou"] = d.init_region_iou;
            j["dynamics_delta"] = {{"action_noise_std", d.action_noise_delta},
                                   {"geometry_scale", d.geometry_scale_delta}};
            std::ofstream os(out_path, std::ios::binary);
            os << j.dump(2) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
