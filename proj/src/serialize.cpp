#include "cotrain/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cotrain {

using json = nlohmann::ordered_json;

namespace {

json rect_to_json(const Rect& r) {
    return json::array({r.x0, r.y0, r.x1, r.y1});
}

Rect rect_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw ConfigError("bad rect in config");
    return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                j[3].get<double>()};
}

json pose_to_json(const Pose2& p) {
    return json::array({p.x, p.y, p.theta});
}

Pose2 pose_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("bad pose in config");
    return Pose2{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json world_to_json(const WorldConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["name"] = cfg.name;
    j["domain_tag"] = to_string(cfg.domain_tag);
    json task;
    if (cfg.task.kind == TaskSpec::Kind::PickPlace) {
        task["kind"] = "pick_place";
        task["language_tag"] = cfg.task.language_tag;
        task["source_region"] = rect_to_json(cfg.task.pick_place.source_region);
        task["target_region"] = rect_to_json(cfg.task.pick_place.target_region);
    } else {
        task["kind"] = "close_door";
        task["language_tag"] = cfg.task.language_tag;
        task["threshold_deg"] = cfg.task.close_door.threshold_deg;
        task["init_angle_deg"] = json::array(
            {cfg.task.close_door.init_lo_deg, cfg.task.close_door.init_hi_deg});
        task["hinge"] = json::array(
            {cfg.task.close_door.hinge_x, cfg.task.close_door.hinge_y});
        task["length"] = cfg.task.close_door.length;
    }
    j["task"] = task;
    json gap;
    gap["camera_offset"] = pose_to_json(cfg.gap.camera_offset);
    gap["palette_id"] = cfg.gap.palette_id;
    gap["geometry_scale"] = cfg.gap.geometry_scale;
    gap["action_noise_std"] = cfg.gap.action_noise_std;
    gap["init_region_override"] = cfg.gap.init_region_override
                                      ? rect_to_json(*cfg.gap.init_region_override)
                                      : json(nullptr);
    j["gap"] = gap;
    json cam;
    cam["center"] = pose_to_json(cfg.camera.center);
    cam["window"] = json::array({cfg.camera.window_w, cfg.camera.window_h});
    cam["resolution"] = json::array({cfg.camera.res_h, cfg.camera.res_w});
    j["camera"] = cam;
    j["init_region"] = rect_to_json(cfg.init_region);
    json objects = json::array();
    for (const ObjectSpec& o : cfg.object_set) {
        objects.push_back({{"category", o.category},
                           {"instance", o.instance},
                           {"radius", o.radius}});
    }
    j["object_set"] = objects;
    j["episode_horizon"] = cfg.episode_horizon;
    j["seed_salt"] = cfg.seed_salt;
    j["grasp_radius"] = cfg.grasp_radius;
    j["ee_home"] = pose_to_json(cfg.ee_home);
    return j;
}

WorldConfig world_from_json(const json& j) {
    WorldConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.domain_tag = source_kind_from_string(j.at("domain_tag").get<std::string>());
    const json& task = j.at("task");
    const std::string kind = task.at("kind").get<std::string>();
    cfg.task.language_tag = task.at("language_tag").get<std::string>();
    if (kind == "pick_place") {
        cfg.task.kind = TaskSpec::Kind::PickPlace;
        cfg.task.pick_place.source_region = rect_from_json(task.at("source_region"));
        cfg.task.pick_place.target_region = rect_from_json(task.at("target_region"));
    } else if (kind == "close_door") {
        cfg.task.kind = TaskSpec::Kind::CloseDoor;
        cfg.task.close_door.threshold_deg = task.at("threshold_deg").get<double>();
        cfg.task.close_door.init_lo_deg = task.at("init_angle_deg")[0].get<double>();
        cfg.task.close_door.init_hi_deg = task.at("init_angle_deg")[1].get<double>();
        cfg.task.close_door.hinge_x = task.at("hinge")[0].get<double>();
        cfg.task.close_door.hinge_y = task.at("hinge")[1].get<double>();
        cfg.task.close_door.length = task.at("length").get<double>();
    } else {
        throw ConfigError("unknown task kind: " + kind);
    }
    const json& gap = j.at("gap");
    cfg.gap.camera_offset = pose_from_json(gap.at("camera_offset"));
    cfg.gap.palette_id = gap.at("palette_id").get<std::string>();
    cfg.gap.geometry_scale = gap.at("geometry_scale").get<double>();
    cfg.gap.action_noise_std = gap.at("action_noise_std").get<double>();
    if (!gap.at("init_region_override").is_null()) {
        cfg.gap.init_region_override = rect_from_json(gap.at("init_region_override"));
    }
    const json& cam = j.at("camera");
    cfg.camera.center = pose_from_json(cam.at("center"));
    cfg.camera.window_w = cam.at("window")[0].get<double>();
    cfg.camera.window_h = cam.at("window")[1].get<double>();
    cfg.camera.res_h = cam.at("resolution")[0].get<int>();
    cfg.camera.res_w = cam.at("resolution")[1].get<int>();
    cfg.init_region = rect_from_json(j.at("init_region"));
    for (const auto& oj : j.at("object_set")) {
        cfg.object_set.push_back(ObjectSpec{oj.at("category").get<std::string>(),
                                            oj.at("instance").get<int>(),
                                            oj.at("radius").get<double>()});
    }
    cfg.episode_horizon = j.at("episode_horizon").get<int>();
    cfg.seed_salt = j.at("seed_salt").get<uint64_t>();
    cfg.grasp_radius = j.at("grasp_radius").get<double>();
    cfg.ee_home = pose_from_json(j.at("ee_home"));
    return cfg;
}

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "adam") return Optimizer::AdamLike;
    if (s == "sgd") return Optimizer::Sgd;
    throw ConfigError("unknown optimizer: " + s);
}

const char* optimizer_to_string(Optimizer o) {
    return o == Optimizer::AdamLike ? "adam" : "sgd";
}

json experiment_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["name"] = cfg.name;
    j["protocol"] = to_string(cfg.protocol);
    j["world_real"] = world_to_json(cfg.world_real);
    j["world_dc"] = world_to_json(cfg.world_dc);
    json priors = json::array();
    for (const auto& w : cfg.worlds_prior) priors.push_back(world_to_json(w));
    j["worlds_prior"] = priors;
    j["n_real_demos"] = cfg.n_real_demos;
    j["n_dc_demos"] = cfg.n_dc_demos;
    j["n_prior_demos"] = cfg.n_prior_demos;
    j["n_source_demos"] = cfg.n_source_demos;
    j["alpha_grid"] = cfg.alpha_grid;
    j["real_count_grid"] = cfg.real_count_grid;
    j["sim_count_grid"] = cfg.sim_count_grid;
    j["eval_episodes"] = cfg.eval_episodes;
    j["seeds"] = cfg.seeds;
    json train;
    train["steps"] = cfg.train.steps;
    train["batch_size"] = cfg.train.batch_size;
    train["learning_rate"] = cfg.train.learning_rate;
    train["optimizer"] = optimizer_to_string(cfg.train.optimizer);
    train["checkpoint_count"] = cfg.train.checkpoint_count;
    train["alpha"] = cfg.train.alpha;
    j["train"] = train;
    j["border_band_frac"] = cfg.border_band_frac;
    j["center_eval_shrink"] = cfg.center_eval_shrink;
    j["misaligned_camera_offset"] = pose_to_json(cfg.misaligned_camera_offset);
    json unseen = json::array();
    for (const ObjectSpec& o : cfg.unseen_object_set) {
        unseen.push_back({{"category", o.category},
                          {"instance", o.instance},
                          {"radius", o.radius}});
    }
    j["unseen_object_set"] = unseen;
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    cfg.world_real = world_from_json(j.at("world_real"));
    cfg.world_dc = world_from_json(j.at("world_dc"));
    cfg.worlds_prior.clear();
    for (const auto& w : j.at("worlds_prior")) {
        cfg.worlds_prior.push_back(world_from_json(w));
    }
    cfg.n_real_demos = j.at("n_real_demos").get<int>();
    cfg.n_dc_demos = j.at("n_dc_demos").get<int>();
    cfg.n_prior_demos = j.at("n_prior_demos").get<int>();
    cfg.n_source_demos = j.at("n_source_demos").get<int>();
    cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    cfg.real_count_grid = j.at("real_count_grid").get<std::vector<int>>();
    cfg.sim_count_grid = j.at("sim_count_grid").get<std::vector<int>>();
    cfg.eval_episodes = j.at("eval_episodes").get<int>();
    cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    const json& train = j.at("train");
    cfg.train.steps = train.at("steps").get<int>();
    cfg.train.batch_size = train.at("batch_size").get<int>();
    cfg.train.learning_rate = train.at("learning_rate").get<double>();
    cfg.train.optimizer = optimizer_from_string(train.at("optimizer").get<std::string>());
    cfg.train.checkpoint_count = train.at("checkpoint_count").get<int>();
    cfg.train.alpha = train.at("alpha").get<double>();
    cfg.border_band_frac = j.at("border_band_frac").get<double>();
    cfg.center_eval_shrink = j.at("center_eval_shrink").get<double>();
    cfg.misaligned_camera_offset = pose_from_json(j.at("misaligned_camera_offset"));
    cfg.unseen_object_set.clear();
    for (const auto& oj : j.at("unseen_object_set")) {
        cfg.unseen_object_set.push_back(ObjectSpec{
            oj.at("category").get<std::string>(), oj.at("instance").get<int>(),
            oj.at("radius").get<double>()});
    }
    return cfg;
}

json parse_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cannot parse ") + what + ": " + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

std::string world_config_to_json(const WorldConfig& cfg) {
    return world_to_json(cfg).dump(2) + "\n";
}

WorldConfig world_config_from_json(const std::string& text) {
    try {
        return world_from_json(parse_text(text, "world config"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad world config: ") + e.what());
    }
}

void save_world_config(const WorldConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write config: " + path);
    os << world_config_to_json(cfg);
}

WorldConfig load_world_config(const std::string& path) {
    return world_config_from_json(read_file(path));
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    return experiment_to_json(cfg).dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    try {
        return experiment_from_json(parse_text(text, "experiment config"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad experiment config: ") + e.what());
    }
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write config: " + path);
    os << experiment_config_to_json(cfg);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json(read_file(path));
}

TrainCliSpec train_spec_from_json(const std::string& text) {
    const json j = parse_text(text, "train spec");
    try {
        TrainCliSpec spec;
        spec.real_dirs = j.at("real").get<std::vector<std::string>>();
        spec.sim_dirs = j.at("sim").get<std::vector<std::string>>();
        spec.alpha = j.at("alpha").get<double>();
        if (j.contains("sim_subweights") && !j.at("sim_subweights").is_null()) {
            spec.sim_subweights = j.at("sim_subweights").get<std::vector<double>>();
        }
        spec.train.steps = j.at("steps").get<int>();
        spec.train.batch_size = j.at("batch_size").get<int>();
        spec.train.learning_rate = j.at("learning_rate").get<double>();
        spec.train.optimizer =
            optimizer_from_string(j.at("optimizer").get<std::string>());
        spec.train.checkpoint_count = j.at("checkpoint_count").get<int>();
        spec.train.seed = j.at("seed").get<uint64_t>();
        spec.out_dir = j.at("out_dir").get<std::string>();
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad train spec: ") + e.what());
    }
}

TrainCliSpec load_train_spec(const std::string& path) {
    return train_spec_from_json(read_file(path));
}

}  // namespace cotrain
