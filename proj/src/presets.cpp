#include "cotrain/presets.hpp"

namespace cotrain {

// Layout: unit table viewed through a 0.64 m window. Objects start in a
// left-of-center region and are placed into a right-side target; the ee
// parks below both. Object and grasp radii are sized so a disk spans more
// than one downsample cell.

WorldConfig preset_pick_place_real() {
    WorldConfig cfg;
    cfg.name = "pickplace_real";
    cfg.domain_tag = SourceKind::RealProxy;
    cfg.task.kind = TaskSpec::Kind::PickPlace;
    cfg.task.language_tag = "pick_place_main";
    cfg.task.pick_place.source_region = Rect{0.18, 0.48, 0.52, 0.82};
    cfg.task.pick_place.target_region = Rect{0.58, 0.52, 0.80, 0.80};
    cfg.init_region = cfg.task.pick_place.source_region;
    cfg.object_set = {ObjectSpec{"cup", 0, 0.050}, ObjectSpec{"can", 0, 0.044}};
    cfg.camera.center = Pose2{0.5, 0.62, 0.0};
    cfg.camera.window_w = 0.64;
    cfg.camera.window_h = 0.64;
    cfg.camera.res_h = 32;
    cfg.camera.res_w = 32;
    cfg.gap.palette_id = "studio";
    cfg.gap.action_noise_std = 0.0015;
    cfg.episode_horizon = 120;
    cfg.grasp_radius = 0.045;
    cfg.ee_home = Pose2{0.5, 0.34, 0.0};
    return cfg;
}

// Digital cousin: same task and goal, gapped camera, palette, geometry and
// execution noise.
WorldConfig preset_pick_place_dc() {
    WorldConfig cfg = preset_pick_place_real();
    cfg.name = "pickplace_dc";
    cfg.domain_tag = SourceKind::DigitalCousin;
    cfg.gap.camera_offset = Pose2{0.015, -0.012, 0.03};
    cfg.gap.palette_id = "overcast";
    cfg.gap.geometry_scale = 1.05;
    cfg.gap.action_noise_std = 0.002;
    return cfg;
}

// Prior task: pick-and-place with shifted region pair and disjoint object
// categories, built without reference to the main task.
WorldConfig preset_pick_place_prior() {
    WorldConfig cfg;
    cfg.name = "pickplace_prior";
    cfg.domain_tag = SourceKind::Prior;
    cfg.task.kind = TaskSpec::Kind::PickPlace;
    cfg.task.language_tag = "pick_place_prior";
    cfg.task.pick_place.source_region = Rect{0.20, 0.44, 0.48, 0.74};
    cfg.task.pick_place.target_region = Rect{0.56, 0.48, 0.78, 0.76};
    cfg.init_region = cfg.task.pick_place.source_region;
    cfg.object_set = {ObjectSpec{"pear", 0, 0.046}, ObjectSpec{"bowl", 0, 0.056}};
    cfg.camera.center = Pose2{0.5, 0.62, 0.0};
    cfg.camera.window_w = 0.64;
    cfg.camera.window_h = 0.64;
    cfg.camera.res_h = 32;
    cfg.camera.res_w = 32;
    cfg.gap.camera_offset = Pose2{-0.03, 0.02, -0.05};
    cfg.gap.palette_id = "sand";
    cfg.gap.geometry_scale = 0.92;
    cfg.gap.action_noise_std = 0.0015;
    cfg.episode_horizon = 120;
    cfg.grasp_radius = 0.045;
    cfg.ee_home = Pose2{0.5, 0.34, 0.0};
    return cfg;
}

WorldConfig preset_close_door_real() {
    WorldConfig cfg;
    cfg.name = "closedoor_real";
    cfg.domain_tag = SourceKind::RealProxy;
    cfg.task.kind = TaskSpec::Kind::CloseDoor;
    cfg.task.language_tag = "close_door_main";
    cfg.task.close_door = CloseDoorSpec{};
    // No objects; the init region is unused for placement but must be valid.
    cfg.init_region = Rect{0.22, 0.52, 0.50, 0.80};
    cfg.camera.center = Pose2{0.5, 0.62, 0.0};
    cfg.camera.window_w = 0.64;
    cfg.camera.window_h = 0.64;
    cfg.camera.res_h = 32;
    cfg.camera.res_w = 32;
    cfg.gap.palette_id = "studio";
    cfg.gap.action_noise_std = 0.0008;
    cfg.episode_horizon = 120;
    cfg.ee_home = Pose2{0.5, 0.34, 0.0};
    return cfg;
}

ExperimentConfig preset_experiment(Protocol protocol) {
    ExperimentConfig cfg;
    cfg.protocol = protocol;
    cfg.name = to_string(protocol);
    cfg.world_real = preset_pick_place_real();
    cfg.world_dc = preset_pick_place_dc();
    cfg.worlds_prior = {preset_pick_place_prior()};
    cfg.n_real_demos = 10;
    cfg.n_dc_demos = 1000;
    cfg.n_prior_demos = 500;
    cfg.n_source_demos = 10;
    cfg.alpha_grid = {0.0, 0.5, 0.9, 0.99, 0.995, 0.999};
    cfg.real_count_grid = {10, 25, 50, 100};
    cfg.sim_count_grid = {50, 200, 1000};
    cfg.eval_episodes = 100;
    cfg.seeds = {1, 2, 3};
    cfg.train.steps = 16000;
    cfg.train.batch_size = 64;
    cfg.train.learning_rate = 1e-3;
    cfg.train.optimizer = Optimizer::AdamLike;
    cfg.train.checkpoint_count = 3;
    cfg.train.alpha = 0.9;
    cfg.border_band_frac = 0.2;
    cfg.center_eval_shrink = 0.3;
    cfg.misaligned_camera_offset = Pose2{0.025, 0.018, 0.05};
    cfg.unseen_object_set = {ObjectSpec{"lemon", 0, 0.042},
                             ObjectSpec{"bottle", 0, 0.052}};
    if (protocol == Protocol::RatioSweep) {
        // Scarcer real data makes the ratio effect resolvable at desk scale.
        cfg.n_real_demos = 6;
    }
    if (protocol == Protocol::UnseenPositions) {
        // Position generalization is probed with a single object so border
        // strips and the center box can always place it.
        cfg.world_real.object_set = {ObjectSpec{"cup", 0, 0.050}};
        cfg.world_dc.object_set = {ObjectSpec{"cup", 0, 0.050}};
    }
    if (protocol == Protocol::UnseenObjects) {
        // Real demos use a fixed object pair; the cousin adds the held-out
        // categories with fresh instances.
        cfg.world_dc.object_set = {
            ObjectSpec{"cup", 0, 0.050}, ObjectSpec{"can", 0, 0.044},
            ObjectSpec{"lemon", 1, 0.040}, ObjectSpec{"bottle", 1, 0.050}};
    }
    return cfg;
}

}  // namespace cotrain
