#pragma once

// Shared builders for small synthetic datasets used across test suites.

#include <string>

#include "cotrain/rng.hpp"
#include "cotrain/trajectory.hpp"

namespace cotrain::testing {

inline ObservationFrame synthetic_obs(Rng& rng, int h = 32, int w = 32,
                                      int proprio_dim = 4) {
    ObservationFrame obs;
    obs.image_h = h;
    obs.image_w = w;
    obs.image.resize(static_cast<size_t>(h) * w * 3);
    for (auto& px : obs.image) px = static_cast<uint8_t>(rng.uniform_below(256));
    obs.proprio.resize(proprio_dim);
    for (double& v : obs.proprio) v = rng.uniform(-1.0, 1.0);
    return obs;
}

inline Action synthetic_action(Rng& rng) {
    return make_action(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                       rng.uniform(-0.2, 0.2), rng.uniform(0.0, 1.0));
}

inline CompositionManifest synthetic_manifest() {
    CompositionManifest m;
    m.object_categories = {"cup"};
    m.object_instances["cup"] = 1;
    m.init_region = Rect{0.1, 0.5, 0.5, 0.9};
    m.camera.center = Pose2{0.5, 0.6, 0.0};
    m.camera.window_w = 0.8;
    m.camera.window_h = 0.8;
    m.camera.res_h = 32;
    m.camera.res_w = 32;
    m.texture_ids = {"studio"};
    m.dynamics.action_noise_std = 0.001;
    m.task_ids = {"task_a"};
    return m;
}

inline Trajectory synthetic_trajectory(Rng& rng, int frames = 10,
                                       const std::string& task = "task_a") {
    Trajectory t;
    t.task_id = task;
    t.success = 1.0;
    t.source = SourceKind::RealProxy;
    t.seed = rng.next_u64();
    t.generator = Generator::HumanProxy;
    t.episode_objects = {ObjectRef{"cup", 0}};
    for (int i = 0; i < frames; ++i) {
        t.frames.push_back(Frame{synthetic_obs(rng), synthetic_action(rng)});
    }
    return t;
}

inline Dataset synthetic_dataset(uint64_t seed, int n_traj = 3, int frames = 10,
                                 const std::string& name = "synthetic") {
    Rng rng(seed);
    Dataset d;
    d.name = name;
    d.source = SourceKind::RealProxy;
    d.manifest = synthetic_manifest();
    for (int i = 0; i < n_traj; ++i) {
        d.trajectories.push_back(synthetic_trajectory(rng, frames));
    }
    return d;
}

}  // namespace cotrain::testing
