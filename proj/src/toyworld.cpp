#include "cotrain/toyworld.hpp"

#include <algorithm>
#include <cmath>

namespace cotrain {

namespace {

constexpr double kEeMarkerRadius = 0.016;
constexpr double kDoorThickness = 0.012;
constexpr double kHingeDotRadius = 0.02;
constexpr double kMinObjectGap = 0.01;       // clearance between placed objects
constexpr int kPlacementTries = 100;
constexpr double kDoorContactTolDeg = 15.0;  // angular window for pushing
constexpr double kDoorRadialLo = 0.15;       // fractions of door length
constexpr double kDoorRadialHi = 1.10;
constexpr double kExpertStepNorm = 0.045;    // <= max_xy so rotated steps stay in bounds
constexpr double kExpertJitterStd = 0.005;
constexpr double kExpertCloseInRadius = 0.12;  // close the gripper inside this
constexpr double kDoorSweepDegPerStep = 7.0;

double clampd(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// World angle of the door blade for door coordinate a (degrees, 0 = closed).
double blade_dir(double angle_deg) {
    return kPi + deg_to_rad(angle_deg);
}

void blade_point(const DoorState& door, double angle_deg, double frac,
                 double& x, double& y) {
    const double dir = blade_dir(angle_deg);
    x = door.hinge_x + frac * door.length * std::cos(dir);
    y = door.hinge_y + frac * door.length * std::sin(dir);
}

double point_segment_dist(double px, double py, double ax, double ay,
                          double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = clampd(t, 0.0, 1.0);
    return dist(px, py, ax + t * vx, ay + t * vy);
}

}  // namespace

// ---------------------------------------------------------------------------
// Seed streams
// ---------------------------------------------------------------------------

uint64_t episode_seed_for(const WorldConfig& cfg, uint64_t run_seed,
                          uint64_t index) {
    return mix_seed({cfg.seed_salt, run_seed, index});
}

Rng world_stream(uint64_t episode_seed) {
    return Rng(mix_seed({episode_seed, hash_str("world")}));
}

Rng policy_stream(uint64_t episode_seed) {
    return Rng(mix_seed({episode_seed, hash_str("policy")}));
}

// ---------------------------------------------------------------------------
// Config validation / reset
// ---------------------------------------------------------------------------

void validate_config(const WorldConfig& cfg) {
    if (cfg.episode_horizon < 1) throw ConfigError("episode_horizon must be >= 1");
    const Rect r = cfg.effective_init_region();
    if (r.area() <= 0.0) throw ConfigError("init region has non-positive area");
    if (r.x0 < kTableMin || r.y0 < kTableMin || r.x1 > kTableMax ||
        r.y1 > kTableMax) {
        throw ConfigError("init region outside table bounds");
    }
    if (cfg.gap.geometry_scale <= 0.0) throw ConfigError("geometry_scale must be > 0");
    if (cfg.gap.action_noise_std < 0.0) throw ConfigError("action_noise_std must be >= 0");
    if (cfg.grasp_radius <= 0.0) throw ConfigError("grasp_radius must be > 0");
    if (cfg.task.kind == TaskSpec::Kind::PickPlace) {
        const auto& pp = cfg.task.pick_place;
        if (pp.source_region.intersects(pp.target_region)) {
            throw ConfigError("pick_place source and target regions must be disjoint");
        }
    } else {
        const auto& cd = cfg.task.close_door;
        if (cd.threshold_deg <= 0.0 || cd.threshold_deg >= 90.0) {
            throw ConfigError("close_door threshold must be in (0, 90) degrees");
        }
    }
}

State reset(const WorldConfig& cfg, uint64_t episode_seed) {
    validate_config(cfg);
    Rng rng(mix_seed({episode_seed, hash_str("reset")}));
    State s;
    s.ee_pose = cfg.ee_home;
    s.gripper = 0.0;
    s.step_count = 0;
    if (cfg.task.kind == TaskSpec::Kind::CloseDoor) {
        const auto& cd = cfg.task.close_door;
        s.door = DoorState{rng.uniform(cd.init_lo_deg, cd.init_hi_deg),
                           cd.hinge_x, cd.hinge_y, cd.length};
    }
    const Rect region = cfg.effective_init_region();
    for (size_t i = 0; i < cfg.object_set.size(); ++i) {
        const ObjectSpec& spec = cfg.object_set[i];
        const double radius = spec.radius * cfg.gap.geometry_scale;
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementTries && !placed; ++attempt) {
            const double x = rng.uniform(region.x0, region.x1);
            const double y = rng.uniform(region.y0, region.y1);
            bool collides = false;
            for (const WorldObject& other : s.objects) {
                if (dist(x, y, other.pose.x, other.pose.y) <
                    radius + other.radius + kMinObjectGap) {
                    collides = true;
                    break;
                }
            }
            if (!collides) {
                s.objects.push_back(WorldObject{static_cast<int>(i),
                                                Pose2{x, y, 0.0}, radius,
                                                spec.category, spec.instance});
                placed = true;
            }
        }
        if (!placed) {
            throw PlacementFailure("placement failure: init region too small for object " +
                                   spec.category);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// step
// ---------------------------------------------------------------------------

State step(const State& s, const Action& a, const WorldConfig& cfg,
           Rng& world_rng) {
    const ActionBounds& bounds = action_bounds();
    double dx = 0.0, dy = 0.0, dtheta = 0.0, grip = s.gripper;
    if (a.delta.size() >= 1) dx = clampd(a.delta[0], -bounds.max_xy, bounds.max_xy);
    if (a.delta.size() >= 2) dy = clampd(a.delta[1], -bounds.max_xy, bounds.max_xy);
    if (a.delta.size() >= 3) dtheta = clampd(a.delta[2], -bounds.max_theta, bounds.max_theta);
    if (a.delta.size() >= 4) grip = clampd(a.delta[3], 0.0, 1.0);

    if (cfg.gap.action_noise_std > 0.0) {
        dx += world_rng.gaussian(0.0, cfg.gap.action_noise_std);
        dy += world_rng.gaussian(0.0, cfg.gap.action_noise_std);
    }

    State out = s;
    out.ee_pose.x = clampd(s.ee_pose.x + dx, kTableMin, kTableMax);
    out.ee_pose.y = clampd(s.ee_pose.y + dy, kTableMin, kTableMax);
    out.ee_pose.theta = wrap_angle(s.ee_pose.theta + dtheta);
    out.gripper = grip;

    // Grasp / release on the gripper command threshold.
    if (grip < 0.5 && !out.held_object) {
        int best = -1;
        double best_d = cfg.grasp_radius;
        for (const WorldObject& obj : out.objects) {
            const double d = dist(out.ee_pose.x, out.ee_pose.y, obj.pose.x, obj.pose.y);
            if (d <= best_d) {
                best_d = d;
                best = obj.id;
            }
        }
        if (best >= 0) out.held_object = best;
    } else if (grip >= 0.5 && out.held_object) {
        out.held_object.reset();
    }

    if (out.held_object) {
        for (WorldObject& obj : out.objects) {
            if (obj.id == *out.held_object) {
                obj.pose.x = out.ee_pose.x;
                obj.pose.y = out.ee_pose.y;
            }
        }
    }

    // Door pushes only toward closed, and only while the ee sits on the blade.
    if (out.door) {
        DoorState& door = *out.door;
        const double r = dist(out.ee_pose.x, out.ee_pose.y, door.hinge_x, door.hinge_y);
        if (r >= kDoorRadialLo * door.length && r <= kDoorRadialHi * door.length) {
            const double ang = std::atan2(out.ee_pose.y - door.hinge_y,
                                          out.ee_pose.x - door.hinge_x);
            const double a_ee = rad_to_deg(wrap_angle(ang - kPi));
            if (a_ee < door.angle_deg && a_ee >= door.angle_deg - kDoorContactTolDeg) {
                door.angle_deg = std::max(a_ee, 0.0);
            }
        }
    }

    out.step_count = s.step_count + 1;
    return out;
}

// ---------------------------------------------------------------------------
// success
// ---------------------------------------------------------------------------

SuccessLevel check_success(const State& s, const TaskSpec& task) {
    if (task.kind == TaskSpec::Kind::PickPlace) {
        if (s.objects.empty()) {
            throw TaskStateMismatch("task/state mismatch: pick_place state has no objects");
        }
        const Rect& tgt = task.pick_place.target_region;
        for (const WorldObject& obj : s.objects) {
            const bool held = s.held_object && *s.held_object == obj.id;
            if (!held && tgt.contains(obj.pose.x, obj.pose.y)) {
                return SuccessLevel::Full;
            }
        }
        if (s.held_object) return SuccessLevel::Partial;
        return SuccessLevel::Fail;
    }
    if (!s.door) {
        throw TaskStateMismatch("task/state mismatch: close_door state has no door");
    }
    return s.door->angle_deg < task.close_door.threshold_deg ? SuccessLevel::Full
                                                             : SuccessLevel::Fail;
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

namespace {

struct Rgb {
    uint8_t r, g, b;
};

struct Palette {
    Rgb bg;
    Rgb off_table;
    Rgb door;
    Rgb hinge;
    Rgb ee;
    double object_hue_shift;
    double object_value;
};

Rgb hsv_to_rgb(double h, double s, double v) {
    h = h - std::floor(h);
    const double i = std::floor(h * 6.0);
    const double f = h * 6.0 - i;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - f * s);
    const double t = v * (1.0 - (1.0 - f) * s);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(i) % 6) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        case 5: r = v; g = p; b = q; break;
    }
    return Rgb{static_cast<uint8_t>(r * 255.0 + 0.5),
               static_cast<uint8_t>(g * 255.0 + 0.5),
               static_cast<uint8_t>(b * 255.0 + 0.5)};
}

Palette palette_for(const std::string& id) {
    if (id == "studio") {
        return Palette{{212, 208, 200}, {24, 24, 28}, {96, 72, 48},
                       {60, 46, 30},    {255, 255, 255}, 0.0, 0.42};
    }
    if (id == "overcast") {
        return Palette{{203, 201, 196}, {22, 22, 26}, {92, 70, 46},
                       {58, 45, 30},    {252, 252, 252}, 0.05, 0.41};
    }
    if (id == "slate") {
        return Palette{{186, 192, 206}, {20, 22, 30}, {84, 80, 70},
                       {52, 50, 44},    {250, 252, 255}, 0.21, 0.40};
    }
    if (id == "sand") {
        return Palette{{228, 216, 192}, {30, 26, 20}, {104, 78, 50},
                       {66, 50, 32},    {255, 252, 246}, 0.55, 0.46};
    }
    // Procedural palette for unknown ids.
    const uint64_t h = hash_str(id);
    const auto lum = static_cast<uint8_t>(172 + (h % 64));
    return Palette{{lum, lum, static_cast<uint8_t>(lum - 8)},
                   {24, 24, 24},
                   {96, 72, 48},
                   {60, 46, 30},
                   {255, 255, 255},
                   static_cast<double>((h >> 8) % 1000) / 1000.0,
                   0.42};
}

Rgb object_color(const Palette& pal, const std::string& category, int instance) {
    const uint64_t h = mix_seed({hash_str(category), static_cast<uint64_t>(instance)});
    const double hue = static_cast<double>(h % 4096) / 4096.0 * 0.618033988749895 +
                       pal.object_hue_shift;
    return hsv_to_rgb(hue, 0.72, pal.object_value);
}

}  // namespace

Image render(const State& s, const CameraConfig& cam, const GapConfig& gap) {
    const Palette pal = palette_for(gap.palette_id);
    const Pose2 eff = compose(cam.center, gap.camera_offset);
    Image img;
    img.h = cam.res_h;
    img.w = cam.res_w;
    img.rgb.resize(static_cast<size_t>(img.h) * img.w * 3);

    const double pitch_x = cam.window_w / cam.res_w;
    const double pitch_y = cam.window_h / cam.res_h;

    double door_tip_x = 0.0, door_tip_y = 0.0;
    if (s.door) blade_point(*s.door, s.door->angle_deg, 1.0, door_tip_x, door_tip_y);

    for (int row = 0; row < img.h; ++row) {
        for (int col = 0; col < img.w; ++col) {
            const double u = (col + 0.5 - 0.5 * img.w) * pitch_x;
            const double v = (0.5 * img.h - row - 0.5) * pitch_y;
            double wx, wy;
            transform_point(eff, u, v, wx, wy);

            Rgb c = pal.bg;
            if (wx < kTableMin || wx > kTableMax || wy < kTableMin || wy > kTableMax) {
                c = pal.off_table;
            } else if (dist(wx, wy, s.ee_pose.x, s.ee_pose.y) <= kEeMarkerRadius) {
                c = pal.ee;
            } else {
                bool hit = false;
                for (const WorldObject& obj : s.objects) {
                    if (dist(wx, wy, obj.pose.x, obj.pose.y) <= obj.radius) {
                        c = object_color(pal, obj.category, obj.instance);
                        hit = true;
                        break;
                    }
                }
                if (!hit && s.door) {
                    if (point_segment_dist(wx, wy, s.door->hinge_x, s.door->hinge_y,
                                           door_tip_x, door_tip_y) <= kDoorThickness) {
                        c = pal.door;
                    } else if (dist(wx, wy, s.door->hinge_x, s.door->hinge_y) <=
                               kHingeDotRadius) {
                        c = pal.hinge;
                    }
                }
            }
            const size_t idx = (static_cast<size_t>(row) * img.w + col) * 3;
            img.rgb[idx] = c.r;
            img.rgb[idx + 1] = c.g;
            img.rgb[idx + 2] = c.b;
        }
    }
    return img;
}

std::vector<double> proprio_of(const State& s) {
    return {s.ee_pose.x, s.ee_pose.y, s.ee_pose.theta, s.gripper};
}

ObservationFrame observe(const State& s, const WorldConfig& cfg) {
    ObservationFrame f;
    Image img = render(s, cfg.camera, cfg.gap);
    f.image_h = img.h;
    f.image_w = img.w;
    f.image = std::move(img.rgb);
    f.proprio = proprio_of(s);
    return f;
}

// ---------------------------------------------------------------------------
// scripted expert
// ---------------------------------------------------------------------------

namespace {

Action step_toward(const State& s, double gx, double gy, double gripper,
                   Rng& rng) {
    double dx = gx - s.ee_pose.x + rng.gaussian(0.0, kExpertJitterStd);
    double dy = gy - s.ee_pose.y + rng.gaussian(0.0, kExpertJitterStd);
    const double norm = std::sqrt(dx * dx + dy * dy);
    if (norm > kExpertStepNorm) {
        dx *= kExpertStepNorm / norm;
        dy *= kExpertStepNorm / norm;
    }
    return make_action(dx, dy, 0.0, gripper);
}

Action idle_action(const State& s) {
    return make_action(0.0, 0.0, 0.0, s.gripper);
}

}  // namespace

Action scripted_expert(const State& s, const TaskSpec& task,
                       const WorldConfig& cfg, Rng& expert_rng) {
    if (task.kind == TaskSpec::Kind::PickPlace) {
        const Rect& tgt = task.pick_place.target_region;
        if (s.held_object) {
            const double gx = tgt.cx(), gy = tgt.cy();
            const double d = dist(s.ee_pose.x, s.ee_pose.y, gx, gy);
            const double release_radius =
                0.25 * std::min(tgt.width(), tgt.height());
            if (d <= release_radius) return make_action(0.0, 0.0, 0.0, 1.0);
            return step_toward(s, gx, gy, 0.0, expert_rng);
        }
        // Approach the nearest object not already placed, closing the
        // gripper over the whole final approach so the grasp fires while
        // sweeping through the object rather than at a single stop frame.
        const WorldObject* target = nullptr;
        double best_d = 1e9;
        for (const WorldObject& obj : s.objects) {
            if (tgt.contains(obj.pose.x, obj.pose.y)) continue;
            const double d = dist(s.ee_pose.x, s.ee_pose.y, obj.pose.x, obj.pose.y);
            if (d < best_d) {
                best_d = d;
                target = &obj;
            }
        }
        if (!target) return idle_action(s);
        const double grip = best_d <= kExpertCloseInRadius ? 0.0 : 1.0;
        return step_toward(s, target->pose.x, target->pose.y, grip, expert_rng);
    }

    // CloseDoor: touch the blade at 0.62 of its length, then sweep toward 0.
    if (!s.door) {
        throw TaskStateMismatch("task/state mismatch: close_door state has no door");
    }
    const DoorState& door = *s.door;
    if (door.angle_deg < 0.8 * task.close_door.threshold_deg) return idle_action(s);
    double cx, cy;
    blade_point(door, door.angle_deg, 0.62, cx, cy);
    if (dist(s.ee_pose.x, s.ee_pose.y, cx, cy) > 0.025) {
        return step_toward(s, cx, cy, 0.0, expert_rng);
    }
    const double next_angle = door.angle_deg - kDoorSweepDegPerStep;
    double nx, ny;
    blade_point(door, next_angle, 0.62, nx, ny);
    return step_toward(s, nx, ny, 0.0, expert_rng);
}

// ---------------------------------------------------------------------------
// rollout / demo collection
// ---------------------------------------------------------------------------

CompositionManifest manifest_from_config(const WorldConfig& cfg) {
    CompositionManifest m;
    for (const ObjectSpec& spec : cfg.object_set) {
        m.object_categories.insert(spec.category);
        m.object_instances[spec.category] += 1;
    }
    m.init_region = cfg.effective_init_region();
    m.camera = cfg.camera;
    m.camera.center = compose(cfg.camera.center, cfg.gap.camera_offset);
    m.texture_ids.insert(cfg.gap.palette_id);
    m.dynamics.action_noise_std = cfg.gap.action_noise_std;
    m.dynamics.geometry_scale = cfg.gap.geometry_scale;
    m.task_ids.insert(cfg.task.language_tag);
    return m;
}

RolloutResult rollout_episode(const WorldConfig& cfg, uint64_t episode_seed,
                              const PolicyFn& policy, bool record_frames) {
    RolloutResult out;
    State s = reset(cfg, episode_seed);
    Rng wrng = world_stream(episode_seed);
    Rng prng = policy_stream(episode_seed);

    Trajectory& traj = out.traj;
    traj.task_id = cfg.task.language_tag;
    traj.seed = episode_seed;
    traj.source = cfg.domain_tag;
    traj.generator = Generator::HumanProxy;
    for (const WorldObject& obj : s.objects) {
        traj.episode_objects.push_back(ObjectRef{obj.category, obj.instance});
    }

    SuccessLevel succ = SuccessLevel::Fail;
    for (int t = 0; t < cfg.episode_horizon; ++t) {
        ObservationFrame obs = observe(s, cfg);
        Action a = policy(s, obs, prng);
        if (record_frames) traj.frames.push_back(Frame{std::move(obs), a});
        s = step(s, a, cfg, wrng);
        succ = check_success(s, cfg.task);
        if (succ == SuccessLevel::Full) break;
    }
    traj.success = success_value(succ);
    out.final_success = succ;
    out.final_state = std::move(s);
    return out;
}

Dataset collect_demos(const WorldConfig& cfg, int n, uint64_t seed) {
    if (n < 1) throw ConfigError("collect_demos requires n >= 1");
    Dataset d;
    d.source = cfg.domain_tag;
    d.name = cfg.name;
    d.manifest = manifest_from_config(cfg);

    const PolicyFn expert = [&cfg](const State& s, const ObservationFrame&,
                                   Rng& rng) {
        return scripted_expert(s, cfg.task, cfg, rng);
    };

    const int budget = 10 * n;
    int attempts = 0;
    while (static_cast<int>(d.trajectories.size()) < n && attempts < budget) {
        const uint64_t ep_seed =
            episode_seed_for(cfg, seed, static_cast<uint64_t>(attempts));
        ++attempts;
        RolloutResult rr = rollout_episode(cfg, ep_seed, expert, true);
        if (rr.final_success == SuccessLevel::Full) {
            d.trajectories.push_back(std::move(rr.traj));
        }
    }
    if (static_cast<int>(d.trajectories.size()) < n) {
        throw ExpertFailure("expert failure: " +
                            std::to_string(d.trajectories.size()) + "/" +
                            std::to_string(n) + " successes in " +
                            std::to_string(attempts) + " attempts");
    }
    return d;
}

}  // namespace cotrain
