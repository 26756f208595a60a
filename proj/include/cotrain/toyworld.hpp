#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotrain/pose.hpp"
#include "cotrain/rng.hpp"
#include "cotrain/trajectory.hpp"

namespace cotrain {

// ---------------------------------------------------------------------------
// TwinWorld: a deterministic 2D kinematic tabletop. Unit-square table,
// point end-effector, circle objects, an optional hinged door. Every
// operation is a pure function of (inputs, seed).
// ---------------------------------------------------------------------------

inline constexpr double kTableMin = 0.0;
inline constexpr double kTableMax = 1.0;
inline constexpr Pose2 kEeHome{0.5, 0.12, 0.0};

struct ObjectSpec {
    std::string category;
    int instance = 0;
    double radius = 0.045;

    bool operator==(const ObjectSpec&) const = default;
};

struct GapConfig {
    Pose2 camera_offset;             // composed onto the camera center
    std::string palette_id = "studio";
    double geometry_scale = 1.0;     // multiplier on object radii
    double action_noise_std = 0.0;   // per-step gaussian on executed dx, dy
    std::optional<Rect> init_region_override;

    bool operator==(const GapConfig&) const = default;
};

struct PickPlaceSpec {
    Rect source_region;
    Rect target_region;

    bool operator==(const PickPlaceSpec&) const = default;
};

struct CloseDoorSpec {
    double threshold_deg = 5.0;
    double init_lo_deg = 85.0;
    double init_hi_deg = 115.0;
    double hinge_x = 0.72;
    double hinge_y = 0.80;
    double length = 0.22;

    bool operator==(const CloseDoorSpec&) const = default;
};

struct TaskSpec {
    enum class Kind { PickPlace, CloseDoor };
    Kind kind = Kind::PickPlace;
    PickPlaceSpec pick_place;
    CloseDoorSpec close_door;
    std::string language_tag = "pick_place";

    bool operator==(const TaskSpec&) const = default;
};

struct WorldConfig {
    TaskSpec task;
    GapConfig gap;
    CameraConfig camera;
    Rect init_region;
    std::vector<ObjectSpec> object_set;
    int episode_horizon = 120;
    uint64_t seed_salt = 0;          // per-episode seeding rule
    double grasp_radius = 0.03;
    Pose2 ee_home = kEeHome;
    SourceKind domain_tag = SourceKind::RealProxy;
    std::string name = "world";

    Rect effective_init_region() const {
        return gap.init_region_override ? *gap.init_region_override : init_region;
    }

    bool operator==(const WorldConfig&) const = default;
};

struct WorldObject {
    int id = 0;
    Pose2 pose;
    double radius = 0.045;           // geometry_scale already applied
    std::string category;
    int instance = 0;
};

// Door geometry is copied into the state at reset so that stepping and
// rendering need no task context.
struct DoorState {
    double angle_deg = 0.0;          // 0 = closed
    double hinge_x = 0.72;
    double hinge_y = 0.80;
    double length = 0.22;
};

struct State {
    Pose2 ee_pose;
    double gripper = 0.0;            // open fraction; reset closed
    std::optional<int> held_object;
    std::vector<WorldObject> objects;
    std::optional<DoorState> door;
    int step_count = 0;

    std::optional<double> door_angle_deg() const {
        return door ? std::optional<double>(door->angle_deg) : std::nullopt;
    }
};

enum class SuccessLevel { Fail, Partial, Full };

inline double success_value(SuccessLevel s) {
    switch (s) {
        case SuccessLevel::Fail: return 0.0;
        case SuccessLevel::Partial: return 0.5;
        case SuccessLevel::Full: return 1.0;
    }
    return 0.0;
}

struct Image {
    int h = 0;
    int w = 0;
    std::vector<uint8_t> rgb;        // h*w*3 row-major

    bool operator==(const Image&) const = default;
};

struct PlacementFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ExpertFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TaskStateMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seed streams. Everything that replays an episode (generation, evaluation,
// segmentation) rebuilds the same streams from the stored episode seed.
// ---------------------------------------------------------------------------

uint64_t episode_seed_for(const WorldConfig& cfg, uint64_t run_seed, uint64_t index);
Rng world_stream(uint64_t episode_seed);   // execution noise
Rng policy_stream(uint64_t episode_seed);  // expert jitter / policy-side draws

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

void validate_config(const WorldConfig& cfg);  // throws ConfigError

// Draw order within reset: door angle (if any), then object positions in
// object_set order, x before y, rejection-resampled on overlap.
State reset(const WorldConfig& cfg, uint64_t episode_seed);

State step(const State& s, const Action& a, const WorldConfig& cfg, Rng& world_rng);

Image render(const State& s, const CameraConfig& cam, const GapConfig& gap);

SuccessLevel check_success(const State& s, const TaskSpec& task);

Action scripted_expert(const State& s, const TaskSpec& task,
                       const WorldConfig& cfg, Rng& expert_rng);

std::vector<double> proprio_of(const State& s);
ObservationFrame observe(const State& s, const WorldConfig& cfg);

CompositionManifest manifest_from_config(const WorldConfig& cfg);

// Closed-loop rollout shared by demo collection and policy evaluation.
using PolicyFn =
    std::function<Action(const State&, const ObservationFrame&, Rng&)>;

struct RolloutResult {
    Trajectory traj;                 // frames filled only when recording
    SuccessLevel final_success = SuccessLevel::Fail;
    State final_state;
};

RolloutResult rollout_episode(const WorldConfig& cfg, uint64_t episode_seed,
                              const PolicyFn& policy, bool record_frames);

// Runs the scripted expert until n successful episodes are recorded,
// discarding failures; attempt budget is 10*n.
Dataset collect_demos(const WorldConfig& cfg, int n, uint64_t seed);

}  // namespace cotrain
