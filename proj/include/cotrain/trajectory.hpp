#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotrain/pose.hpp"

namespace cotrain {

// ---------------------------------------------------------------------------
// Core data model shared by every module: trajectories, datasets, manifests.
// ---------------------------------------------------------------------------

enum class SourceKind { RealProxy, DigitalCousin, Prior };
enum class Generator { HumanProxy, MimicGenLite };

const char* to_string(SourceKind k);
const char* to_string(Generator g);
SourceKind source_kind_from_string(const std::string& s);
Generator generator_from_string(const std::string& s);

// Per-step command bounds shared across the domain: dx/dy/dtheta are deltas,
// the fourth component is an absolute gripper command in [0, 1].
struct ActionBounds {
    double max_xy = 0.05;       // meters per step
    double max_theta = 0.2618;  // radians per step (~15 deg)
};

inline const ActionBounds& action_bounds() {
    static const ActionBounds b{};
    return b;
}

struct CameraConfig {
    Pose2 center;             // view window pose over the table
    double window_w = 0.64;   // meters
    double window_h = 0.64;
    int res_h = 32;
    int res_w = 32;

    bool operator==(const CameraConfig&) const = default;
};

struct DynamicsParams {
    double action_noise_std = 0.0;
    double geometry_scale = 1.0;

    bool operator==(const DynamicsParams&) const = default;
};

struct ObservationFrame {
    int image_h = 0;
    int image_w = 0;
    std::vector<uint8_t> image;    // h*w*3 row-major RGB
    std::vector<double> proprio;   // ee x, y, theta, gripper open fraction

    bool operator==(const ObservationFrame&) const = default;
};

struct Action {
    // dx, dy, dtheta, gripper command
    std::vector<double> delta;

    bool operator==(const Action&) const = default;
};

inline Action make_action(double dx, double dy, double dtheta, double gripper) {
    return Action{{dx, dy, dtheta, gripper}};
}

struct Frame {
    ObservationFrame obs;
    Action action;

    bool operator==(const Frame&) const = default;
};

// Object identity present in one episode; lets composition statistics be
// recounted from trajectories without replaying them.
struct ObjectRef {
    std::string category;
    int instance = 0;

    auto operator<=>(const ObjectRef&) const = default;
};

struct Trajectory {
    std::vector<Frame> frames;
    std::string task_id;
    double success = 0.0;              // in {0.0, 0.5, 1.0}
    SourceKind source = SourceKind::RealProxy;
    uint64_t seed = 0;                 // episode seed; replays the episode
    Generator generator = Generator::HumanProxy;
    std::vector<ObjectRef> episode_objects;

    bool operator==(const Trajectory&) const = default;
};

struct CompositionManifest {
    std::set<std::string> object_categories;
    std::map<std::string, int> object_instances;  // per-category counts
    Rect init_region;
    CameraConfig camera;       // effective camera (gap offset already applied)
    std::set<std::string> texture_ids;
    DynamicsParams dynamics;
    std::set<std::string> task_ids;

    bool operator==(const CompositionManifest&) const = default;
};

struct Dataset {
    std::vector<Trajectory> trajectories;
    CompositionManifest manifest;
    SourceKind source = SourceKind::RealProxy;
    std::string name;

    bool operator==(const Dataset&) const = default;

    int image_h() const { return manifest.camera.res_h; }
    int image_w() const { return manifest.camera.res_w; }
    int proprio_dim() const {
        return trajectories.empty() || trajectories[0].frames.empty()
                   ? 0
                   : static_cast<int>(trajectories[0].frames[0].obs.proprio.size());
    }
    int action_dim() const {
        return trajectories.empty() || trajectories[0].frames.empty()
                   ? 0
                   : static_cast<int>(trajectories[0].frames[0].action.delta.size());
    }
    size_t total_frames() const {
        size_t n = 0;
        for (const auto& t : trajectories) n += t.frames.size();
        return n;
    }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

struct DatasetIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Returns the list of invariant violations; empty means the trajectory is
// well formed under the given manifest. Violations are returned, not thrown.
std::vector<std::string> validate_trajectory(const Trajectory& t,
                                             const CompositionManifest& manifest);

std::vector<std::string> validate_dataset(const Dataset& d);

// On-disk container: <dir>/manifest.json plus one little-endian binary blob
// per trajectory (traj_<index>.bin). load(save(d)) == d bit-exactly.
void save_dataset(const Dataset& d, const std::string& dir);
Dataset load_dataset(const std::string& dir);

// Pools two datasets. Observation/action dimensions must match; the source
// tag must match unless tag_override is given. Manifest fields are unions.
Dataset concat_datasets(const Dataset& a, const Dataset& b);
Dataset concat_datasets(const Dataset& a, const Dataset& b, SourceKind tag_override);

// First n trajectories with the same manifest; n may exceed the count.
Dataset dataset_prefix(const Dataset& d, size_t n);

}  // namespace cotrain
