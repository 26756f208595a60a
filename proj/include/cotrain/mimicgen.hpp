#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cotrain/toyworld.hpp"

namespace cotrain {

// ---------------------------------------------------------------------------
// Demonstration multiplication: segment source demos into object-centric
// pieces, rigidly retarget each piece to fresh object poses, stitch with
// linear interpolation, replay open loop, keep only full successes.
// ---------------------------------------------------------------------------

inline constexpr double kConnectMaxStep = 0.02;     // meters per stitch step
inline constexpr int kGenerateBudgetFactor = 20;    // attempts per requested success

// Reference ids for segments anchored to static scene features.
inline constexpr int kRefTargetRegion = -1;
inline constexpr int kRefDoorHinge = -2;

struct SubtaskBoundary {
    enum class Kind { GraspEvent, ReleaseEvent, DoorContactEnd };
    Kind kind = Kind::GraspEvent;
    int object_id = 0;
    int frame_index = 0;   // index of the action that completes the subtask
};

struct Segment {
    // n actions are represented as n+1 end-effector poses plus the n gripper
    // commands executed between them; actions are recovered by finite
    // differences after retargeting.
    std::vector<Pose2> ee_poses;
    std::vector<double> gripper_cmds;
    int reference_object = 0;       // object id, or kRef* for static anchors
    Pose2 reference_pose;           // anchor pose at segment start in the source
    int start_frame = 0;

    int action_count() const { return static_cast<int>(gripper_cmds.size()); }
};

struct GenerationReport {
    int attempts = 0;
    int successes = 0;
    int discarded_workspace = 0;
    int discarded_replay = 0;
    bool budget_exhausted = false;
    std::vector<uint64_t> per_attempt_seeds;

    double generation_success_rate() const {
        return attempts > 0 ? static_cast<double>(successes) / attempts : 0.0;
    }
};

struct SegmentationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfWorkspace : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Re-derives the state sequence of a stored trajectory (length n+1 for n
// frames) by replaying its actions from its stored episode seed.
std::vector<State> replay_states(const Trajectory& t, const WorldConfig& cfg);

std::vector<SubtaskBoundary> detect_boundaries(const Trajectory& t,
                                               const std::vector<State>& episode_replay);

std::vector<Segment> segment_source(const Trajectory& t,
                                    const std::vector<State>& episode_replay,
                                    const WorldConfig& cfg);

// Rigidly maps the segment so its anchor moves to new_reference_pose; throws
// OutOfWorkspace if any retargeted ee position leaves the table.
Segment transform_segment(const Segment& seg, const Pose2& new_reference_pose);

// Straight-line stitch in (x, y, theta); per-step xy displacement <= max_step.
// Returned actions carry the given gripper command.
std::vector<Action> connect(const Pose2& prev_end, const Pose2& next_start,
                            double max_step, double gripper_cmd);

// One retarget-and-replay attempt into the episode given by episode_seed.
// Returns the recorded trajectory when the replay reaches full success.
struct AttemptResult {
    bool out_of_workspace = false;
    bool success = false;
    Trajectory traj;
};
AttemptResult generate_attempt(const std::vector<std::vector<Segment>>& source_segments,
                               int source_index, const WorldConfig& cfg,
                               uint64_t episode_seed);

std::pair<Dataset, GenerationReport> generate(const Dataset& sources,
                                              const WorldConfig& cfg,
                                              int n_target, uint64_t seed);

}  // namespace cotrain
