#include "cotrain/mimicgen.hpp"

#include <algorithm>
#include <cmath>

namespace cotrain {

// ---------------------------------------------------------------------------
// replay / segmentation
// ---------------------------------------------------------------------------

std::vector<State> replay_states(const Trajectory& t, const WorldConfig& cfg) {
    std::vector<State> states;
    states.reserve(t.frames.size() + 1);
    State s = reset(cfg, t.seed);
    Rng wrng = world_stream(t.seed);
    states.push_back(s);
    for (const Frame& f : t.frames) {
        s = step(s, f.action, cfg, wrng);
        states.push_back(s);
    }
    return states;
}

std::vector<SubtaskBoundary> detect_boundaries(const Trajectory& t,
                                               const std::vector<State>& states) {
    std::vector<SubtaskBoundary> boundaries;
    const int n = static_cast<int>(t.frames.size());
    if (states.size() != static_cast<size_t>(n) + 1) {
        throw SegmentationError("unsegmentable demo: replay length mismatch");
    }
    if (states.front().door) {
        // Door demos form a single segment ending at the last frame.
        boundaries.push_back(SubtaskBoundary{
            SubtaskBoundary::Kind::DoorContactEnd, kRefDoorHinge, n - 1});
        return boundaries;
    }
    for (int i = 0; i < n; ++i) {
        const bool held_before = states[i].held_object.has_value();
        const bool held_after = states[i + 1].held_object.has_value();
        if (!held_before && held_after) {
            boundaries.push_back(SubtaskBoundary{SubtaskBoundary::Kind::GraspEvent,
                                                 *states[i + 1].held_object, i});
        } else if (held_before && !held_after) {
            boundaries.push_back(SubtaskBoundary{SubtaskBoundary::Kind::ReleaseEvent,
                                                 *states[i].held_object, i});
        }
    }
    if (boundaries.empty()) {
        throw SegmentationError("unsegmentable demo: no grasp/release/door events");
    }
    // The final segment always extends to the last frame.
    if (boundaries.back().frame_index != n - 1) {
        boundaries.back().frame_index = n - 1;
    }
    return boundaries;
}

namespace {

Segment slice_segment(const Trajectory& t, const std::vector<State>& states,
                      int first_frame, int last_frame, int reference_object,
                      const Pose2& reference_pose) {
    Segment seg;
    seg.start_frame = first_frame;
    seg.reference_object = reference_object;
    seg.reference_pose = reference_pose;
    for (int i = first_frame; i <= last_frame; ++i) {
        seg.ee_poses.push_back(states[i].ee_pose);
        seg.gripper_cmds.push_back(t.frames[i].action.delta.size() >= 4
                                       ? t.frames[i].action.delta[3]
                                       : 1.0);
    }
    seg.ee_poses.push_back(states[last_frame + 1].ee_pose);
    return seg;
}

}  // namespace

std::vector<Segment> segment_source(const Trajectory& t,
                                    const std::vector<State>& states,
                                    const WorldConfig& cfg) {
    const auto boundaries = detect_boundaries(t, states);
    std::vector<Segment> segments;
    int cursor = 0;
    for (const SubtaskBoundary& b : boundaries) {
        switch (b.kind) {
            case SubtaskBoundary::Kind::GraspEvent: {
                // Approach + grasp, anchored to the grasped object's initial pose.
                const WorldObject* obj = nullptr;
                for (const WorldObject& o : states[cursor].objects) {
                    if (o.id == b.object_id) obj = &o;
                }
                if (!obj) throw SegmentationError("unsegmentable demo: missing object");
                segments.push_back(slice_segment(t, states, cursor, b.frame_index,
                                                 b.object_id, obj->pose));
                break;
            }
            case SubtaskBoundary::Kind::ReleaseEvent: {
                // Carry + place, anchored to the target region center.
                const Rect& tgt = cfg.task.pick_place.target_region;
                segments.push_back(slice_segment(t, states, cursor, b.frame_index,
                                                 kRefTargetRegion,
                                                 Pose2{tgt.cx(), tgt.cy(), 0.0}));
                break;
            }
            case SubtaskBoundary::Kind::DoorContactEnd: {
                const DoorState& door = *states.front().door;
                segments.push_back(slice_segment(
                    t, states, cursor, b.frame_index, kRefDoorHinge,
                    Pose2{door.hinge_x, door.hinge_y, deg_to_rad(door.angle_deg)}));
                break;
            }
        }
        cursor = b.frame_index + 1;
    }
    return segments;
}

// ---------------------------------------------------------------------------
// retarget / stitch
// ---------------------------------------------------------------------------

Segment transform_segment(const Segment& seg, const Pose2& new_reference_pose) {
    const Pose2 t = compose(new_reference_pose, inverse(seg.reference_pose));
    Segment out = seg;
    out.reference_pose = new_reference_pose;
    for (Pose2& p : out.ee_poses) {
        p = compose(t, p);
        if (p.x < kTableMin || p.x > kTableMax || p.y < kTableMin ||
            p.y > kTableMax) {
            throw OutOfWorkspace("out of workspace");
        }
    }
    return out;
}

std::vector<Action> connect(const Pose2& prev_end, const Pose2& next_start,
                            double max_step, double gripper_cmd) {
    const double dx = next_start.x - prev_end.x;
    const double dy = next_start.y - prev_end.y;
    const double dtheta = wrap_angle(next_start.theta - prev_end.theta);
    const double d_xy = std::sqrt(dx * dx + dy * dy);
    if (d_xy == 0.0 && dtheta == 0.0) return {};
    const int n = std::max({static_cast<int>(std::ceil(d_xy / max_step)),
                            static_cast<int>(std::ceil(std::abs(dtheta) /
                                                       action_bounds().max_theta)),
                            1});
    std::vector<Action> actions;
    actions.reserve(n);
    for (int i = 0; i < n; ++i) {
        actions.push_back(make_action(dx / n, dy / n, dtheta / n, gripper_cmd));
    }
    return actions;
}

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

namespace {

Pose2 anchor_pose_in(const State& s, const Segment& seg, const WorldConfig& cfg) {
    if (seg.reference_object == kRefTargetRegion) {
        const Rect& tgt = cfg.task.pick_place.target_region;
        return Pose2{tgt.cx(), tgt.cy(), 0.0};
    }
    if (seg.reference_object == kRefDoorHinge) {
        const DoorState& door = *s.door;
        return Pose2{door.hinge_x, door.hinge_y, deg_to_rad(door.angle_deg)};
    }
    for (const WorldObject& obj : s.objects) {
        if (obj.id == seg.reference_object) return obj.pose;
    }
    throw SegmentationError("reference object missing from episode");
}

std::vector<Action> actions_of(const Segment& seg) {
    std::vector<Action> actions;
    actions.reserve(seg.gripper_cmds.size());
    for (size_t i = 0; i < seg.gripper_cmds.size(); ++i) {
        const Pose2& a = seg.ee_poses[i];
        const Pose2& b = seg.ee_poses[i + 1];
        actions.push_back(make_action(b.x - a.x, b.y - a.y,
                                      wrap_angle(b.theta - a.theta),
                                      seg.gripper_cmds[i]));
    }
    return actions;
}

}  // namespace

AttemptResult generate_attempt(const std::vector<std::vector<Segment>>& source_segments,
                               int source_index, const WorldConfig& cfg,
                               uint64_t episode_seed) {
    AttemptResult result;
    State s0 = reset(cfg, episode_seed);

    // Retarget every segment to this episode's anchors, then build the full
    // open-loop action plan with stitches between segments.
    std::vector<Action> plan;
    try {
        Pose2 cursor = s0.ee_pose;
        for (const Segment& seg : source_segments[source_index]) {
            const Segment moved =
                transform_segment(seg, anchor_pose_in(s0, seg, cfg));
            // Stitches carry the gripper command the next segment opens
            // with: open on the way to an approach, closed while bridging a
            // grasp into its carry.
            const double bridge_grip = moved.gripper_cmds.front();
            for (const Action& a :
                 connect(cursor, moved.ee_poses.front(), kConnectMaxStep, bridge_grip)) {
                plan.push_back(a);
            }
            for (const Action& a : actions_of(moved)) plan.push_back(a);
            cursor = moved.ee_poses.back();
        }
    } catch (const OutOfWorkspace&) {
        result.out_of_workspace = true;
        return result;
    }

    // Execute open loop, recording observations as a fresh trajectory.
    Trajectory traj;
    traj.task_id = cfg.task.language_tag;
    traj.seed = episode_seed;
    traj.source = cfg.domain_tag;
    traj.generator = Generator::MimicGenLite;
    for (const WorldObject& obj : s0.objects) {
        traj.episode_objects.push_back(ObjectRef{obj.category, obj.instance});
    }

    State s = s0;
    Rng wrng = world_stream(episode_seed);
    SuccessLevel succ = SuccessLevel::Fail;
    for (const Action& a : plan) {
        if (s.step_count >= cfg.episode_horizon) break;
        traj.frames.push_back(Frame{observe(s, cfg), a});
        s = step(s, a, cfg, wrng);
        succ = check_success(s, cfg.task);
        if (succ == SuccessLevel::Full) break;
    }
    if (succ == SuccessLevel::Full && !traj.frames.empty()) {
        traj.success = 1.0;
        result.success = true;
        result.traj = std::move(traj);
    }
    return result;
}

std::pair<Dataset, GenerationReport> generate(const Dataset& sources,
                                              const WorldConfig& cfg,
                                              int n_target, uint64_t seed) {
    if (sources.trajectories.empty()) {
        throw SegmentationError("generate requires a nonempty source dataset");
    }
    if (n_target < 0) throw ConfigError("generate requires n_target >= 0");

    std::vector<std::vector<Segment>> source_segments;
    source_segments.reserve(sources.trajectories.size());
    for (const Trajectory& t : sources.trajectories) {
        source_segments.push_back(segment_source(t, replay_states(t, cfg), cfg));
    }

    Dataset out;
    out.source = cfg.domain_tag;
    out.name = cfg.name + "_gen";
    out.manifest = manifest_from_config(cfg);

    GenerationReport report;
    const int budget = kGenerateBudgetFactor * n_target;
    while (report.successes < n_target && report.attempts < budget) {
        const uint64_t attempt_seed = episode_seed_for(
            cfg, mix_seed({seed, hash_str("gen")}), static_cast<uint64_t>(report.attempts));
        report.per_attempt_seeds.push_back(attempt_seed);
        // Source selection: the demo whose first-segment anchor sits closest
        // to the new episode's anchor. Small anchor deltas keep the stitch
        // legs short and the retargeted paths near the demonstrated ones.
        const State preview = reset(cfg, attempt_seed);
        int src = 0;
        double best = 1e18;
        for (size_t k = 0; k < source_segments.size(); ++k) {
            const Segment& head = source_segments[k].front();
            const Pose2 anchor = anchor_pose_in(preview, head, cfg);
            const double d =
                dist2(anchor.x, anchor.y, head.reference_pose.x, head.reference_pose.y) +
                sq(wrap_angle(anchor.theta - head.reference_pose.theta));
            if (d < best) {
                best = d;
                src = static_cast<int>(k);
            }
        }
        ++report.attempts;

        AttemptResult attempt =
            generate_attempt(source_segments, src, cfg, attempt_seed);
        if (attempt.success) {
            ++report.successes;
            out.trajectories.push_back(std::move(attempt.traj));
        } else if (attempt.out_of_workspace) {
            ++report.discarded_workspace;
        } else {
            ++report.discarded_replay;
        }
    }
    report.budget_exhausted = report.successes < n_target;
    return {std::move(out), report};
}

}  // namespace cotrain
