#pragma once

#include "cotrain/trajectory.hpp"

namespace cotrain {

// ---------------------------------------------------------------------------
// Dataset composition statistics and pairwise factor deltas.
// ---------------------------------------------------------------------------

struct CompositionDelta {
    int shared_categories = 0;
    int a_only_categories = 0;
    int b_only_categories = 0;
    double camera_translation_delta = 0.0;   // meters
    double camera_rotation_delta_deg = 0.0;  // absolute wrapped difference
    double init_region_iou = 0.0;
    double action_noise_delta = 0.0;
    double geometry_scale_delta = 0.0;
    int shared_tasks = 0;
    int a_only_tasks = 0;
    int b_only_tasks = 0;
};

// Recomputes the manifest from trajectory contents (categories, instances,
// task ids) plus the stored scene factors that trajectories cannot carry
// (regions, camera, textures, dynamics).
CompositionManifest summarize(const Dataset& d);

CompositionDelta diff(const CompositionManifest& a, const CompositionManifest& b);

}  // namespace cotrain
