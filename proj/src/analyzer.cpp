#include "cotrain/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cotrain/pose.hpp"

namespace cotrain {

CompositionManifest summarize(const Dataset& d) {
    CompositionManifest m;
    m.init_region = d.manifest.init_region;
    m.camera = d.manifest.camera;
    m.texture_ids = d.manifest.texture_ids;
    m.dynamics = d.manifest.dynamics;
    std::map<std::string, std::set<int>> instances;
    for (const Trajectory& t : d.trajectories) {
        m.task_ids.insert(t.task_id);
        for (const ObjectRef& o : t.episode_objects) {
            m.object_categories.insert(o.category);
            instances[o.category].insert(o.instance);
        }
    }
    for (const auto& [cat, ids] : instances) {
        m.object_instances[cat] = static_cast<int>(ids.size());
    }
    return m;
}

namespace {

template <typename T>
void overlap_counts(const std::set<T>& a, const std::set<T>& b, int& shared,
                    int& a_only, int& b_only) {
    shared = 0;
    for (const T& v : a) {
        if (b.contains(v)) ++shared;
    }
    a_only = static_cast<int>(a.size()) - shared;
    b_only = static_cast<int>(b.size()) - shared;
}

}  // namespace

CompositionDelta diff(const CompositionManifest& a, const CompositionManifest& b) {
    CompositionDelta d;
    overlap_counts(a.object_categories, b.object_categories, d.shared_categories,
                   d.a_only_categories, d.b_only_categories);
    overlap_counts(a.task_ids, b.task_ids, d.shared_tasks, d.a_only_tasks,
                   d.b_only_tasks);

    d.camera_translation_delta = dist(a.camera.center.x, a.camera.center.y,
                                      b.camera.center.x, b.camera.center.y);
    d.camera_rotation_delta_deg =
        std::abs(rad_to_deg(wrap_angle(a.camera.center.theta - b.camera.center.theta)));

    const double inter = intersection_area(a.init_region, b.init_region);
    const double uni = a.init_region.area() + b.init_region.area() - inter;
    d.init_region_iou = uni > 0.0 ? inter / uni : 0.0;

    d.action_noise_delta =
        std::abs(a.dynamics.action_noise_std - b.dynamics.action_noise_std);
    d.geometry_scale_delta =
        std::abs(a.dynamics.geometry_scale - b.dynamics.geometry_scale);
    return d;
}

}  // namespace cotrain
