#include <doctest.h>

#include <cmath>

#include "cotrain/analyzer.hpp"
#include "cotrain/presets.hpp"
#include "cotrain/toyworld.hpp"
#include "test_helpers.hpp"

using namespace cotrain;

namespace {

CompositionManifest random_manifest(Rng& rng) {
    CompositionManifest m = testing::synthetic_manifest();
    m.camera.center = make_pose(rng.uniform(0, 1), rng.uniform(0, 1),
                                rng.uniform(-kPi, kPi));
    const double x0 = rng.uniform(0.0, 0.5), y0 = rng.uniform(0.0, 0.5);
    m.init_region = Rect{x0, y0, x0 + rng.uniform(0.1, 0.5),
                         y0 + rng.uniform(0.1, 0.5)};
    m.dynamics.action_noise_std = rng.uniform(0.0, 0.01);
    m.dynamics.geometry_scale = rng.uniform(0.8, 1.2);
    if (rng.uniform() < 0.5) m.object_categories.insert("can");
    if (rng.uniform() < 0.5) m.task_ids.insert("task_b");
    return m;
}

}  // namespace

TEST_SUITE("analyzer") {

TEST_CASE("summarize recounts collected demos to the stored manifest") {
    const WorldConfig cfg = preset_pick_place_dc();
    const Dataset d = collect_demos(cfg, 8, 90);
    const CompositionManifest m = summarize(d);
    CHECK(m.object_categories == d.manifest.object_categories);
    CHECK(m.object_instances == d.manifest.object_instances);
    CHECK(m.task_ids == d.manifest.task_ids);
    CHECK(m.init_region == d.manifest.init_region);
    CHECK(m.camera == d.manifest.camera);
}

TEST_CASE("single-category datasets summarize to that category") {
    WorldConfig cfg = preset_pick_place_real();
    cfg.object_set = {ObjectSpec{"cup", 0, 0.045}};
    const Dataset d = collect_demos(cfg, 3, 91);
    const CompositionManifest m = summarize(d);
    CHECK(m.object_categories == std::set<std::string>{"cup"});
    CHECK(m.object_instances.at("cup") == 1);
    CHECK(!m.object_categories.empty());
}

TEST_CASE("diff of a manifest with itself is the zero delta") {
    Rng rng(92);
    const CompositionManifest m = random_manifest(rng);
    const CompositionDelta d = diff(m, m);
    CHECK(d.camera_translation_delta == 0.0);
    CHECK(d.camera_rotation_delta_deg == 0.0);
    CHECK(d.init_region_iou == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.a_only_categories == 0);
    CHECK(d.b_only_categories == 0);
    CHECK(d.shared_categories == static_cast<int>(m.object_categories.size()));
    CHECK(d.action_noise_delta == 0.0);
    CHECK(d.geometry_scale_delta == 0.0);
}

TEST_CASE("camera deltas report euclidean distance and wrapped degrees") {
    CompositionManifest a = testing::synthetic_manifest();
    CompositionManifest b = a;
    a.camera.center = Pose2{0.0, 0.0, 0.0};
    b.camera.center = Pose2{0.3, 0.0, deg_to_rad(20.0)};
    const CompositionDelta d = diff(a, b);
    CHECK(d.camera_translation_delta == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(d.camera_rotation_delta_deg == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("init-region IoU matches the area oracle") {
    CompositionManifest a = testing::synthetic_manifest();
    CompositionManifest b = a;
    a.init_region = Rect{0, 0, 1, 1};
    b.init_region = Rect{0.5, 0, 1.5, 1};
    // Oracle: intersection 0.5, union 1.5.
    CHECK(diff(a, b).init_region_iou == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("diff is symmetric up to swapping the one-sided counts") {
    Rng rng(93);
    for (int i = 0; i < 30; ++i) {
        const CompositionManifest a = random_manifest(rng);
        const CompositionManifest b = random_manifest(rng);
        const CompositionDelta ab = diff(a, b);
        const CompositionDelta ba = diff(b, a);
        CHECK(ab.camera_translation_delta == ba.camera_translation_delta);
        CHECK(ab.camera_rotation_delta_deg ==
              doctest::Approx(ba.camera_rotation_delta_deg).epsilon(1e-12));
        CHECK(ab.init_region_iou == doctest::Approx(ba.init_region_iou).epsilon(1e-12));
        CHECK(ab.action_noise_delta == ba.action_noise_delta);
        CHECK(ab.shared_categories == ba.shared_categories);
        CHECK(ab.a_only_categories == ba.b_only_categories);
        CHECK(ab.b_only_categories == ba.a_only_categories);
    }
}

TEST_CASE("camera translation deltas obey the triangle inequality") {
    Rng rng(94);
    for (int i = 0; i < 30; ++i) {
        const CompositionManifest a = random_manifest(rng);
        const CompositionManifest b = random_manifest(rng);
        const CompositionManifest c = random_manifest(rng);
        const double ab = diff(a, b).camera_translation_delta;
        const double bc = diff(b, c).camera_translation_delta;
        const double ac = diff(a, c).camera_translation_delta;
        CHECK(ac <= ab + bc + 1e-12);
    }
}

}  // TEST_SUITE analyzer
