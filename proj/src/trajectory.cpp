#include "cotrain/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cotrain/binio.hpp"

namespace cotrain {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

static constexpr char kMagic[5] = {'C', 'T', 'F', 'J', '1'};
static constexpr int kSchemaVersion = 1;

const char* to_string(SourceKind k) {
    switch (k) {
        case SourceKind::RealProxy: return "real_proxy";
        case SourceKind::DigitalCousin: return "digital_cousin";
        case SourceKind::Prior: return "prior";
    }
    return "real_proxy";
}

const char* to_string(Generator g) {
    return g == Generator::HumanProxy ? "human_proxy" : "mimicgen_lite";
}

SourceKind source_kind_from_string(const std::string& s) {
    if (s == "real_proxy") return SourceKind::RealProxy;
    if (s == "digital_cousin") return SourceKind::DigitalCousin;
    if (s == "prior") return SourceKind::Prior;
    throw DatasetIoError("corrupt manifest: unknown source kind '" + s + "'");
}

Generator generator_from_string(const std::string& s) {
    if (s == "human_proxy") return Generator::HumanProxy;
    if (s == "mimicgen_lite") return Generator::MimicGenLite;
    throw DatasetIoError("corrupt manifest: unknown generator '" + s + "'");
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<std::string> validate_trajectory(const Trajectory& t,
                                             const CompositionManifest& manifest) {
    std::vector<std::string> violations;
    if (t.frames.empty()) {
        violations.push_back("trajectory empty");
        return violations;
    }
    if (t.success != 0.0 && t.success != 0.5 && t.success != 1.0) {
        violations.push_back("success not in {0,0.5,1}");
    }
    if (!manifest.task_ids.contains(t.task_id)) {
        violations.push_back("task_id not in manifest: " + t.task_id);
    }
    const size_t proprio_dim = t.frames[0].obs.proprio.size();
    const size_t action_dim = t.frames[0].action.delta.size();
    const ActionBounds& bounds = action_bounds();
    for (size_t i = 0; i < t.frames.size(); ++i) {
        const Frame& f = t.frames[i];
        const std::string at = " at frame " + std::to_string(i);
        if (f.obs.image_h != manifest.camera.res_h ||
            f.obs.image_w != manifest.camera.res_w) {
            violations.push_back("image dims" + at);
        }
        if (f.obs.image.size() !=
            static_cast<size_t>(f.obs.image_h) * f.obs.image_w * 3) {
            violations.push_back("image buffer size" + at);
        }
        if (f.obs.proprio.size() != proprio_dim) {
            violations.push_back("proprio dim" + at);
        }
        if (f.action.delta.size() != action_dim) {
            violations.push_back("action dim" + at);
        }
        for (double v : f.obs.proprio) {
            if (!std::isfinite(v)) {
                violations.push_back("non-finite proprio" + at);
                break;
            }
        }
        if (f.action.delta.size() == 4) {
            const auto& d = f.action.delta;
            if (!std::isfinite(d[0]) || !std::isfinite(d[1]) ||
                !std::isfinite(d[2]) || !std::isfinite(d[3]) ||
                std::abs(d[0]) > bounds.max_xy + 1e-12 ||
                std::abs(d[1]) > bounds.max_xy + 1e-12 ||
                std::abs(d[2]) > bounds.max_theta + 1e-12 ||
                d[3] < -1e-12 || d[3] > 1.0 + 1e-12) {
                violations.push_back("action out of bounds" + at);
            }
        }
    }
    for (const ObjectRef& o : t.episode_objects) {
        if (!manifest.object_categories.contains(o.category)) {
            violations.push_back("episode object category not in manifest: " +
                                 o.category);
        }
    }
    return violations;
}

std::vector<std::string> validate_dataset(const Dataset& d) {
    std::vector<std::string> violations;
    if (d.manifest.init_region.area() <= 0.0) {
        violations.push_back("manifest init_region has non-positive area");
    }
    for (const auto& [cat, count] : d.manifest.object_instances) {
        if (count < 0) violations.push_back("negative instance count: " + cat);
    }
    int proprio_dim = -1;
    int action_dim = -1;
    for (size_t i = 0; i < d.trajectories.size(); ++i) {
        const Trajectory& t = d.trajectories[i];
        for (auto& v : validate_trajectory(t, d.manifest)) {
            violations.push_back("traj " + std::to_string(i) + ": " + v);
        }
        if (t.frames.empty()) continue;
        const int pd = static_cast<int>(t.frames[0].obs.proprio.size());
        const int ad = static_cast<int>(t.frames[0].action.delta.size());
        if (proprio_dim < 0) {
            proprio_dim = pd;
            action_dim = ad;
        } else if (pd != proprio_dim || ad != action_dim) {
            violations.push_back("traj " + std::to_string(i) +
                                 ": dims differ from dataset");
        }
    }
    return violations;
}

// ---------------------------------------------------------------------------
// JSON <-> manifest
// ---------------------------------------------------------------------------

static json rect_to_json(const Rect& r) {
    return json::array({r.x0, r.y0, r.x1, r.y1});
}

static Rect rect_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw DatasetIoError("corrupt manifest: bad rect");
    }
    return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                j[3].get<double>()};
}

static json pose_to_json(const Pose2& p) {
    return json::array({p.x, p.y, p.theta});
}

static Pose2 pose_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw DatasetIoError("corrupt manifest: bad pose");
    }
    return Pose2{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

static json camera_to_json(const CameraConfig& c) {
    json j;
    j["center"] = pose_to_json(c.center);
    j["window"] = json::array({c.window_w, c.window_h});
    j["resolution"] = json::array({c.res_h, c.res_w});
    return j;
}

static CameraConfig camera_from_json(const json& j) {
    CameraConfig c;
    c.center = pose_from_json(j.at("center"));
    c.window_w = j.at("window")[0].get<double>();
    c.window_h = j.at("window")[1].get<double>();
    c.res_h = j.at("resolution")[0].get<int>();
    c.res_w = j.at("resolution")[1].get<int>();
    return c;
}

static json manifest_to_json(const CompositionManifest& m) {
    json j;
    j["object_categories"] = m.object_categories;
    j["object_instances"] = m.object_instances;
    j["init_region"] = rect_to_json(m.init_region);
    j["camera"] = camera_to_json(m.camera);
    j["texture_ids"] = m.texture_ids;
    j["dynamics"] = {{"action_noise_std", m.dynamics.action_noise_std},
                     {"geometry_scale", m.dynamics.geometry_scale}};
    j["task_ids"] = m.task_ids;
    return j;
}

static CompositionManifest manifest_from_json(const json& j) {
    CompositionManifest m;
    for (const auto& c : j.at("object_categories")) {
        m.object_categories.insert(c.get<std::string>());
    }
    for (const auto& [k, v] : j.at("object_instances").items()) {
        m.object_instances[k] = v.get<int>();
    }
    m.init_region = rect_from_json(j.at("init_region"));
    m.camera = camera_from_json(j.at("camera"));
    for (const auto& t : j.at("texture_ids")) {
        m.texture_ids.insert(t.get<std::string>());
    }
    m.dynamics.action_noise_std = j.at("dynamics").at("action_noise_std").get<double>();
    m.dynamics.geometry_scale = j.at("dynamics").at("geometry_scale").get<double>();
    for (const auto& t : j.at("task_ids")) {
        m.task_ids.insert(t.get<std::string>());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Binary trajectory blobs
// ---------------------------------------------------------------------------

static void write_trajectory_blob(const Trajectory& t, const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DatasetIoError("cannot open for write: " + path.string());
    os.write(kMagic, sizeof(kMagic));
    const auto& first = t.frames.at(0);
    binio::write_u32(os, static_cast<uint32_t>(t.frames.size()));
    binio::write_u32(os, static_cast<uint32_t>(first.obs.image_h));
    binio::write_u32(os, static_cast<uint32_t>(first.obs.image_w));
    binio::write_u32(os, static_cast<uint32_t>(first.obs.proprio.size()));
    binio::write_u32(os, static_cast<uint32_t>(first.action.delta.size()));
    for (const Frame& f : t.frames) {
        os.write(reinterpret_cast<const char*>(f.obs.image.data()),
                 static_cast<std::streamsize>(f.obs.image.size()));
        for (double v : f.obs.proprio) binio::write_f64(os, v);
        for (double v : f.action.delta) binio::write_f64(os, v);
    }
    if (!os) throw DatasetIoError("write failed: " + path.string());
}

static void read_trajectory_blob(Trajectory& t, const fs::path& path,
                                 int expect_h, int expect_w) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DatasetIoError("missing trajectory file: " + path.string());
    char magic[5];
    if (!is.read(magic, sizeof(magic)) ||
        std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DatasetIoError("corrupt trajectory: bad magic in " + path.string());
    }
    uint32_t frame_count, h, w, proprio_dim, action_dim;
    if (!binio::read_u32(is, frame_count) || !binio::read_u32(is, h) ||
        !binio::read_u32(is, w) || !binio::read_u32(is, proprio_dim) ||
        !binio::read_u32(is, action_dim)) {
        throw DatasetIoError("corrupt trajectory: short header in " + path.string());
    }
    if (static_cast<int>(h) != expect_h || static_cast<int>(w) != expect_w) {
        throw DatasetIoError("dimension mismatch: " + path.string());
    }
    if (frame_count == 0 || frame_count > 1000000) {
        throw DatasetIoError("corrupt trajectory: bad frame count in " +
                             path.string());
    }
    t.frames.resize(frame_count);
    const size_t image_bytes = static_cast<size_t>(h) * w * 3;
    for (Frame& f : t.frames) {
        f.obs.image_h = static_cast<int>(h);
        f.obs.image_w = static_cast<int>(w);
        f.obs.image.resize(image_bytes);
        if (!is.read(reinterpret_cast<char*>(f.obs.image.data()),
                     static_cast<std::streamsize>(image_bytes))) {
            throw DatasetIoError("corrupt trajectory: truncated image in " +
                                 path.string());
        }
        f.obs.proprio.resize(proprio_dim);
        for (double& v : f.obs.proprio) {
            if (!binio::read_f64(is, v)) {
                throw DatasetIoError("corrupt trajectory: truncated proprio in " +
                                     path.string());
            }
        }
        f.action.delta.resize(action_dim);
        for (double& v : f.action.delta) {
            if (!binio::read_f64(is, v)) {
                throw DatasetIoError("corrupt trajectory: truncated action in " +
                                     path.string());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// save / load
// ---------------------------------------------------------------------------

void save_dataset(const Dataset& d, const std::string& dir) {
    fs::create_directories(dir);
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = d.name;
    j["source"] = to_string(d.source);
    j["composition"] = manifest_to_json(d.manifest);
    json trajs = json::array();
    for (size_t i = 0; i < d.trajectories.size(); ++i) {
        const Trajectory& t = d.trajectories[i];
        json tj;
        tj["file"] = "traj_" + std::to_string(i) + ".bin";
        tj["task_id"] = t.task_id;
        tj["success"] = t.success;
        tj["seed"] = t.seed;
        tj["generator"] = to_string(t.generator);
        json objs = json::array();
        for (const ObjectRef& o : t.episode_objects) {
            objs.push_back({{"category", o.category}, {"instance", o.instance}});
        }
        tj["objects"] = objs;
        trajs.push_back(tj);
        write_trajectory_blob(t, fs::path(dir) / tj["file"].get<std::string>());
    }
    j["trajectories"] = trajs;
    std::ofstream os(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!os) throw DatasetIoError("cannot write manifest in " + dir);
    os << j.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream is(manifest_path, std::ios::binary);
    if (!is) throw DatasetIoError("missing manifest: " + manifest_path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DatasetIoError(std::string("corrupt manifest: ") + e.what());
    }
    Dataset d;
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw DatasetIoError("corrupt manifest: unsupported schema_version");
        }
        d.name = j.at("name").get<std::string>();
        d.source = source_kind_from_string(j.at("source").get<std::string>());
        d.manifest = manifest_from_json(j.at("composition"));
        for (const auto& tj : j.at("trajectories")) {
            Trajectory t;
            t.task_id = tj.at("task_id").get<std::string>();
            t.success = tj.at("success").get<double>();
            t.seed = tj.at("seed").get<uint64_t>();
            t.generator = generator_from_string(tj.at("generator").get<std::string>());
            t.source = d.source;
            for (const auto& oj : tj.at("objects")) {
                t.episode_objects.push_back(ObjectRef{
                    oj.at("category").get<std::string>(),
                    oj.at("instance").get<int>()});
            }
            read_trajectory_blob(t, fs::path(dir) / tj.at("file").get<std::string>(),
                                 d.manifest.camera.res_h, d.manifest.camera.res_w);
            d.trajectories.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw DatasetIoError(std::string("corrupt manifest: ") + e.what());
    }
    return d;
}

// ---------------------------------------------------------------------------
// concat / prefix
// ---------------------------------------------------------------------------

static Dataset concat_impl(const Dataset& a, const Dataset& b, SourceKind tag) {
    if (!a.trajectories.empty() && !b.trajectories.empty()) {
        if (a.proprio_dim() != b.proprio_dim() || a.action_dim() != b.action_dim() ||
            a.image_h() != b.image_h() || a.image_w() != b.image_w()) {
            throw DatasetIoError("dimension mismatch in concat");
        }
    }
    Dataset out;
    out.source = tag;
    out.name = a.name.empty() ? b.name
               : b.name.empty() ? a.name
                                : a.name + "+" + b.name;
    out.trajectories = a.trajectories;
    out.trajectories.insert(out.trajectories.end(), b.trajectories.begin(),
                            b.trajectories.end());
    CompositionManifest m = a.manifest;
    m.object_categories.insert(b.manifest.object_categories.begin(),
                               b.manifest.object_categories.end());
    for (const auto& [cat, count] : b.manifest.object_instances) {
        auto it = m.object_instances.find(cat);
        if (it == m.object_instances.end()) {
            m.object_instances[cat] = count;
        } else {
            it->second = std::max(it->second, count);
        }
    }
    // Bounding box of both init regions.
    const Rect& ra = a.manifest.init_region;
    const Rect& rb = b.manifest.init_region;
    m.init_region = Rect{std::min(ra.x0, rb.x0), std::min(ra.y0, rb.y0),
                         std::max(ra.x1, rb.x1), std::max(ra.y1, rb.y1)};
    m.texture_ids.insert(b.manifest.texture_ids.begin(),
                         b.manifest.texture_ids.end());
    m.task_ids.insert(b.manifest.task_ids.begin(), b.manifest.task_ids.end());
    out.manifest = std::move(m);
    return out;
}

Dataset concat_datasets(const Dataset& a, const Dataset& b) {
    if (a.source != b.source) {
        throw DatasetIoError("source tag mismatch in concat; pass an override tag");
    }
    return concat_impl(a, b, a.source);
}

Dataset concat_datasets(const Dataset& a, const Dataset& b, SourceKind tag_override) {
    return concat_impl(a, b, tag_override);
}

Dataset dataset_prefix(const Dataset& d, size_t n) {
    Dataset out = d;
    if (out.trajectories.size() > n) out.trajectories.resize(n);
    return out;
}

}  // namespace cotrain
