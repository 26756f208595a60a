#include "cotrain/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cotrain/mimicgen.hpp"

namespace cotrain {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::MixTable: return "mix_table";
        case Protocol::RatioSweep: return "ratio_sweep";
        case Protocol::RealScaling: return "real_scaling";
        case Protocol::SimQuantity: return "sim_quantity";
        case Protocol::CameraAblation: return "camera_ablation";
        case Protocol::UnseenPositions: return "unseen_positions";
        case Protocol::UnseenObjects: return "unseen_objects";
    }
    return "mix_table";
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "mix_table") return Protocol::MixTable;
    if (s == "ratio_sweep") return Protocol::RatioSweep;
    if (s == "real_scaling") return Protocol::RealScaling;
    if (s == "sim_quantity") return Protocol::SimQuantity;
    if (s == "camera_ablation") return Protocol::CameraAblation;
    if (s == "unseen_positions") return Protocol::UnseenPositions;
    if (s == "unseen_objects") return Protocol::UnseenObjects;
    throw ConfigError("unknown protocol: " + s);
}

int harness_thread_count() {
    if (const char* env = std::getenv("COTRAIN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

namespace {

using DatasetPtr = std::shared_ptr<const Dataset>;

// One training run against one evaluation world.
struct Cell {
    std::string condition;
    uint64_t seed = 0;
    MixtureSpec mixture;
    WorldConfig eval_world;
};

TrainConfig cell_train_config(const HarnessTrainParams& p, uint64_t seed) {
    TrainConfig c;
    c.steps = p.steps;
    c.batch_size = p.batch_size;
    c.learning_rate = p.learning_rate;
    c.optimizer = p.optimizer;
    c.checkpoint_count = p.checkpoint_count;
    c.seed = mix_seed({seed, hash_str("train")});
    return c;
}

MixtureSpec real_only(const DatasetPtr& real) {
    MixtureSpec m;
    m.real_pool = {real};
    m.alpha = 0.0;
    return m;
}

MixtureSpec cotrain_mix(const DatasetPtr& real, std::vector<DatasetPtr> sim,
                        double alpha) {
    MixtureSpec m;
    m.real_pool = {real};
    m.sim_pool = std::move(sim);
    size_t sim_frames = 0;
    for (const auto& d : m.sim_pool) sim_frames += d->total_frames();
    // With no sim frames the mixture degenerates to plain behavior cloning.
    m.alpha = sim_frames == 0 ? 0.0 : alpha;
    // Frame-proportional subweights: the sim pool behaves as one merged
    // dataset, every sim frame weighted alpha / |D_sim|.
    if (m.sim_pool.size() > 1 && sim_frames > 0) {
        m.sim_subweights.reserve(m.sim_pool.size());
        for (const auto& d : m.sim_pool) {
            m.sim_subweights.push_back(static_cast<double>(d->total_frames()) /
                                       static_cast<double>(sim_frames));
        }
    }
    return m;
}

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Per-seed demo generation. Everything is derived from the experiment seed so
// reruns are bit-identical; cells only read these datasets.
struct SeedData {
    DatasetPtr real;               // n_real_demos from the real-proxy world
    DatasetPtr real_scaling;       // max(real_count_grid) demos
    DatasetPtr real_border;        // border-band demos (unseen-positions)
    DatasetPtr dc;
    DatasetPtr dc_aligned;
    DatasetPtr dc_misaligned;
    std::vector<DatasetPtr> priors;
};

DatasetPtr generate_from_world(const WorldConfig& world, int n_sources, int n_out,
                               uint64_t seed, const char* tag) {
    const Dataset sources =
        collect_demos(world, n_sources, mix_seed({seed, hash_str(tag), hash_str("src")}));
    auto [generated, report] =
        generate(sources, world, n_out, mix_seed({seed, hash_str(tag), hash_str("gen")}));
    return std::make_shared<const Dataset>(std::move(generated));
}

std::vector<Rect> border_strips(const Rect& r, double frac) {
    const double fw = frac * r.width();
    const double fh = frac * r.height();
    return {
        Rect{r.x0, r.y0, r.x0 + fw, r.y1},            // left
        Rect{r.x1 - fw, r.y0, r.x1, r.y1},            // right
        Rect{r.x0 + fw, r.y0, r.x1 - fw, r.y0 + fh},  // bottom
        Rect{r.x0 + fw, r.y1 - fh, r.x1 - fw, r.y1},  // top
    };
}

DatasetPtr collect_border_demos(const WorldConfig& world, int n, double frac,
                                uint64_t seed) {
    const auto strips = border_strips(world.init_region, frac);
    Dataset merged;
    bool first = true;
    for (size_t i = 0; i < strips.size(); ++i) {
        // Distribute n as evenly as possible across the four strips.
        const int share = static_cast<int>(n / strips.size()) +
                          (i < n % strips.size() ? 1 : 0);
        if (share == 0) continue;
        WorldConfig w = world;
        w.init_region = strips[i];
        w.name = world.name + "_border";
        Dataset d = collect_demos(w, share,
                                  mix_seed({seed, hash_str("border"), i}));
        if (first) {
            merged = std::move(d);
            first = false;
        } else {
            Dataset next = concat_datasets(merged, d);
            next.name = merged.name;
            merged = std::move(next);
        }
    }
    // The band is a frame, not a rectangle; record its bounding box.
    merged.manifest.init_region = world.init_region;
    return std::make_shared<const Dataset>(std::move(merged));
}

SeedData build_seed_data(const ExperimentConfig& cfg, uint64_t seed) {
    SeedData data;
    switch (cfg.protocol) {
        case Protocol::MixTable: {
            data.real = std::make_shared<const Dataset>(
                collect_demos(cfg.world_real, cfg.n_real_demos,
                              mix_seed({seed, hash_str("real")})));
            data.dc = generate_from_world(cfg.world_dc, cfg.n_source_demos,
                                          cfg.n_dc_demos, seed, "dc");
            for (size_t i = 0; i < cfg.worlds_prior.size(); ++i) {
                data.priors.push_back(generate_from_world(
                    cfg.worlds_prior[i], cfg.n_source_demos, cfg.n_prior_demos,
                    mix_seed({seed, i}), "prior"));
            }
            break;
        }
        case Protocol::RatioSweep:
        case Protocol::SimQuantity: {
            data.real = std::make_shared<const Dataset>(
                collect_demos(cfg.world_real, cfg.n_real_demos,
                              mix_seed({seed, hash_str("real")})));
            data.dc = generate_from_world(cfg.world_dc, cfg.n_source_demos,
                                          cfg.n_dc_demos, seed, "dc");
            break;
        }
        case Protocol::RealScaling: {
            const int max_real =
                *std::max_element(cfg.real_count_grid.begin(), cfg.real_count_grid.end());
            data.real_scaling = std::make_shared<const Dataset>(
                collect_demos(cfg.world_real, max_real,
                              mix_seed({seed, hash_str("real")})));
            data.dc = generate_from_world(cfg.world_dc, cfg.n_source_demos,
                                          cfg.n_dc_demos, seed, "dc");
            break;
        }
        case Protocol::CameraAblation: {
            data.real = std::make_shared<const Dataset>(
                collect_demos(cfg.world_real, cfg.n_real_demos,
                              mix_seed({seed, hash_str("real")})));
            WorldConfig aligned = cfg.world_dc;
            aligned.gap.camera_offset = Pose2::identity();
            aligned.name = cfg.world_dc.name + "_aligned";
            data.dc_aligned = generate_from_world(aligned, cfg.n_source_demos,
                                                  cfg.n_dc_demos, seed, "dc_aligned");
            WorldConfig misaligned = cfg.world_dc;
            misaligned.gap.camera_offset = cfg.misaligned_camera_offset;
            misaligned.name = cfg.world_dc.name + "_misaligned";
            data.dc_misaligned = generate_from_world(
                misaligned, cfg.n_source_demos, cfg.n_dc_demos, seed, "dc_misaligned");
            break;
        }
        case Protocol::UnseenPositions: {
            data.real_border = collect_border_demos(cfg.world_real, cfg.n_real_demos,
                                                    cfg.border_band_frac,
                                                    mix_seed({seed, hash_str("real")}));
            data.dc = generate_from_world(cfg.world_dc, cfg.n_source_demos,
                                          cfg.n_dc_demos, seed, "dc");
            break;
        }
        case Protocol::UnseenObjects: {
            data.real = std::make_shared<const Dataset>(
                collect_demos(cfg.world_real, cfg.n_real_demos,
                              mix_seed({seed, hash_str("real")})));
            data.dc = generate_from_world(cfg.world_dc, cfg.n_source_demos,
                                          cfg.n_dc_demos, seed, "dc");
            break;
        }
    }
    return data;
}

std::vector<Cell> build_cells(const ExperimentConfig& cfg, uint64_t seed,
                              const SeedData& data) {
    std::vector<Cell> cells;
    const double alpha = cfg.train.alpha;
    const auto add = [&cells, seed](std::string condition, MixtureSpec mix,
                                    WorldConfig eval_world) {
        cells.push_back(Cell{std::move(condition), seed, std::move(mix),
                             std::move(eval_world)});
    };

    switch (cfg.protocol) {
        case Protocol::MixTable: {
            std::vector<DatasetPtr> dc_prior{data.dc};
            for (const auto& p : data.priors) dc_prior.push_back(p);
            add("real", real_only(data.real), cfg.world_real);
            add("real+dc", cotrain_mix(data.real, {data.dc}, alpha), cfg.world_real);
            add("real+prior", cotrain_mix(data.real, data.priors, alpha),
                cfg.world_real);
            add("real+dc+prior", cotrain_mix(data.real, dc_prior, alpha),
                cfg.world_real);
            break;
        }
        case Protocol::RatioSweep: {
            for (double a : cfg.alpha_grid) {
                add("alpha=" + format_double(a),
                    cotrain_mix(data.real, {data.dc}, a), cfg.world_real);
            }
            break;
        }
        case Protocol::RealScaling: {
            for (int n : cfg.real_count_grid) {
                auto real_n = std::make_shared<const Dataset>(
                    dataset_prefix(*data.real_scaling, n));
                const std::string suffix = "/n=" + std::to_string(n);
                add("real_only" + suffix, real_only(real_n), cfg.world_real);
                add("cotrain" + suffix, cotrain_mix(real_n, {data.dc}, alpha),
                    cfg.world_real);
            }
            break;
        }
        case Protocol::SimQuantity: {
            add("real_only", real_only(data.real), cfg.world_real);
            for (int m : cfg.sim_count_grid) {
                auto dc_m = std::make_shared<const Dataset>(
                    dataset_prefix(*data.dc, m));
                add("cotrain/sim=" + std::to_string(m),
                    cotrain_mix(data.real, {dc_m}, alpha), cfg.world_real);
            }
            break;
        }
        case Protocol::CameraAblation: {
            add("real_only", real_only(data.real), cfg.world_real);
            add("aligned", cotrain_mix(data.real, {data.dc_aligned}, alpha),
                cfg.world_real);
            add("misaligned", cotrain_mix(data.real, {data.dc_misaligned}, alpha),
                cfg.world_real);
            break;
        }
        case Protocol::UnseenPositions: {
            WorldConfig center = cfg.world_real;
            center.init_region =
                cfg.world_real.init_region.shrunk(cfg.center_eval_shrink);
            center.name = cfg.world_real.name + "_center";
            WorldConfig border_eval = cfg.world_real;
            // Sanity condition: evaluate on one border strip.
            border_eval.init_region =
                border_strips(cfg.world_real.init_region, cfg.border_band_frac)[0];
            border_eval.name = cfg.world_real.name + "_border";
            add("real_only/center", real_only(data.real_border), center);
            add("cotrain/center", cotrain_mix(data.real_border, {data.dc}, alpha),
                center);
            add("real_only/border", real_only(data.real_border), border_eval);
            break;
        }
        case Protocol::UnseenObjects: {
            WorldConfig unseen = cfg.world_real;
            unseen.object_set = cfg.unseen_object_set;
            unseen.name = cfg.world_real.name + "_unseen";
            add("real_only/seen", real_only(data.real), cfg.world_real);
            add("cotrain/seen", cotrain_mix(data.real, {data.dc}, alpha),
                cfg.world_real);
            add("real_only/unseen", real_only(data.real), unseen);
            add("cotrain/unseen", cotrain_mix(data.real, {data.dc}, alpha), unseen);
            break;
        }
    }
    return cells;
}

ResultRow run_cell(const ExperimentConfig& cfg, const Cell& cell) {
    ResultRow row;
    row.protocol = to_string(cfg.protocol);
    row.condition = cell.condition;
    row.seed = cell.seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const TrainConfig tc = cell_train_config(cfg.train, cell.seed);
        const std::vector<Checkpoint> ckpts = train(cell.mixture, tc);
        const uint64_t eval_seed = mix_seed({cell.seed, hash_str("eval")});
        double best = -1.0;
        int best_step = 0;
        for (const Checkpoint& c : ckpts) {
            const double score =
                evaluate(c.params, cell.eval_world, cfg.eval_episodes, eval_seed);
            row.checkpoint_steps.push_back(c.step);
            row.checkpoint_scores.push_back(score);
            if (score > best) {
                best = score;
                best_step = c.step;
            }
        }
        row.score = best;
        row.checkpoint_used = best_step;
    } catch (const DivergedError&) {
        row.diverged = true;
        row.score = 0.0;
        row.checkpoint_used = 0;
    }
    row.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg.world_real);
    validate_config(cfg.world_dc);
    for (const auto& w : cfg.worlds_prior) validate_config(w);

    // Demo generation is sequential and seed-derived; training cells then run
    // in parallel over immutable datasets.
    std::vector<Cell> cells;
    for (uint64_t seed : cfg.seeds) {
        const SeedData data = build_seed_data(cfg, seed);
        for (Cell& c : build_cells(cfg, seed, data)) cells.push_back(std::move(c));
    }

    std::vector<ResultRow> rows(cells.size());
    std::atomic<size_t> next{0};
    const int n_threads =
        std::min<int>(harness_thread_count(), static_cast<int>(cells.size()));
    std::vector<std::thread> workers;
    for (int i = 0; i < n_threads; ++i) {
        workers.emplace_back([&cfg, &cells, &rows, &next]() {
            for (size_t j = next.fetch_add(1); j < cells.size();
                 j = next.fetch_add(1)) {
                rows[j] = run_cell(cfg, cells[j]);
            }
        });
    }
    for (auto& w : workers) w.join();

    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.protocol, a.condition, a.seed) <
               std::tie(b.protocol, b.condition, b.seed);
    });
    ExperimentResult result;
    result.any_diverged =
        std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.diverged; });
    result.rows = std::move(rows);
    return result;
}

// ---------------------------------------------------------------------------
// result emission
// ---------------------------------------------------------------------------

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out = "protocol,condition,seed,score,checkpoint_used,status\n";
    char buf[160];
    for (const ResultRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%.6f,%d,%s\n",
                      r.protocol.c_str(), r.condition.c_str(),
                      static_cast<unsigned long long>(r.seed), r.score,
                      r.checkpoint_used, r.diverged ? "diverged" : "ok");
        out += buf;
    }
    return out;
}

void emit_results(const ExperimentResult& result, const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream os(fs::path(out_dir) / "results.csv", std::ios::binary);
        os << results_csv(result.rows);
    }
    {
        // Per-condition mean / std over seeds.
        json summary;
        std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
        for (const ResultRow& r : result.rows) {
            if (!r.diverged) groups[{r.protocol, r.condition}].push_back(r.score);
        }
        json conditions = json::array();
        for (const auto& [key, scores] : groups) {
            double mean = 0.0;
            for (double s : scores) mean += s;
            mean /= static_cast<double>(scores.size());
            double var = 0.0;
            for (double s : scores) var += (s - mean) * (s - mean);
            const double stddev =
                scores.size() > 1 ? std::sqrt(var / (scores.size() - 1)) : 0.0;
            json c;
            c["protocol"] = key.first;
            c["condition"] = key.second;
            c["mean"] = mean;
            c["std"] = stddev;
            c["n"] = scores.size();
            c["scores"] = scores;
            conditions.push_back(c);
        }
        summary["conditions"] = conditions;
        summary["any_diverged"] = result.any_diverged;
        std::ofstream os(fs::path(out_dir) / "summary.json", std::ios::binary);
        os << summary.dump(2) << "\n";
    }
    {
        // Per-checkpoint scores so the best-of convention can be audited.
        std::ofstream os(fs::path(out_dir) / "checkpoints.csv", std::ios::binary);
        os << "protocol,condition,seed,step,score\n";
        char buf[160];
        for (const ResultRow& r : result.rows) {
            for (size_t i = 0; i < r.checkpoint_steps.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%d,%.6f\n",
                              r.protocol.c_str(), r.condition.c_str(),
                              static_cast<unsigned long long>(r.seed),
                              r.checkpoint_steps[i], r.checkpoint_scores[i]);
                os << buf;
            }
        }
    }
    {
        std::ofstream os(fs::path(out_dir) / "timing.csv", std::ios::binary);
        os << "protocol,condition,seed,wallclock_s\n";
        char buf[160];
        for (const ResultRow& r : result.rows) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%.3f\n", r.protocol.c_str(),
                          r.condition.c_str(),
                          static_cast<unsigned long long>(r.seed), r.wallclock_s);
            os << buf;
        }
    }
}

std::vector<ResultRow> load_results_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open results file: " + path);
    std::vector<ResultRow> rows;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        ResultRow r;
        std::string field;
        std::getline(ss, r.protocol, ',');
        std::getline(ss, r.condition, ',');
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.score = std::stod(field);
        std::getline(ss, field, ',');
        r.checkpoint_used = std::stoi(field);
        std::getline(ss, field, ',');
        r.diverged = field == "diverged";
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string format_report(const std::vector<ResultRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const ResultRow& r : rows) {
        if (!r.diverged) groups[{r.protocol, r.condition}].push_back(r.score);
    }
    std::ostringstream os;
    char buf[160];
    os << "protocol              condition               mean    std     n\n";
    for (const auto& [key, scores] : groups) {
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        double var = 0.0;
        for (double s : scores) var += (s - mean) * (s - mean);
        const double stddev =
            scores.size() > 1 ? std::sqrt(var / (scores.size() - 1)) : 0.0;
        std::snprintf(buf, sizeof(buf), "%-21s %-22s %6.3f  %6.3f  %zu\n",
                      key.first.c_str(), key.second.c_str(), mean, stddev,
                      scores.size());
        os << buf;
    }
    return os.str();
}

}  // namespace cotrain
