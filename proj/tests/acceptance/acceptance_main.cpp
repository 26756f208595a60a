// Acceptance suite: one pass/fail line per criterion. Heavy criteria load
// the experiment configs shipped under configs/.
//
// Usage: acceptance_tests [--criterion N] [--config-dir DIR]

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cotrain/harness.hpp"
#include "cotrain/kernels.hpp"
#include "cotrain/mimicgen.hpp"
#include "cotrain/policy.hpp"
#include "cotrain/presets.hpp"
#include "cotrain/sampler.hpp"
#include "cotrain/serialize.hpp"

#ifndef COTRAIN_CONFIG_DIR
#define COTRAIN_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace cotrain;

namespace {

std::string g_config_dir = COTRAIN_CONFIG_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// Small frame datasets for the sampler criteria.
std::shared_ptr<const Dataset> sampler_dataset(uint64_t seed, int n_traj,
                                               int frames) {
    Rng rng(seed);
    Dataset d;
    d.name = "acceptance";
    d.manifest.task_ids = {"task"};
    d.manifest.init_region = Rect{0.1, 0.1, 0.9, 0.9};
    d.manifest.camera.res_h = 8;
    d.manifest.camera.res_w = 8;
    for (int t = 0; t < n_traj; ++t) {
        Trajectory traj;
        traj.task_id = "task";
        traj.success = 1.0;
        traj.seed = rng.next_u64();
        for (int i = 0; i < frames; ++i) {
            Frame f;
            f.obs.image_h = 8;
            f.obs.image_w = 8;
            f.obs.image.resize(8 * 8 * 3);
            for (auto& px : f.obs.image) {
                px = static_cast<uint8_t>(rng.uniform_below(256));
            }
            f.obs.proprio = {rng.uniform(), rng.uniform(), rng.uniform(-1, 1),
                             rng.uniform()};
            f.action = make_action(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                                   rng.uniform(-0.2, 0.2), rng.uniform(0, 1));
            traj.frames.push_back(std::move(f));
        }
        d.trajectories.push_back(std::move(traj));
    }
    return std::make_shared<const Dataset>(std::move(d));
}

double condition_mean(const std::vector<ResultRow>& rows,
                      const std::string& condition) {
    double sum = 0.0;
    int n = 0;
    for (const ResultRow& r : rows) {
        if (r.condition == condition && !r.diverged) {
            sum += r.score;
            ++n;
        }
    }
    return n > 0 ? sum / n : -1.0;
}

// --------------------------------------------------------------------------
// 1. Sampler exactness: empirical sim fraction within 3-sigma binomial
//    bounds over 100k draws at alpha in {0.5, 0.9, 0.99}.
// --------------------------------------------------------------------------
Outcome criterion_1() {
    const auto real = sampler_dataset(11, 4, 25);
    const auto sim = sampler_dataset(12, 40, 25);
    const double alphas[] = {0.5, 0.9, 0.99};
    const double bounds[] = {0.0047, 0.0028, 0.0009};
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        MixtureSpec spec;
        spec.real_pool = {real};
        spec.sim_pool = {sim};
        spec.alpha = alphas[i];
        const ProbabilityTable table = assign_weights(spec);
        Rng rng(mix_seed({1000, static_cast<uint64_t>(i)}));
        const int n = 100000;
        int sim_draws = 0;
        for (int k = 0; k < n; ++k) {
            if (table.sample(rng).pool == Pool::Sim) ++sim_draws;
        }
        const double frac = static_cast<double>(sim_draws) / n;
        detail += fmt("a=%.2f frac=%.4f (+/-%.4f) ", alphas[i], frac, bounds[i]);
        if (std::abs(frac - alphas[i]) > bounds[i]) {
            return {false, detail + "OUT OF BOUNDS"};
        }
    }
    return {true, detail};
}

// --------------------------------------------------------------------------
// 2. Weighted-loss equivalence: Monte Carlo mean batch loss over 10k batches
//    against alpha*mean(sim)+(1-alpha)*mean(real) on a frozen linear model.
// --------------------------------------------------------------------------
Outcome criterion_2() {
    const auto real = sampler_dataset(21, 3, 20);
    const auto sim = sampler_dataset(22, 8, 20);
    MixtureSpec spec;
    spec.real_pool = {real};
    spec.sim_pool = {sim};
    spec.alpha = 0.9;
    const ProbabilityTable table = assign_weights(spec);

    // Frozen linear model: a single-layer policy over the features.
    const int feat_dim = feature_dim(4);
    PolicyParams linear;
    {
        PolicyParams::Layer l;
        l.in = feat_dim;
        l.out = 4;
        Rng wrng(23);
        l.w.resize(static_cast<size_t>(l.out) * l.in);
        for (double& w : l.w) w = wrng.gaussian(0.0, 0.05);
        l.b.assign(4, 0.0);
        linear.layers.push_back(std::move(l));
    }

    // Precomputed per-sample losses.
    const auto loss_of_frame = [&](const Frame& f) {
        const Batch b = make_batch(std::vector<const Frame*>{&f});
        return loss(linear, b);
    };
    double sim_mean = 0.0, real_mean = 0.0;
    std::map<std::tuple<int, int, int>, double> sim_losses, real_losses;
    {
        size_t n = 0;
        for (size_t t = 0; t < sim->trajectories.size(); ++t) {
            for (size_t i = 0; i < sim->trajectories[t].frames.size(); ++i) {
                const double v = loss_of_frame(sim->trajectories[t].frames[i]);
                sim_losses[{0, static_cast<int>(t), static_cast<int>(i)}] = v;
                sim_mean += v;
                ++n;
            }
        }
        sim_mean /= static_cast<double>(n);
        n = 0;
        for (size_t t = 0; t < real->trajectories.size(); ++t) {
            for (size_t i = 0; i < real->trajectories[t].frames.size(); ++i) {
                const double v = loss_of_frame(real->trajectories[t].frames[i]);
                real_losses[{0, static_cast<int>(t), static_cast<int>(i)}] = v;
                real_mean += v;
                ++n;
            }
        }
        real_mean /= static_cast<double>(n);
    }
    const double expected = 0.9 * sim_mean + 0.1 * real_mean;

    Rng rng(24);
    const int batches = 10000, batch_size = 16;
    double grand = 0.0, grand_sq = 0.0;
    for (int b = 0; b < batches; ++b) {
        double m = 0.0;
        for (const SampleKey& k : sample_batch(table, batch_size, rng)) {
            const auto key = std::make_tuple(0, k.trajectory_index, k.frame_index);
            m += k.pool == Pool::Sim ? sim_losses.at(key) : real_losses.at(key);
        }
        grand += m / batch_size;
        grand_sq += (m / batch_size) * (m / batch_size);
    }
    grand /= batches;
    const double var_batch = grand_sq / batches - grand * grand;
    const double se = std::sqrt(var_batch / batches);
    const double diff = std::abs(grand - expected);
    return {diff < 3.0 * se + 1e-12,
            fmt("mc=%.6f expected=%.6f |diff|=%.2e 3se=%.2e", grand, expected,
                diff, 3.0 * se)};
}

// --------------------------------------------------------------------------
// 3. Gradient correctness: analytic vs central finite differences on >=100
//    random coordinates of a random two-hidden-layer policy.
// --------------------------------------------------------------------------
Outcome criterion_3() {
    Rng data_rng(31);
    std::vector<Frame> frames(12);
    std::vector<const Frame*> ptrs;
    for (auto& f : frames) {
        f.obs.image_h = 32;
        f.obs.image_w = 32;
        f.obs.image.resize(32 * 32 * 3);
        for (auto& px : f.obs.image) {
            px = static_cast<uint8_t>(data_rng.uniform_below(256));
        }
        f.obs.proprio = {data_rng.uniform(), data_rng.uniform(),
                         data_rng.uniform(-1, 1), data_rng.uniform()};
        f.action = make_action(data_rng.uniform(-0.05, 0.05),
                               data_rng.uniform(-0.05, 0.05),
                               data_rng.uniform(-0.2, 0.2), data_rng.uniform(0, 1));
        ptrs.push_back(&f);
    }
    const Batch batch = make_batch(ptrs);
    PolicyParams p = init_policy(batch.feat_dim, batch.act_dim, 32);
    Rng fill(33);
    for (double& w : p.layers.back().w) w = fill.gaussian(0.0, 0.2);
    const PolicyGrad g = grad(p, batch);

    const double h = 1e-5;
    Rng pick(34);
    int checked = 0;
    double worst = 0.0;
    while (checked < 120) {
        const size_t layer = pick.uniform_below(p.layers.size());
        const bool use_w = pick.uniform() < 0.8;
        auto& vec = use_w ? p.layers[layer].w : p.layers[layer].b;
        const auto& gvec = use_w ? g.layers[layer].w : g.layers[layer].b;
        const size_t idx = pick.uniform_below(vec.size());
        const double saved = vec[idx];
        vec[idx] = saved + h;
        const double lp = loss(p, batch);
        vec[idx] = saved - h;
        const double lm = loss(p, batch);
        vec[idx] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        const double denom = std::max(std::abs(fd), std::abs(gvec[idx]));
        if (denom < 1e-10) continue;
        const double rel = std::abs(fd - gvec[idx]) / denom;
        worst = std::max(worst, rel);
        if (rel >= 1e-4) {
            return {false, fmt("coordinate rel err %.2e >= 1e-4 after %d checks",
                               rel, checked)};
        }
        ++checked;
    }
    return {true, fmt("%d coordinates, worst rel err %.2e", checked, worst)};
}

// --------------------------------------------------------------------------
// 4. MimicGen identity fidelity on 10 source demos: replay within 1e-6 m and
//    relative-pose preservation within 1e-9.
// --------------------------------------------------------------------------
Outcome criterion_4() {
    WorldConfig cfg = load_world_config(g_config_dir + "/world_real.json");
    cfg.gap.action_noise_std = 0.0;  // identity gap
    const Dataset sources = collect_demos(cfg, 10, 4001);
    std::vector<std::vector<Segment>> segs;
    for (const Trajectory& t : sources.trajectories) {
        segs.push_back(segment_source(t, replay_states(t, cfg), cfg));
    }
    double worst_path = 0.0, worst_rel = 0.0;
    for (size_t k = 0; k < sources.trajectories.size(); ++k) {
        const Trajectory& src = sources.trajectories[k];
        const AttemptResult attempt =
            generate_attempt(segs, static_cast<int>(k), cfg, src.seed);
        if (!attempt.success) {
            return {false, fmt("identity replay of demo %zu did not succeed", k)};
        }
        if (attempt.traj.frames.size() != src.frames.size()) {
            return {false, fmt("identity replay of demo %zu changed length", k)};
        }
        for (size_t i = 0; i < src.frames.size(); ++i) {
            const auto& a = attempt.traj.frames[i].obs.proprio;
            const auto& b = src.frames[i].obs.proprio;
            worst_path = std::max({worst_path, std::abs(a[0] - b[0]),
                                   std::abs(a[1] - b[1])});
        }
        // Relative pose preservation across every segment under a retarget.
        Rng rng(mix_seed({4002, k}));
        for (const Segment& seg : segs[k]) {
            const Pose2 new_ref =
                make_pose(rng.uniform(0.35, 0.65), rng.uniform(0.45, 0.75),
                          rng.uniform(-0.3, 0.3));
            Segment moved;
            try {
                moved = transform_segment(seg, new_ref);
            } catch (const OutOfWorkspace&) {
                continue;
            }
            const Pose2 inv_new = inverse(new_ref);
            const Pose2 inv_old = inverse(seg.reference_pose);
            for (size_t i = 0; i < seg.ee_poses.size(); ++i) {
                const Pose2 ra = compose(inv_old, seg.ee_poses[i]);
                const Pose2 rb = compose(inv_new, moved.ee_poses[i]);
                worst_rel = std::max({worst_rel, std::abs(ra.x - rb.x),
                                      std::abs(ra.y - rb.y),
                                      std::abs(wrap_angle(ra.theta - rb.theta))});
            }
        }
    }
    const bool pass = worst_path < 1e-6 && worst_rel < 1e-9;
    return {pass, fmt("path err %.2e (<1e-6), relative-pose err %.2e (<1e-9)",
                      worst_path, worst_rel)};
}

// --------------------------------------------------------------------------
// 5. Generation throughput: 100 successes from 10 sources at success rate
//    >= 0.5 on the default pick-place generation world.
// --------------------------------------------------------------------------
Outcome criterion_5() {
    const WorldConfig cfg = load_world_config(g_config_dir + "/world_dc.json");
    const Dataset sources = collect_demos(cfg, 10, 5001);
    auto [generated, report] = generate(sources, cfg, 100, 5002);
    const bool pass = report.successes == 100 &&
                      report.generation_success_rate() >= 0.5 &&
                      !report.budget_exhausted;
    return {pass, fmt("%d/%d successes, rate %.3f (>=0.5)", report.successes,
                      report.attempts, report.generation_success_rate())};
}

// --------------------------------------------------------------------------
// 6. Co-training benefit (mix-table pattern): mean(real+dc) - mean(real)
//    >= +0.10 and mean(real+dc+prior) >= mean(real), over the shipped config.
// --------------------------------------------------------------------------
Outcome criterion_6() {
    const ExperimentConfig cfg =
        load_experiment_config(g_config_dir + "/mix_table.json");
    const ExperimentResult result = run_experiment(cfg);
    const double real = condition_mean(result.rows, "real");
    const double dc = condition_mean(result.rows, "real+dc");
    const double all = condition_mean(result.rows, "real+dc+prior");
    const bool pass =
        !result.any_diverged && dc - real >= 0.10 && all >= real;
    return {pass, fmt("real=%.3f real+dc=%.3f (d=%+.3f, need >=+0.10) "
                      "real+dc+prior=%.3f (need >= real)",
                      real, dc, dc - real, all)};
}

// --------------------------------------------------------------------------
// 7. Ratio-sweep shape: max over {0.9, 0.99} strictly above both 0.5 and
//    0.999 seed-averaged means.
// --------------------------------------------------------------------------
Outcome criterion_7() {
    const ExperimentConfig cfg =
        load_experiment_config(g_config_dir + "/ratio_sweep.json");
    const ExperimentResult result = run_experiment(cfg);
    const double mid =
        std::max(condition_mean(result.rows, "alpha=0.9"),
                 condition_mean(result.rows, "alpha=0.99"));
    const double half = condition_mean(result.rows, "alpha=0.5");
    const double extreme = condition_mean(result.rows, "alpha=0.999");
    const bool pass = !result.any_diverged && mid > half && mid > extreme;
    return {pass,
            fmt("max(a0.9,a0.99)=%.3f vs a0.5=%.3f and a0.999=%.3f (strict >)",
                mid, half, extreme)};
}

// --------------------------------------------------------------------------
// 8. Camera ablation ordering: aligned >= misaligned >= real-only.
// --------------------------------------------------------------------------
Outcome criterion_8() {
    const ExperimentConfig cfg =
        load_experiment_config(g_config_dir + "/camera_ablation.json");
    const ExperimentResult result = run_experiment(cfg);
    const double aligned = condition_mean(result.rows, "aligned");
    const double mis = condition_mean(result.rows, "misaligned");
    const double real = condition_mean(result.rows, "real_only");
    const bool pass = !result.any_diverged && aligned >= mis && mis >= real;
    return {pass, fmt("aligned=%.3f >= misaligned=%.3f >= real_only=%.3f",
                      aligned, mis, real)};
}

// --------------------------------------------------------------------------
// 9. Unseen-position generalization: border-trained co-training beats
//    border-trained real-only at the region center by >= +0.10.
// --------------------------------------------------------------------------
Outcome criterion_9() {
    const ExperimentConfig cfg =
        load_experiment_config(g_config_dir + "/unseen_positions.json");
    const ExperimentResult result = run_experiment(cfg);
    const double co = condition_mean(result.rows, "cotrain/center");
    const double real = condition_mean(result.rows, "real_only/center");
    const bool pass = !result.any_diverged && co - real >= 0.10;
    return {pass, fmt("cotrain=%.3f real_only=%.3f at center (d=%+.3f, need "
                      ">=+0.10)",
                      co, real, co - real)};
}

// --------------------------------------------------------------------------
// 10. Determinism: rerunning an experiment config with identical seeds gives
//     byte-identical results.csv.
// --------------------------------------------------------------------------
Outcome criterion_10() {
    ExperimentConfig cfg = load_experiment_config(g_config_dir + "/mix_table.json");
    // Shrunk instance of the same protocol; determinism is scale-free.
    cfg.n_real_demos = 4;
    cfg.n_dc_demos = 20;
    cfg.n_prior_demos = 10;
    cfg.n_source_demos = 3;
    cfg.eval_episodes = 10;
    cfg.seeds = {1, 2};
    cfg.train.steps = 120;
    const std::string csv1 = results_csv(run_experiment(cfg).rows);
    const std::string csv2 = results_csv(run_experiment(cfg).rows);
    return {csv1 == csv2 && !csv1.empty(),
            fmt("%zu-byte results identical across reruns: %s", csv1.size(),
                csv1 == csv2 ? "yes" : "NO")};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (std::strcmp(argv[i], "--config-dir") == 0 && i + 1 < argc) {
            g_config_dir = argv[++i];
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "sampler exactness", 5, criterion_1},
        {2, "weighted-loss equivalence", 10, criterion_2},
        {3, "gradient correctness", 5, criterion_3},
        {4, "retarget identity fidelity", 10, criterion_4},
        {5, "generation throughput", 60, criterion_5},
        {6, "co-training benefit", 1800, criterion_6},
        {7, "ratio-sweep shape", 2700, criterion_7},
        {8, "camera ablation ordering", 1800, criterion_8},
        {9, "unseen-position generalization", 1800, criterion_9},
        {10, "experiment determinism", 1800, criterion_10},
    };

    std::printf("acceptance suite (kernels: %s, threads: %d, configs: %s)\n",
                kernels::backend_name(), harness_thread_count(),
                g_config_dir.c_str());
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const double t0 = now_s();
        Outcome outcome;
        try {
            outcome = c.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = now_s() - t0;
        const bool in_budget = elapsed < c.budget_s;
        const bool pass = outcome.pass && in_budget;
        std::printf("[%s] criterion %2d (%s): %s [%.1fs / budget %.0fs]\n",
                    pass ? "PASS" : "FAIL", c.id, c.name, outcome.detail.c_str(),
                    elapsed, c.budget_s);
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
