#include "cotrain/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cotrain/binio.hpp"
#include "cotrain/kernels.hpp"

namespace cotrain {

namespace {

double clampd(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// The network regresses bound-normalized action components so every target
// lives on a comparable scale; forward() maps back to world units. In
// normalized units the MSE is the unit-variance Gaussian log-likelihood.
double action_scale(int component) {
    const ActionBounds& b = action_bounds();
    switch (component) {
        case 0:
        case 1: return b.max_xy;
        case 2: return b.max_theta;
        default: return 1.0;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// featurization
// ---------------------------------------------------------------------------

int feature_dim(int proprio_dim) {
    return kFeatureGrid * kFeatureGrid + proprio_dim;
}

void featurize_into(const ObservationFrame& obs, double* out) {
    // Block-averaged grayscale on a kFeatureGrid x kFeatureGrid grid.
    double sums[kFeatureGrid * kFeatureGrid] = {0.0};
    int counts[kFeatureGrid * kFeatureGrid] = {0};
    for (int r = 0; r < obs.image_h; ++r) {
        const int br = r * kFeatureGrid / obs.image_h;
        for (int c = 0; c < obs.image_w; ++c) {
            const int bc = c * kFeatureGrid / obs.image_w;
            const size_t i = (static_cast<size_t>(r) * obs.image_w + c) * 3;
            const double gray = (static_cast<double>(obs.image[i]) +
                                 static_cast<double>(obs.image[i + 1]) +
                                 static_cast<double>(obs.image[i + 2])) /
                                765.0;
            sums[br * kFeatureGrid + bc] += gray;
            counts[br * kFeatureGrid + bc] += 1;
        }
    }
    for (int i = 0; i < kFeatureGrid * kFeatureGrid; ++i) {
        out[i] = counts[i] > 0 ? sums[i] / counts[i] : 0.0;
    }
    for (size_t i = 0; i < obs.proprio.size(); ++i) {
        out[kFeatureGrid * kFeatureGrid + i] = obs.proprio[i];
    }
}

std::vector<double> featurize(const ObservationFrame& obs) {
    std::vector<double> out(feature_dim(static_cast<int>(obs.proprio.size())));
    featurize_into(obs, out.data());
    return out;
}

Batch make_batch(std::span<const Frame* const> frames) {
    if (frames.empty()) throw PolicyError("empty batch");
    Batch b;
    b.count = static_cast<int>(frames.size());
    b.feat_dim = feature_dim(static_cast<int>(frames[0]->obs.proprio.size()));
    b.act_dim = static_cast<int>(frames[0]->action.delta.size());
    b.features.resize(static_cast<size_t>(b.count) * b.feat_dim);
    b.targets.resize(static_cast<size_t>(b.count) * b.act_dim);
    for (int i = 0; i < b.count; ++i) {
        featurize_into(frames[i]->obs, b.features.data() +
                                           static_cast<size_t>(i) * b.feat_dim);
        const auto& delta = frames[i]->action.delta;
        for (int j = 0; j < b.act_dim; ++j) {
            b.targets[static_cast<size_t>(i) * b.act_dim + j] =
                delta[j] / action_scale(j);
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// network
// ---------------------------------------------------------------------------

PolicyParams init_policy(int input_dim, int output_dim, uint64_t seed) {
    Rng rng(mix_seed({seed, hash_str("policy_init")}));
    PolicyParams p;
    const int dims[4] = {input_dim, kPolicyHiddenWidth, kPolicyHiddenWidth,
                         output_dim};
    for (int l = 0; l < 3; ++l) {
        PolicyParams::Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.w.resize(static_cast<size_t>(layer.out) * layer.in);
        layer.b.assign(layer.out, 0.0);
        // Final layer starts near zero so early predictions sit at the
        // action-scale origin.
        const double std = l == 2 ? 0.01 / std::sqrt(static_cast<double>(layer.in))
                                  : 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (double& w : layer.w) w = rng.gaussian(0.0, std);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

namespace {

// Forward pass over a batch; stores post-activation values per layer when a
// cache is supplied (needed for backprop).
struct ForwardCache {
    // activations[l] holds the input to layer l; activations.back() is the
    // final (pre-clamp) output.
    std::vector<std::vector<double>> activations;
};

void forward_batch(const PolicyParams& params, const double* features,
                   int count, std::vector<double>& out, ForwardCache* cache) {
    const auto& ops = kernels::active();
    std::vector<double> cur(features,
                            features + static_cast<size_t>(count) * params.input_dim());
    if (cache) cache->activations.push_back(cur);
    for (size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        std::vector<double> next(static_cast<size_t>(count) * layer.out);
        ops.gemm_nt(cur.data(), layer.w.data(), next.data(), count, layer.out,
                    layer.in);
        for (int i = 0; i < count; ++i) {
            double* row = next.data() + static_cast<size_t>(i) * layer.out;
            for (int j = 0; j < layer.out; ++j) row[j] += layer.b[j];
        }
        if (l + 1 < params.layers.size()) {
            for (double& v : next) v = std::tanh(v);
        }
        cur = std::move(next);
        if (cache) cache->activations.push_back(cur);
    }
    out = std::move(cur);
}

}  // namespace

std::vector<double> forward_raw(const PolicyParams& params,
                                std::span<const double> features) {
    if (static_cast<int>(features.size()) != params.input_dim()) {
        throw PolicyError("dimension mismatch: feature size " +
                          std::to_string(features.size()) + " vs input dim " +
                          std::to_string(params.input_dim()));
    }
    std::vector<double> out;
    forward_batch(params, features.data(), 1, out, nullptr);
    return out;
}

Action forward(const PolicyParams& params, const ObservationFrame& obs) {
    const std::vector<double> features = featurize(obs);
    const std::vector<double> raw = forward_raw(params, features);
    const ActionBounds& bounds = action_bounds();
    Action a;
    a.delta.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        const double v = raw[i] * action_scale(static_cast<int>(i));
        switch (i) {
            case 0:
            case 1:
                a.delta[i] = clampd(v, -bounds.max_xy, bounds.max_xy);
                break;
            case 2:
                a.delta[i] = clampd(v, -bounds.max_theta, bounds.max_theta);
                break;
            default:
                a.delta[i] = clampd(v, 0.0, 1.0);
                break;
        }
    }
    return a;
}

double loss(const PolicyParams& params, const Batch& batch) {
    if (batch.count <= 0) throw PolicyError("empty batch");
    std::vector<double> pred;
    forward_batch(params, batch.features.data(), batch.count, pred, nullptr);
    const double denom = static_cast<double>(batch.count) * batch.act_dim;
    return kernels::active().sq_diff_sum(pred.data(), batch.targets.data(),
                                         static_cast<int>(pred.size())) /
           denom;
}

PolicyGrad grad(const PolicyParams& params, const Batch& batch) {
    if (batch.count <= 0) throw PolicyError("empty batch");
    const auto& ops = kernels::active();
    ForwardCache cache;
    std::vector<double> pred;
    forward_batch(params, batch.features.data(), batch.count, pred, &cache);

    PolicyGrad g;
    g.layers.resize(params.layers.size());
    for (size_t l = 0; l < params.layers.size(); ++l) {
        g.layers[l].in = params.layers[l].in;
        g.layers[l].out = params.layers[l].out;
        g.layers[l].w.assign(params.layers[l].w.size(), 0.0);
        g.layers[l].b.assign(params.layers[l].b.size(), 0.0);
    }

    // dL/dpred for mean squared error over count * act_dim entries.
    const double scale = 2.0 / (static_cast<double>(batch.count) * batch.act_dim);
    std::vector<double> delta(pred.size());
    ops.scale_diff(scale, pred.data(), batch.targets.data(), delta.data(),
                   static_cast<int>(pred.size()));

    for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
        const auto& layer = params.layers[l];
        const std::vector<double>& input = cache.activations[l];
        // dW = delta^T . input ; db = column sums of delta
        ops.gemm_tn(delta.data(), input.data(), g.layers[l].w.data(), layer.out,
                    layer.in, batch.count);
        for (int i = 0; i < batch.count; ++i) {
            const double* row = delta.data() + static_cast<size_t>(i) * layer.out;
            for (int j = 0; j < layer.out; ++j) g.layers[l].b[j] += row[j];
        }
        if (l == 0) break;
        // Propagate: d_input = delta . W, then through tanh.
        std::vector<double> d_input(static_cast<size_t>(batch.count) * layer.in);
        ops.gemm_nn(delta.data(), layer.w.data(), d_input.data(), batch.count,
                    layer.in, layer.out);
        const std::vector<double>& act = cache.activations[l];
        for (size_t i = 0; i < d_input.size(); ++i) {
            d_input[i] *= 1.0 - act[i] * act[i];
        }
        delta = std::move(d_input);
    }
    return g;
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

std::vector<int> checkpoint_steps(int steps, int count) {
    std::vector<int> out;
    for (int k = 1; k <= count; ++k) {
        out.push_back(static_cast<int>(
            (static_cast<int64_t>(steps) * k + count - 1) / count));
    }
    return out;
}

namespace {

// Frame features for every dataset in a pool, flattened per dataset.
struct FeatureStore {
    int feat_dim = 0;
    int act_dim = 0;
    // [pool][dataset][trajectory] -> flat arrays per frame
    std::vector<std::vector<std::vector<std::vector<double>>>> features;
    std::vector<std::vector<std::vector<std::vector<double>>>> targets;
};

void featurize_pool(const std::vector<std::shared_ptr<const Dataset>>& pool,
                    std::vector<std::vector<std::vector<double>>>& feats,
                    std::vector<std::vector<std::vector<double>>>& tgts,
                    int feat_dim, int act_dim) {
    for (const auto& d : pool) {
        std::vector<std::vector<double>> dfeats;
        std::vector<std::vector<double>> dtgts;
        for (const Trajectory& traj : d->trajectories) {
            std::vector<double> f(traj.frames.size() * static_cast<size_t>(feat_dim));
            std::vector<double> t(traj.frames.size() * static_cast<size_t>(act_dim));
            for (size_t i = 0; i < traj.frames.size(); ++i) {
                featurize_into(traj.frames[i].obs, f.data() + i * feat_dim);
                const auto& delta = traj.frames[i].action.delta;
                for (int j = 0; j < act_dim; ++j) {
                    t[i * act_dim + j] = delta[j] / action_scale(j);
                }
            }
            dfeats.push_back(std::move(f));
            dtgts.push_back(std::move(t));
        }
        feats.push_back(std::move(dfeats));
        tgts.push_back(std::move(dtgts));
    }
}

struct MixtureDims {
    int proprio_dim = -1;
    int act_dim = -1;
};

MixtureDims mixture_dims(const MixtureSpec& mixture) {
    MixtureDims dims;
    const auto scan = [&dims](const std::vector<std::shared_ptr<const Dataset>>& pool) {
        for (const auto& d : pool) {
            if (d->trajectories.empty()) continue;
            const int pd = d->proprio_dim();
            const int ad = d->action_dim();
            if (dims.proprio_dim < 0) {
                dims.proprio_dim = pd;
                dims.act_dim = ad;
            } else if (pd != dims.proprio_dim || ad != dims.act_dim) {
                throw PolicyError("dimension mismatch across mixture datasets");
            }
        }
    };
    scan(mixture.real_pool);
    scan(mixture.sim_pool);
    if (dims.proprio_dim < 0) throw PolicyError("mixture has no frames");
    return dims;
}

}  // namespace

std::vector<Checkpoint> train(const MixtureSpec& mixture, const TrainConfig& config) {
    if (config.steps < config.checkpoint_count || config.checkpoint_count < 1) {
        throw PolicyError("steps must be >= checkpoint_count >= 1");
    }
    const auto& ops = kernels::active();
    const ProbabilityTable table = assign_weights(mixture);
    const MixtureDims dims = mixture_dims(mixture);
    const int feat_dim = feature_dim(dims.proprio_dim);

    FeatureStore store;
    store.feat_dim = feat_dim;
    store.act_dim = dims.act_dim;
    store.features.resize(2);
    store.targets.resize(2);
    featurize_pool(mixture.real_pool, store.features[0], store.targets[0],
                   feat_dim, dims.act_dim);
    featurize_pool(mixture.sim_pool, store.features[1], store.targets[1],
                   feat_dim, dims.act_dim);

    PolicyParams params = init_policy(feat_dim, dims.act_dim, config.seed);
    Rng sampler_rng(mix_seed({config.seed, hash_str("sampler")}));

    // Adam state mirrors the parameter layout.
    PolicyGrad m = params, v = params;
    for (auto& l : m.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    for (auto& l : v.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }

    const std::vector<int> ckpt_steps = checkpoint_steps(config.steps,
                                                         config.checkpoint_count);
    std::vector<Checkpoint> checkpoints;

    Batch batch;
    batch.count = config.batch_size;
    batch.feat_dim = feat_dim;
    batch.act_dim = dims.act_dim;
    batch.features.resize(static_cast<size_t>(batch.count) * feat_dim);
    batch.targets.resize(static_cast<size_t>(batch.count) * dims.act_dim);

    double interval_loss_sum = 0.0;
    int interval_steps = 0;
    size_t next_ckpt = 0;
    double beta1_t = 1.0, beta2_t = 1.0;

    for (int step_i = 1; step_i <= config.steps; ++step_i) {
        for (int b = 0; b < config.batch_size; ++b) {
            const SampleKey key = table.sample(sampler_rng);
            const int pool = key.pool == Pool::Real ? 0 : 1;
            const auto& f = store.features[pool][key.dataset_index][key.trajectory_index];
            const auto& t = store.targets[pool][key.dataset_index][key.trajectory_index];
            std::copy_n(f.data() + static_cast<size_t>(key.frame_index) * feat_dim,
                        feat_dim,
                        batch.features.data() + static_cast<size_t>(b) * feat_dim);
            std::copy_n(t.data() + static_cast<size_t>(key.frame_index) * dims.act_dim,
                        dims.act_dim,
                        batch.targets.data() + static_cast<size_t>(b) * dims.act_dim);
        }

        const double batch_loss = loss(params, batch);
        if (!std::isfinite(batch_loss)) {
            throw DivergedError("diverged at step " + std::to_string(step_i));
        }
        interval_loss_sum += batch_loss;
        ++interval_steps;

        const PolicyGrad g = grad(params, batch);
        if (config.optimizer == Optimizer::AdamLike) {
            beta1_t *= kAdamBeta1;
            beta2_t *= kAdamBeta2;
            const double bc1 = 1.0 - beta1_t;
            const double bc2 = 1.0 - beta2_t;
            for (size_t l = 0; l < params.layers.size(); ++l) {
                auto& pl = params.layers[l];
                ops.adam_step(pl.w.data(), m.layers[l].w.data(), v.layers[l].w.data(),
                              g.layers[l].w.data(), static_cast<int>(pl.w.size()),
                              config.learning_rate, kAdamBeta1, kAdamBeta2,
                              kAdamEps, bc1, bc2);
                ops.adam_step(pl.b.data(), m.layers[l].b.data(), v.layers[l].b.data(),
                              g.layers[l].b.data(), static_cast<int>(pl.b.size()),
                              config.learning_rate, kAdamBeta1, kAdamBeta2,
                              kAdamEps, bc1, bc2);
            }
        } else {
            for (size_t l = 0; l < params.layers.size(); ++l) {
                auto& pl = params.layers[l];
                ops.sgd_step(pl.w.data(), g.layers[l].w.data(),
                             static_cast<int>(pl.w.size()), config.learning_rate);
                ops.sgd_step(pl.b.data(), g.layers[l].b.data(),
                             static_cast<int>(pl.b.size()), config.learning_rate);
            }
        }

        if (next_ckpt < ckpt_steps.size() && step_i == ckpt_steps[next_ckpt]) {
            Checkpoint c;
            c.params = params;
            c.step = step_i;
            c.train_loss = interval_loss_sum / interval_steps;
            checkpoints.push_back(std::move(c));
            interval_loss_sum = 0.0;
            interval_steps = 0;
            ++next_ckpt;
        }
    }
    return checkpoints;
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

double evaluate_fn(const PolicyFn& policy, const WorldConfig& cfg,
                   int n_episodes, uint64_t seed) {
    if (n_episodes < 1) throw PolicyError("evaluate requires n_episodes >= 1");
    double sum = 0.0;
    for (int ep = 0; ep < n_episodes; ++ep) {
        const uint64_t ep_seed =
            episode_seed_for(cfg, mix_seed({seed, hash_str("eval")}),
                             static_cast<uint64_t>(ep));
        const RolloutResult rr = rollout_episode(cfg, ep_seed, policy, false);
        sum += success_value(rr.final_success);
    }
    return sum / n_episodes;
}

double evaluate(const PolicyParams& params, const WorldConfig& cfg,
                int n_episodes, uint64_t seed) {
    const PolicyFn fn = [&params](const State&, const ObservationFrame& obs,
                                  Rng&) { return forward(params, obs); };
    return evaluate_fn(fn, cfg, n_episodes, seed);
}

// ---------------------------------------------------------------------------
// checkpoint IO: text header then raw little-endian doubles
// ---------------------------------------------------------------------------

void save_checkpoint(const Checkpoint& ckpt, uint64_t seed,
                     const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PolicyError("cannot write checkpoint: " + path);
    os << "COTRAIN_CKPT 1\n";
    os << "layers " << ckpt.params.layers.size() << "\n";
    os << "dims";
    if (!ckpt.params.layers.empty()) {
        os << " " << ckpt.params.layers.front().in;
        for (const auto& l : ckpt.params.layers) os << " " << l.out;
    }
    os << "\n";
    os << "step " << ckpt.step << "\n";
    os << "seed " << seed << "\n";
    char loss_buf[64];
    std::snprintf(loss_buf, sizeof(loss_buf), "%.17g", ckpt.train_loss);
    os << "train_loss " << loss_buf << "\n";
    os << "END\n";
    for (const auto& l : ckpt.params.layers) {
        for (double w : l.w) binio::write_f64(os, w);
        for (double b : l.b) binio::write_f64(os, b);
    }
    if (!os) throw PolicyError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PolicyError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "COTRAIN_CKPT 1") {
        throw PolicyError("bad checkpoint header: " + path);
    }
    size_t n_layers = 0;
    std::vector<int> dims;
    Checkpoint ckpt;
    while (std::getline(is, line) && line != "END") {
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "layers") {
            ss >> n_layers;
        } else if (key == "dims") {
            int d;
            while (ss >> d) dims.push_back(d);
        } else if (key == "step") {
            ss >> ckpt.step;
        } else if (key == "train_loss") {
            ss >> ckpt.train_loss;
        }
        // "seed" is informational; it is not needed to restore parameters.
    }
    if (line != "END" || dims.size() != n_layers + 1) {
        throw PolicyError("bad checkpoint header: " + path);
    }
    for (size_t l = 0; l < n_layers; ++l) {
        PolicyParams::Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.w.resize(static_cast<size_t>(layer.out) * layer.in);
        layer.b.resize(layer.out);
        for (double& w : layer.w) {
            if (!binio::read_f64(is, w)) throw PolicyError("truncated checkpoint: " + path);
        }
        for (double& b : layer.b) {
            if (!binio::read_f64(is, b)) throw PolicyError("truncated checkpoint: " + path);
        }
        ckpt.params.layers.push_back(std::move(layer));
    }
    return ckpt;
}

}  // namespace cotrain
