#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotrain/sampler.hpp"
#include "cotrain/toyworld.hpp"
#include "cotrain/trajectory.hpp"

namespace cotrain {

// ---------------------------------------------------------------------------
// Small visuomotor regression policy: an MLP over an 8x8 grayscale downsample
// of the camera image concatenated with proprioception, trained with MSE
// (Gaussian log-likelihood with unit variance, up to a constant) on weighted
// mixture batches.
// ---------------------------------------------------------------------------

inline constexpr int kFeatureGrid = 8;           // downsampled image side
inline constexpr int kPolicyHiddenWidth = 128;
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

struct PolicyParams {
    struct Layer {
        int in = 0;
        int out = 0;
        std::vector<double> w;   // row-major [out][in]
        std::vector<double> b;   // [out]

        bool operator==(const Layer&) const = default;
    };
    // tanh on every layer but the last
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    size_t param_count() const {
        size_t n = 0;
        for (const Layer& l : layers) n += l.w.size() + l.b.size();
        return n;
    }

    bool operator==(const PolicyParams&) const = default;
};

// Gradients share the PolicyParams shape.
using PolicyGrad = PolicyParams;

enum class Optimizer { Sgd, AdamLike };

struct TrainConfig {
    int steps = 20000;
    int batch_size = 64;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::AdamLike;
    int checkpoint_count = 3;
    uint64_t seed = 0;
};

struct Checkpoint {
    PolicyParams params;
    int step = 0;
    double train_loss = 0.0;   // mean batch loss over the checkpoint interval
};

struct PolicyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat (feature, target) batch in row-major blocks.
struct Batch {
    int count = 0;
    int feat_dim = 0;
    int act_dim = 0;
    std::vector<double> features;  // count * feat_dim
    std::vector<double> targets;   // count * act_dim
};

int feature_dim(int proprio_dim);
void featurize_into(const ObservationFrame& obs, double* out);
std::vector<double> featurize(const ObservationFrame& obs);

Batch make_batch(std::span<const Frame* const> frames);

PolicyParams init_policy(int input_dim, int output_dim, uint64_t seed);

// Unclamped network output for one feature vector.
std::vector<double> forward_raw(const PolicyParams& params,
                                std::span<const double> features);

// Deterministic action mean, clamped to the domain action bounds.
Action forward(const PolicyParams& params, const ObservationFrame& obs);

// Mean squared error over batch entries and action components; zero iff
// predictions equal targets exactly.
double loss(const PolicyParams& params, const Batch& batch);

// Exact analytic gradient of loss via reverse-mode differentiation.
PolicyGrad grad(const PolicyParams& params, const Batch& batch);

std::vector<Checkpoint> train(const MixtureSpec& mixture, const TrainConfig& config);

// Checkpoint step schedule: ceil(steps * k / count) for k = 1..count.
std::vector<int> checkpoint_steps(int steps, int count);

double evaluate(const PolicyParams& params, const WorldConfig& cfg,
                int n_episodes, uint64_t seed);

// Oracle-friendly variant used by tests and the harness.
double evaluate_fn(const PolicyFn& policy, const WorldConfig& cfg,
                   int n_episodes, uint64_t seed);

void save_checkpoint(const Checkpoint& ckpt, uint64_t seed, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cotrain
