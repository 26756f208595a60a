#pragma once

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cotrain/rng.hpp"
#include "cotrain/trajectory.hpp"

namespace cotrain {

// ---------------------------------------------------------------------------
// Co-training mixture sampling. The weighted-loss objective
//     alpha * L(sim) + (1 - alpha) * L(real)
// is realized exactly as per-frame sampling probabilities: a frame of sim
// dataset j is drawn with probability alpha * subweight_j / |D_sim,j|, a real
// frame with probability (1 - alpha) / |D_real| where the real pool counts as
// one merged dataset. Sampling is with replacement at frame granularity.
// ---------------------------------------------------------------------------

struct MixtureSpec {
    std::vector<std::shared_ptr<const Dataset>> real_pool;
    std::vector<std::shared_ptr<const Dataset>> sim_pool;
    double alpha = 0.9;
    std::vector<double> sim_subweights;  // empty = uniform over sim datasets
};

enum class Pool { Real, Sim };

struct SampleKey {
    Pool pool = Pool::Real;
    int dataset_index = 0;
    int trajectory_index = 0;
    int frame_index = 0;

    bool operator==(const SampleKey&) const = default;
};

struct SamplerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-sample probability table produced by assign_weights.
class ProbabilityTable {
public:
    double probability_of(const SampleKey& key) const;

    // Kahan-compensated sum of the probability of every individual sample.
    double total() const;

    SampleKey sample(Rng& rng) const;

    double alpha() const { return alpha_; }
    size_t real_frame_count() const { return real_total_; }
    size_t sim_frame_count() const;
    size_t sim_frame_count(int dataset_index) const {
        return sim_frames_[dataset_index];
    }

private:
    friend ProbabilityTable assign_weights(const MixtureSpec& spec);

    struct DatasetIndex {
        std::vector<size_t> traj_offsets;  // prefix sums of frame counts
        size_t frames = 0;
    };

    SampleKey locate(Pool pool, int dataset_index, size_t flat_frame) const;

    double alpha_ = 0.0;
    std::vector<double> sim_weights_;       // normalized subweights
    std::vector<double> sim_cumulative_;    // cumulative subweights for draws
    std::vector<size_t> sim_frames_;
    std::vector<DatasetIndex> sim_index_;
    std::vector<DatasetIndex> real_index_;
    std::vector<size_t> real_offsets_;      // prefix sums across real datasets
    size_t real_total_ = 0;
};

// Validates the spec and builds the table. Throws SamplerError on an empty
// pool whose mass is nonzero, bad alpha, or malformed subweights.
ProbabilityTable assign_weights(const MixtureSpec& spec);

// batch_size independent draws; deterministic given the rng state.
std::vector<SampleKey> sample_batch(const ProbabilityTable& table,
                                    int batch_size, Rng& rng);

// The per-pool expected batch mass (alpha, 1 - alpha): the bridge between the
// sampling formulation and the weighted-loss form of the objective.
std::pair<double, double> effective_loss_weighting(const MixtureSpec& spec);

const Frame& frame_of(const MixtureSpec& spec, const SampleKey& key);

}  // namespace cotrain
