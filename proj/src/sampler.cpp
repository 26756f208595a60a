#include "cotrain/sampler.hpp"

#include <cmath>

namespace cotrain {

SampleKey ProbabilityTable::locate(Pool pool, int dataset_index,
                                   size_t flat_frame) const {
    const DatasetIndex& idx = pool == Pool::Sim
                                  ? sim_index_[dataset_index]
                                  : real_index_[dataset_index];
    // traj_offsets[i] is the first flat frame of trajectory i.
    size_t lo = 0, hi = idx.traj_offsets.size() - 1;
    while (lo < hi) {
        const size_t mid = (lo + hi + 1) / 2;
        if (idx.traj_offsets[mid] <= flat_frame) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return SampleKey{pool, dataset_index, static_cast<int>(lo),
                     static_cast<int>(flat_frame - idx.traj_offsets[lo])};
}

double ProbabilityTable::probability_of(const SampleKey& key) const {
    if (key.pool == Pool::Sim) {
        const size_t frames = sim_frames_[key.dataset_index];
        return frames == 0 ? 0.0
                           : alpha_ * sim_weights_[key.dataset_index] /
                                 static_cast<double>(frames);
    }
    return real_total_ == 0 ? 0.0
                            : (1.0 - alpha_) / static_cast<double>(real_total_);
}

double ProbabilityTable::total() const {
    double sum = 0.0, comp = 0.0;
    const auto add = [&sum, &comp](double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    for (size_t j = 0; j < sim_frames_.size(); ++j) {
        if (sim_frames_[j] == 0) continue;
        const double p = alpha_ * sim_weights_[j] / static_cast<double>(sim_frames_[j]);
        for (size_t i = 0; i < sim_frames_[j]; ++i) add(p);
    }
    if (real_total_ > 0) {
        const double p = (1.0 - alpha_) / static_cast<double>(real_total_);
        for (size_t i = 0; i < real_total_; ++i) add(p);
    }
    return sum;
}

size_t ProbabilityTable::sim_frame_count() const {
    size_t n = 0;
    for (size_t f : sim_frames_) n += f;
    return n;
}

SampleKey ProbabilityTable::sample(Rng& rng) const {
    const double u = rng.uniform();
    if (u < alpha_) {
        // Dataset by cumulative subweight, then a uniform frame within it.
        const double v = rng.uniform();
        int j = 0;
        while (j + 1 < static_cast<int>(sim_cumulative_.size()) &&
               v >= sim_cumulative_[j]) {
            ++j;
        }
        const size_t flat = rng.uniform_below(sim_frames_[j]);
        return locate(Pool::Sim, j, flat);
    }
    const size_t flat = rng.uniform_below(real_total_);
    // Find dataset by prefix sums across the merged real pool.
    int d = 0;
    while (d + 1 < static_cast<int>(real_offsets_.size()) &&
           flat >= real_offsets_[d + 1]) {
        ++d;
    }
    return locate(Pool::Real, d, flat - real_offsets_[d]);
}

ProbabilityTable assign_weights(const MixtureSpec& spec) {
    if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
        throw SamplerError("alpha must be in [0, 1]");
    }
    size_t sim_total = 0;
    for (const auto& d : spec.sim_pool) sim_total += d->total_frames();
    size_t real_total = 0;
    for (const auto& d : spec.real_pool) real_total += d->total_frames();

    if (spec.alpha > 0.0 && sim_total == 0) {
        throw SamplerError("empty pool: sim pool is empty but alpha > 0");
    }
    if (spec.alpha < 1.0 && real_total == 0) {
        throw SamplerError("empty pool: real pool is empty but alpha < 1");
    }

    ProbabilityTable t;
    t.alpha_ = spec.alpha;

    const size_t n_sim = spec.sim_pool.size();
    if (spec.sim_subweights.empty()) {
        t.sim_weights_.assign(n_sim, n_sim > 0 ? 1.0 / static_cast<double>(n_sim) : 0.0);
    } else {
        if (spec.sim_subweights.size() != n_sim) {
            throw SamplerError("sim_subweights size mismatch");
        }
        double sum = 0.0;
        for (double w : spec.sim_subweights) {
            if (w < 0.0) throw SamplerError("sim_subweights must be nonnegative");
            sum += w;
        }
        if (n_sim > 0 && std::abs(sum - 1.0) > 1e-9) {
            throw SamplerError("sim_subweights must sum to 1");
        }
        t.sim_weights_ = spec.sim_subweights;
    }
    if (spec.alpha > 0.0) {
        for (size_t j = 0; j < n_sim; ++j) {
            if (t.sim_weights_[j] > 0.0 && spec.sim_pool[j]->total_frames() == 0) {
                throw SamplerError("empty pool: sim dataset " + std::to_string(j) +
                                   " has positive weight but no frames");
            }
        }
    }

    t.sim_cumulative_.resize(n_sim);
    double acc = 0.0;
    for (size_t j = 0; j < n_sim; ++j) {
        acc += t.sim_weights_[j];
        t.sim_cumulative_[j] = acc;
    }

    const auto build_index = [](const Dataset& d) {
        ProbabilityTable::DatasetIndex idx;
        idx.traj_offsets.reserve(d.trajectories.size());
        for (const Trajectory& traj : d.trajectories) {
            idx.traj_offsets.push_back(idx.frames);
            idx.frames += traj.frames.size();
        }
        if (idx.traj_offsets.empty()) idx.traj_offsets.push_back(0);
        return idx;
    };

    for (const auto& d : spec.sim_pool) {
        auto idx = build_index(*d);
        t.sim_frames_.push_back(idx.frames);
        t.sim_index_.push_back(std::move(idx));
    }
    for (const auto& d : spec.real_pool) {
        auto idx = build_index(*d);
        t.real_offsets_.push_back(t.real_total_);
        t.real_total_ += idx.frames;
        t.real_index_.push_back(std::move(idx));
    }
    return t;
}

std::vector<SampleKey> sample_batch(const ProbabilityTable& table,
                                    int batch_size, Rng& rng) {
    std::vector<SampleKey> keys;
    keys.reserve(batch_size);
    for (int i = 0; i < batch_size; ++i) keys.push_back(table.sample(rng));
    return keys;
}

std::pair<double, double> effective_loss_weighting(const MixtureSpec& spec) {
    if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
        throw SamplerError("alpha must be in [0, 1]");
    }
    return {spec.alpha, 1.0 - spec.alpha};
}

const Frame& frame_of(const MixtureSpec& spec, const SampleKey& key) {
    const auto& pool = key.pool == Pool::Sim ? spec.sim_pool : spec.real_pool;
    return pool[key.dataset_index]
        ->trajectories[key.trajectory_index]
        .frames[key.frame_index];
}

}  // namespace cotrain
