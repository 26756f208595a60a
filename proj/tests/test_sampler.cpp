#include <doctest.h>

#include <cmath>
#include <memory>

#include "cotrain/sampler.hpp"
#include "test_helpers.hpp"

using namespace cotrain;

namespace {

std::shared_ptr<const Dataset> ds(uint64_t seed, int n_traj, int frames) {
    return std::make_shared<const Dataset>(
        testing::synthetic_dataset(seed, n_traj, frames));
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("equal pools at alpha 0.5 are equiprobable") {
    MixtureSpec spec;
    spec.real_pool = {ds(1, 4, 10)};
    spec.sim_pool = {ds(2, 4, 10)};
    spec.alpha = 0.5;
    const ProbabilityTable t = assign_weights(spec);
    const double p_sim = t.probability_of(SampleKey{Pool::Sim, 0, 0, 0});
    const double p_real = t.probability_of(SampleKey{Pool::Real, 0, 0, 0});
    CHECK(p_sim == doctest::Approx(p_real).epsilon(1e-15));
    CHECK(p_sim == doctest::Approx(0.5 / 40.0).epsilon(1e-12));
}

TEST_CASE("alpha 0.99 with 1000 sim / 20 real frames gives the stated probabilities") {
    MixtureSpec spec;
    spec.real_pool = {ds(3, 2, 10)};     // 20 frames
    spec.sim_pool = {ds(4, 100, 10)};    // 1000 frames
    spec.alpha = 0.99;
    const ProbabilityTable t = assign_weights(spec);
    // Arithmetic oracle: 0.99/1000 and 0.01/20.
    CHECK(t.probability_of(SampleKey{Pool::Sim, 0, 50, 3}) ==
          doctest::Approx(0.00099).epsilon(1e-12));
    CHECK(t.probability_of(SampleKey{Pool::Real, 0, 1, 7}) ==
          doctest::Approx(0.0005).epsilon(1e-12));
}

TEST_CASE("alpha 0 is uniform over real with zero sim mass") {
    MixtureSpec spec;
    spec.real_pool = {ds(5, 3, 10)};
    spec.sim_pool = {ds(6, 2, 10)};
    spec.alpha = 0.0;
    const ProbabilityTable t = assign_weights(spec);
    CHECK(t.probability_of(SampleKey{Pool::Sim, 0, 0, 0}) == 0.0);
    CHECK(t.probability_of(SampleKey{Pool::Real, 0, 2, 9}) ==
          doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    Rng rng(50);
    for (const SampleKey& k : sample_batch(t, 200, rng)) {
        CHECK(k.pool == Pool::Real);
    }
}

TEST_CASE("alpha 1 draws only sim") {
    MixtureSpec spec;
    spec.sim_pool = {ds(7, 2, 10)};
    spec.alpha = 1.0;
    const ProbabilityTable t = assign_weights(spec);
    Rng rng(51);
    for (const SampleKey& k : sample_batch(t, 200, rng)) {
        CHECK(k.pool == Pool::Sim);
    }
}

TEST_CASE("probabilities sum to one within 1e-12 across random specs") {
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        MixtureSpec spec;
        const int n_real = 1 + static_cast<int>(rng.uniform_below(3));
        const int n_sim = 1 + static_cast<int>(rng.uniform_below(4));
        for (int i = 0; i < n_real; ++i) {
            spec.real_pool.push_back(ds(100 + trial * 10 + i,
                                        1 + static_cast<int>(rng.uniform_below(5)),
                                        1 + static_cast<int>(rng.uniform_below(12))));
        }
        for (int i = 0; i < n_sim; ++i) {
            spec.sim_pool.push_back(ds(200 + trial * 10 + i,
                                       1 + static_cast<int>(rng.uniform_below(5)),
                                       1 + static_cast<int>(rng.uniform_below(12))));
        }
        spec.alpha = rng.uniform();
        if (trial % 3 == 0) {
            // Random normalized subweights.
            double sum = 0.0;
            for (int i = 0; i < n_sim; ++i) {
                spec.sim_subweights.push_back(0.1 + rng.uniform());
                sum += spec.sim_subweights.back();
            }
            for (double& w : spec.sim_subweights) w /= sum;
        }
        const ProbabilityTable t = assign_weights(spec);
        CHECK(std::abs(t.total() - 1.0) < 1e-12);
    }
}

TEST_CASE("empty pools with nonzero mass are rejected") {
    MixtureSpec no_sim;
    no_sim.real_pool = {ds(8, 2, 5)};
    no_sim.alpha = 0.5;
    CHECK_THROWS_WITH_AS(assign_weights(no_sim), doctest::Contains("empty pool"),
                         SamplerError);
    MixtureSpec no_real;
    no_real.sim_pool = {ds(9, 2, 5)};
    no_real.alpha = 0.5;
    CHECK_THROWS_WITH_AS(assign_weights(no_real), doctest::Contains("empty pool"),
                         SamplerError);
    // Boundaries are fine.
    no_sim.alpha = 0.0;
    CHECK_NOTHROW(assign_weights(no_sim));
    no_real.alpha = 1.0;
    CHECK_NOTHROW(assign_weights(no_real));
}

TEST_CASE("bad alpha and malformed subweights are rejected") {
    MixtureSpec spec;
    spec.real_pool = {ds(10, 1, 5)};
    spec.sim_pool = {ds(11, 1, 5)};
    spec.alpha = 1.5;
    CHECK_THROWS_AS(assign_weights(spec), SamplerError);
    spec.alpha = 0.5;
    spec.sim_subweights = {0.4, 0.4};  // wrong size
    CHECK_THROWS_AS(assign_weights(spec), SamplerError);
    spec.sim_subweights = {0.7};  // does not sum to 1
    CHECK_THROWS_AS(assign_weights(spec), SamplerError);
}

TEST_CASE("sampling is deterministic given the seed") {
    MixtureSpec spec;
    spec.real_pool = {ds(12, 3, 7)};
    spec.sim_pool = {ds(13, 4, 9)};
    spec.alpha = 0.9;
    const ProbabilityTable t = assign_weights(spec);
    Rng a(99), b(99);
    CHECK(sample_batch(t, 500, a) == sample_batch(t, 500, b));
}

TEST_CASE("empirical sim fraction tracks alpha within 3 sigma") {
    MixtureSpec spec;
    spec.real_pool = {ds(14, 2, 10)};
    spec.sim_pool = {ds(15, 10, 10)};
    spec.alpha = 0.9;
    const ProbabilityTable t = assign_weights(spec);
    Rng rng(60);
    const int n = 100000;
    int sim = 0;
    for (int i = 0; i < n; ++i) {
        if (t.sample(rng).pool == Pool::Sim) ++sim;
    }
    const double frac = static_cast<double>(sim) / n;
    CHECK(std::abs(frac - 0.9) < 3.0 * std::sqrt(0.9 * 0.1 / n));
}

TEST_CASE("frames are uniform within a dataset regardless of trajectory length") {
    // One sim dataset with trajectories of very different lengths.
    Rng build(61);
    Dataset uneven;
    uneven.name = "uneven";
    uneven.manifest = testing::synthetic_manifest();
    uneven.trajectories.push_back(testing::synthetic_trajectory(build, 2));
    uneven.trajectories.push_back(testing::synthetic_trajectory(build, 18));
    MixtureSpec spec;
    spec.real_pool = {ds(16, 1, 5)};
    spec.sim_pool = {std::make_shared<const Dataset>(std::move(uneven))};
    spec.alpha = 1.0;
    const ProbabilityTable t = assign_weights(spec);
    Rng rng(62);
    int long_traj = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        if (t.sample(rng).trajectory_index == 1) ++long_traj;
    }
    // 18 of 20 frames sit in trajectory 1.
    const double frac = static_cast<double>(long_traj) / n;
    CHECK(std::abs(frac - 0.9) < 3.0 * std::sqrt(0.9 * 0.1 / n));
}

TEST_CASE("the real pool acts as one merged dataset") {
    MixtureSpec spec;
    spec.real_pool = {ds(30, 1, 5), ds(31, 4, 10)};  // 5 + 40 frames
    spec.sim_pool = {ds(32, 2, 10)};
    spec.alpha = 0.4;
    const ProbabilityTable t = assign_weights(spec);
    // Every real frame has probability (1-alpha)/45 regardless of dataset.
    const double expect = 0.6 / 45.0;
    CHECK(t.probability_of(SampleKey{Pool::Real, 0, 0, 2}) ==
          doctest::Approx(expect).epsilon(1e-15));
    CHECK(t.probability_of(SampleKey{Pool::Real, 1, 3, 9}) ==
          doctest::Approx(expect).epsilon(1e-15));
    // Draw frequencies split across real datasets by frame count.
    Rng rng(64);
    int small = 0, total_real = 0;
    for (int i = 0; i < 30000; ++i) {
        const SampleKey k = t.sample(rng);
        if (k.pool == Pool::Real) {
            ++total_real;
            if (k.dataset_index == 0) ++small;
        }
    }
    const double frac = static_cast<double>(small) / total_real;
    CHECK(std::abs(frac - 5.0 / 45.0) < 0.02);
}

TEST_CASE("duplicating the sim data leaves pool masses unchanged") {
    MixtureSpec spec;
    spec.real_pool = {ds(17, 2, 10)};
    spec.sim_pool = {ds(18, 3, 10)};
    spec.alpha = 0.8;
    const ProbabilityTable base = assign_weights(spec);
    const double p_base = base.probability_of(SampleKey{Pool::Sim, 0, 0, 0});

    // Double every sim trajectory.
    Dataset doubled = *spec.sim_pool[0];
    for (const Trajectory& t : spec.sim_pool[0]->trajectories) {
        doubled.trajectories.push_back(t);
    }
    MixtureSpec spec2 = spec;
    spec2.sim_pool = {std::make_shared<const Dataset>(std::move(doubled))};
    const ProbabilityTable dup = assign_weights(spec2);
    const double p_dup = dup.probability_of(SampleKey{Pool::Sim, 0, 0, 0});
    CHECK(p_dup == doctest::Approx(p_base / 2.0).epsilon(1e-12));
    CHECK(std::abs(dup.total() - 1.0) < 1e-12);
    // Real probabilities unchanged.
    CHECK(dup.probability_of(SampleKey{Pool::Real, 0, 0, 0}) ==
          doctest::Approx(base.probability_of(SampleKey{Pool::Real, 0, 0, 0}))
              .epsilon(1e-15));
}

TEST_CASE("effective loss weighting returns (alpha, 1-alpha)") {
    MixtureSpec spec;
    spec.real_pool = {ds(19, 1, 5)};
    spec.sim_pool = {ds(20, 1, 5)};
    for (double a : {0.9, 0.99, 0.5}) {
        spec.alpha = a;
        const auto [ws, wr] = effective_loss_weighting(spec);
        CHECK(ws == a);
        CHECK(wr == 1.0 - a);
    }
}

TEST_CASE("expected batch loss matches the weighted-loss form") {
    // Frozen per-sample losses; Monte Carlo over batches must match
    // alpha * mean(sim) + (1-alpha) * mean(real) within 3 standard errors.
    MixtureSpec spec;
    spec.real_pool = {ds(21, 2, 8)};
    spec.sim_pool = {ds(22, 3, 8)};
    spec.alpha = 0.9;
    const ProbabilityTable t = assign_weights(spec);

    const auto loss_of = [](const SampleKey& k) {
        // Arbitrary frozen deterministic per-sample loss.
        return 0.1 + 0.37 * std::sin(1.0 + k.dataset_index * 3.1 +
                                     k.trajectory_index * 1.7 + k.frame_index) +
               (k.pool == Pool::Sim ? 0.25 : -0.1);
    };

    double sim_mean = 0.0;
    int sim_n = 0;
    for (int tr = 0; tr < 3; ++tr) {
        for (int f = 0; f < 8; ++f) {
            sim_mean += loss_of(SampleKey{Pool::Sim, 0, tr, f});
            ++sim_n;
        }
    }
    sim_mean /= sim_n;
    double real_mean = 0.0;
    int real_n = 0;
    for (int tr = 0; tr < 2; ++tr) {
        for (int f = 0; f < 8; ++f) {
            real_mean += loss_of(SampleKey{Pool::Real, 0, tr, f});
            ++real_n;
        }
    }
    real_mean /= real_n;
    const double expected = 0.9 * sim_mean + 0.1 * real_mean;

    Rng rng(63);
    const int batches = 4000, batch_size = 16;
    double grand = 0.0, grand_sq = 0.0;
    for (int b = 0; b < batches; ++b) {
        double m = 0.0;
        for (const SampleKey& k : sample_batch(t, batch_size, rng)) {
            m += loss_of(k);
        }
        m /= batch_size;
        grand += m;
        grand_sq += m * m;
    }
    grand /= batches;
    const double var_batch = grand_sq / batches - grand * grand;
    const double se = std::sqrt(var_batch / batches);
    CHECK(std::abs(grand - expected) < 3.0 * se + 1e-12);
}

}  // TEST_SUITE sampler
