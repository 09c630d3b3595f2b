// Monte Carlo simulation of the two samplers under comparison.
//
// Flow sampler (FM): N deterministic Euler steps of dX = E[V | X_t] dt from
// X_0 ~ N(0, I_d).
//
// Transition sampler (TM): per outer step, draws the difference latent V
// from its conditional posterior and moves X by dt * V. The draw is either
// exact ancestral sampling from the analytic posterior (inner_mode::exact,
// the S -> infinity limit) or an S-step Euler simulation of the inner flow
// whose source is N(0, I_d) and whose target is that posterior
// (inner_mode::euler).
//
// All randomness is derived from (master_seed, trajectory, outer_step,
// purpose) streams, so runs are bitwise reproducible for any thread count.

#ifndef TMFM_SAMPLERS_HPP
#define TMFM_SAMPLERS_HPP

#include <cstdint>
#include <vector>

#include "tmfm/targets.hpp"

namespace tmfm {

enum class InnerMode { euler, exact };

struct SamplerKind {
    enum class Family { fm, tm };

    Family family = Family::fm;
    InnerMode inner_mode = InnerMode::euler;
    int inner_steps = 1;  // S; meaningful for tm with euler inner mode

    static SamplerKind flow() { return SamplerKind{Family::fm, InnerMode::euler, 1}; }
    static SamplerKind transition(int s, InnerMode mode = InnerMode::euler);
    static SamplerKind transition_exact() { return SamplerKind{Family::tm, InnerMode::exact, 1}; }

    bool is_tm() const { return family == Family::tm; }
};

struct SeedInfo {
    std::uint64_t master_seed = 0;
};

struct SampleBatch {
    int t_index = 0;  // outer node n; states live at t = n / N
    int dim = 0;
    std::size_t count = 0;
    std::vector<double> states;  // flat (count x dim)
    SeedInfo seed_info;

    std::span<const double> state(std::size_t i) const {
        return std::span<const double>(states).subspan(i * static_cast<std::size_t>(dim),
                                                       static_cast<std::size_t>(dim));
    }
};

// X_0 ~ N(0, I_d), one stream per trajectory.
SampleBatch init_batch(int dim, std::size_t count, std::uint64_t master_seed);

// One outer Euler step of the flow sampler. Deterministic. Throws on
// stepping past t = 1 or on dimension mismatch.
SampleBatch fm_step(const UnimodalGaussianTarget& target, const SampleBatch& batch,
                    const Schedule& schedule);
SampleBatch fm_step(const GaussianMixtureTarget& target, const SampleBatch& batch,
                    const Schedule& schedule);

// One outer step of the transition sampler. Stochastic; reproducible from
// batch.seed_info. For euler inner mode kind.inner_steps must equal
// schedule.n_inner.
SampleBatch tm_step(const UnimodalGaussianTarget& target, const SampleBatch& batch,
                    const Schedule& schedule, const SamplerKind& kind);
SampleBatch tm_step(const GaussianMixtureTarget& target, const SampleBatch& batch,
                    const Schedule& schedule, const SamplerKind& kind);

struct RunOptions {
    int threads = 1;               // <= 0 means hardware concurrency
    bool record_trajectory = false;  // keep batches at every node 0..N
};

struct RunResult {
    SampleBatch final_batch;
    std::vector<SampleBatch> trajectory;  // empty unless recording was requested
};

RunResult run_sampler(const UnimodalGaussianTarget& target, const SamplerKind& kind,
                      const Schedule& schedule, std::size_t count, std::uint64_t seed,
                      const RunOptions& options = {});
RunResult run_sampler(const GaussianMixtureTarget& target, const SamplerKind& kind,
                      const Schedule& schedule, std::size_t count, std::uint64_t seed,
                      const RunOptions& options = {});

// Column-wise empirical moments of a batch: per-coordinate mean and the
// average per-coordinate variance (the isotropic variance estimate).
struct BatchMoments {
    std::vector<double> mean;
    double isotropic_variance;
};
BatchMoments batch_moments(const SampleBatch& batch);

}  // namespace tmfm

#endif  // TMFM_SAMPLERS_HPP
