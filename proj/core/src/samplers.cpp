#include "tmfm/samplers.hpp"

#include <cmath>
#include <stdexcept>

#include "mixture_detail.hpp"
#include "path_detail.hpp"
#include "tmfm/parallel.hpp"
#include "tmfm/rng.hpp"

namespace tmfm {

namespace {

// Per-worker state for the unimodal target: closed-form posterior, no
// responsibilities needed.
struct UnimodalKernel {
    const UnimodalGaussianTarget& target;
    std::vector<double> post_mean;
    std::vector<double> inner_state;

    explicit UnimodalKernel(const UnimodalGaussianTarget& t)
        : target(t),
          post_mean(static_cast<std::size_t>(t.dim())),
          inner_state(static_cast<std::size_t>(t.dim())) {}

    void fm_advance(double t, double dt, std::span<double> x) {
        const double b = detail::path_b(t, target.sigma);
        const double k = detail::path_a(t, target.sigma) / b;
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += dt * (target.mu[i] + k * (x[i] - t * target.mu[i]));
    }

    void tm_advance(int n, const Schedule& schedule, const SamplerKind& kind,
                    std::span<double> x, std::uint64_t master, std::uint64_t traj) {
        const double t = schedule.t(n);
        const double dt = schedule.dt();
        const double b = detail::path_b(t, target.sigma);
        const double k = detail::path_a(t, target.sigma) / b;
        const double tau = std::sqrt(target.sigma * target.sigma / b);
        detail::component_posterior_mean(target.mu, k, t, x, post_mean);

        Rng rng = Rng::stream(master, traj, static_cast<std::uint64_t>(n), stream_tag::inner_noise);
        auto v = std::span<double>(inner_state);
        if (kind.inner_mode == InnerMode::exact) {
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = post_mean[i] + tau * rng.normal();
        } else {
            rng.normal_fill(v);  // V_0 ~ N(0, I)
            const double ds = schedule.ds();
            for (int s_idx = 0; s_idx < schedule.n_inner; ++s_idx) {
                const double s = schedule.t_inner(s_idx);
                const double b_in = detail::path_b(s, tau);
                const double k_in = detail::path_a(s, tau) / b_in;
                for (std::size_t i = 0; i < v.size(); ++i)
                    v[i] += ds * (post_mean[i] + k_in * (v[i] - s * post_mean[i]));
            }
        }
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * v[i];
    }
};

// Per-worker state for mixture targets: flat component representation plus
// reusable buffers for the conditional posterior and the inner flow.
struct MixtureKernel {
    int dim;
    int k_count;
    std::vector<double> log_pi;
    std::vector<double> mu_flat;
    std::vector<double> sigma;

    std::vector<double> lw;          // posterior log responsibilities
    std::vector<double> post_means;  // K x dim
    std::vector<double> post_taus;   // K
    std::vector<double> lw_scratch;  // inner responsibilities
    std::vector<double> velocity;
    std::vector<double> inner_state;

    explicit MixtureKernel(const GaussianMixtureTarget& target)
        : dim(target.dim()), k_count(target.size()) {
        const auto kc = static_cast<std::size_t>(k_count);
        log_pi.resize(kc);
        sigma.resize(kc);
        mu_flat.resize(kc * static_cast<std::size_t>(dim));
        for (int j = 0; j < k_count; ++j) {
            const auto& c = target.component(j);
            log_pi[static_cast<std::size_t>(j)] = std::log(c.weight);
            sigma[static_cast<std::size_t>(j)] = c.sigma;
            std::copy(c.mu.begin(), c.mu.end(),
                      mu_flat.begin() + static_cast<std::ptrdiff_t>(j) * dim);
        }
        lw.resize(kc);
        post_means.resize(kc * static_cast<std::size_t>(dim));
        post_taus.resize(kc);
        lw_scratch.resize(kc);
        velocity.resize(static_cast<std::size_t>(dim));
        inner_state.resize(static_cast<std::size_t>(dim));
    }

    void fm_advance(double t, double dt, std::span<double> x) {
        detail::mixture_velocity_into(log_pi, mu_flat, sigma, dim, t, x, velocity, lw_scratch);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * velocity[i];
    }

    // Fills lw (normalized log responsibilities), post_means, post_taus at
    // (t, x).
    void compute_posterior(double t, std::span<const double> x) {
        detail::log_responsibilities_into(log_pi, mu_flat, sigma, dim, t, x, lw);
        for (int j = 0; j < k_count; ++j) {
            const double s = sigma[static_cast<std::size_t>(j)];
            const double b = detail::path_b(t, s);
            const double k = detail::path_a(t, s) / b;
            detail::component_posterior_mean(vec::row(std::span<const double>(mu_flat),
                                                      static_cast<std::size_t>(j), dim),
                                             k, t, x,
                                             vec::row(std::span<double>(post_means),
                                                      static_cast<std::size_t>(j), dim));
            post_taus[static_cast<std::size_t>(j)] = std::sqrt(s * s / b);
        }
    }

    void tm_advance(int n, const Schedule& schedule, const SamplerKind& kind,
                    std::span<double> x, std::uint64_t master, std::uint64_t traj) {
        const double t = schedule.t(n);
        const double dt = schedule.dt();
        compute_posterior(t, x);

        auto v = std::span<double>(inner_state);
        if (kind.inner_mode == InnerMode::exact) {
            Rng pick_rng =
                Rng::stream(master, traj, static_cast<std::uint64_t>(n), stream_tag::component_pick);
            const std::size_t j = pick_component(pick_rng);
            Rng rng =
                Rng::stream(master, traj, static_cast<std::uint64_t>(n), stream_tag::inner_noise);
            const auto mean = vec::row(std::span<const double>(post_means), j, dim);
            const double tau = post_taus[j];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = mean[i] + tau * rng.normal();
        } else {
            Rng rng =
                Rng::stream(master, traj, static_cast<std::uint64_t>(n), stream_tag::inner_noise);
            rng.normal_fill(v);
            const double ds = schedule.ds();
            for (int s_idx = 0; s_idx < schedule.n_inner; ++s_idx) {
                const double s = schedule.t_inner(s_idx);
                detail::mixture_velocity_into(lw, post_means, post_taus, dim, s, v, velocity,
                                              lw_scratch);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] += ds * velocity[i];
            }
        }
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * v[i];
    }

    std::size_t pick_component(Rng& rng) const {
        if (k_count == 1) return 0;
        const double u = rng.uniform();
        double cum = 0.0;
        for (int j = 0; j < k_count; ++j) {
            cum += std::exp(lw[static_cast<std::size_t>(j)]);
            if (u < cum) return static_cast<std::size_t>(j);
        }
        return static_cast<std::size_t>(k_count - 1);
    }
};

template <class Kernel, class Target>
SampleBatch step_batch(const Target& target, const SampleBatch& batch, const Schedule& schedule,
                       const SamplerKind* kind) {
    if (batch.dim != target.dim()) throw std::invalid_argument("step: batch/target dimension mismatch");
    if (batch.t_index >= schedule.n_outer)
        throw std::invalid_argument("step: batch already at t = 1; cannot step past the endpoint");
    if (kind && kind->is_tm() && kind->inner_mode == InnerMode::euler &&
        kind->inner_steps != schedule.n_inner)
        throw std::invalid_argument("step: kind.inner_steps disagrees with schedule.n_inner");

    SampleBatch next = batch;
    next.t_index = batch.t_index + 1;
    Kernel kernel(target);
    const double t = schedule.t(batch.t_index);
    const double dt = schedule.dt();
    for (std::size_t m = 0; m < batch.count; ++m) {
        auto x = vec::row(std::span<double>(next.states), m, batch.dim);
        if (kind == nullptr) {
            kernel.fm_advance(t, dt, x);
        } else {
            kernel.tm_advance(batch.t_index, schedule, *kind, x, batch.seed_info.master_seed, m);
        }
    }
    return next;
}

template <class Kernel, class Target>
RunResult run_impl(const Target& target, const SamplerKind& kind, const Schedule& schedule,
                   std::size_t count, std::uint64_t seed, const RunOptions& options) {
    if (count < 1) throw std::invalid_argument("run_sampler: need at least one trajectory");
    if (kind.is_tm() && kind.inner_mode == InnerMode::euler && kind.inner_steps != schedule.n_inner)
        throw std::invalid_argument("run_sampler: kind.inner_steps disagrees with schedule.n_inner");

    const int d = target.dim();
    const int n_steps = schedule.n_outer;

    RunResult result;
    result.final_batch.t_index = n_steps;
    result.final_batch.dim = d;
    result.final_batch.count = count;
    result.final_batch.seed_info = SeedInfo{seed};
    result.final_batch.states.resize(count * static_cast<std::size_t>(d));

    if (options.record_trajectory) {
        result.trajectory.resize(static_cast<std::size_t>(n_steps) + 1);
        for (int n = 0; n <= n_steps; ++n) {
            auto& snap = result.trajectory[static_cast<std::size_t>(n)];
            snap.t_index = n;
            snap.dim = d;
            snap.count = count;
            snap.seed_info = SeedInfo{seed};
            snap.states.resize(count * static_cast<std::size_t>(d));
        }
    }

    parallel_for_blocks(count, options.threads, [&](std::size_t begin, std::size_t end) {
        Kernel kernel(target);
        std::vector<double> state(static_cast<std::size_t>(d));
        for (std::size_t m = begin; m < end; ++m) {
            Rng init_rng = Rng::stream(seed, m, 0, stream_tag::init_state);
            init_rng.normal_fill(state);
            if (options.record_trajectory) {
                auto row0 = vec::row(std::span<double>(result.trajectory[0].states), m, d);
                std::copy(state.begin(), state.end(), row0.begin());
            }
            for (int n = 0; n < n_steps; ++n) {
                if (kind.is_tm()) {
                    kernel.tm_advance(n, schedule, kind, state, seed, m);
                } else {
                    kernel.fm_advance(schedule.t(n), schedule.dt(), state);
                }
                if (options.record_trajectory) {
                    auto row = vec::row(
                        std::span<double>(result.trajectory[static_cast<std::size_t>(n) + 1].states),
                        m, d);
                    std::copy(state.begin(), state.end(), row.begin());
                }
            }
            auto out = vec::row(std::span<double>(result.final_batch.states), m, d);
            std::copy(state.begin(), state.end(), out.begin());
        }
    });
    return result;
}

}  // namespace

SamplerKind SamplerKind::transition(int s, InnerMode mode) {
    if (mode == InnerMode::euler && s < 1)
        throw std::invalid_argument("SamplerKind: euler inner mode needs S >= 1");
    return SamplerKind{Family::tm, mode, s};
}

SampleBatch init_batch(int dim, std::size_t count, std::uint64_t master_seed) {
    if (dim < 1 || count < 1) throw std::invalid_argument("init_batch: dim and count must be >= 1");
    SampleBatch batch;
    batch.t_index = 0;
    batch.dim = dim;
    batch.count = count;
    batch.seed_info = SeedInfo{master_seed};
    batch.states.resize(count * static_cast<std::size_t>(dim));
    for (std::size_t m = 0; m < count; ++m) {
        Rng rng = Rng::stream(master_seed, m, 0, stream_tag::init_state);
        rng.normal_fill(vec::row(std::span<double>(batch.states), m, dim));
    }
    return batch;
}

SampleBatch fm_step(const UnimodalGaussianTarget& target, const SampleBatch& batch,
                    const Schedule& schedule) {
    return step_batch<UnimodalKernel>(target, batch, schedule, nullptr);
}

SampleBatch fm_step(const GaussianMixtureTarget& target, const SampleBatch& batch,
                    const Schedule& schedule) {
    return step_batch<MixtureKernel>(target, batch, schedule, nullptr);
}

SampleBatch tm_step(const UnimodalGaussianTarget& target, const SampleBatch& batch,
                    const Schedule& schedule, const SamplerKind& kind) {
    if (!kind.is_tm()) throw std::invalid_argument("tm_step: kind must be a transition sampler");
    return step_batch<UnimodalKernel>(target, batch, schedule, &kind);
}

SampleBatch tm_step(const GaussianMixtureTarget& target, const SampleBatch& batch,
                    const Schedule& schedule, const SamplerKind& kind) {
    if (!kind.is_tm()) throw std::invalid_argument("tm_step: kind must be a transition sampler");
    return step_batch<MixtureKernel>(target, batch, schedule, &kind);
}

RunResult run_sampler(const UnimodalGaussianTarget& target, const SamplerKind& kind,
                      const Schedule& schedule, std::size_t count, std::uint64_t seed,
                      const RunOptions& options) {
    return run_impl<UnimodalKernel>(target, kind, schedule, count, seed, options);
}

RunResult run_sampler(const GaussianMixtureTarget& target, const SamplerKind& kind,
                      const Schedule& schedule, std::size_t count, std::uint64_t seed,
                      const RunOptions& options) {
    return run_impl<MixtureKernel>(target, kind, schedule, count, seed, options);
}

BatchMoments batch_moments(const SampleBatch& batch) {
    BatchMoments moments;
    moments.mean.assign(static_cast<std::size_t>(batch.dim), 0.0);
    for (std::size_t m = 0; m < batch.count; ++m) {
        const auto x = batch.state(m);
        for (std::size_t i = 0; i < x.size(); ++i) moments.mean[i] += x[i];
    }
    for (auto& v : moments.mean) v /= static_cast<double>(batch.count);
    double acc = 0.0;
    for (std::size_t m = 0; m < batch.count; ++m) {
        const auto x = batch.state(m);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - moments.mean[i];
            acc += diff * diff;
        }
    }
    const double denom = static_cast<double>(batch.count) * static_cast<double>(batch.dim) - 1.0;
    moments.isotropic_variance = denom > 0.0 ? acc / denom : 0.0;
    return moments;
}

}  // namespace tmfm
