// Microbenchmarks for the hot paths: sampler steps, the closed-form trace,
// the kNN KL estimator, and the TV quadrature oracle.

#include <benchmark/benchmark.h>

#include "tmfm/bounds.hpp"
#include "tmfm/divergence.hpp"
#include "tmfm/recursion.hpp"
#include "tmfm/samplers.hpp"

namespace {

using namespace tmfm;

const UnimodalGaussianTarget& unimodal_target() {
    static const UnimodalGaussianTarget target({1.0, -0.5}, 1.0);
    return target;
}

const GaussianMixtureTarget& bimodal_target() {
    static const GaussianMixtureTarget target(
        {{0.5, {3.0, 0.0}, 0.5}, {0.5, {-3.0, 0.0}, 0.5}});
    return target;
}

void BM_FlowRunUnimodal(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const Schedule schedule(8);
    for (auto _ : state) {
        RunResult run = run_sampler(unimodal_target(), SamplerKind::flow(), schedule, count, 7);
        benchmark::DoNotOptimize(run.final_batch.states.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count) * 8);
}
BENCHMARK(BM_FlowRunUnimodal)->Arg(1 << 12)->Arg(1 << 15);

void BM_TransitionRunUnimodal(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const Schedule schedule(8, 4);
    const SamplerKind kind = SamplerKind::transition(4);
    for (auto _ : state) {
        RunResult run = run_sampler(unimodal_target(), kind, schedule, count, 7);
        benchmark::DoNotOptimize(run.final_batch.states.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count) * 8 * 4);
}
BENCHMARK(BM_TransitionRunUnimodal)->Arg(1 << 12)->Arg(1 << 15);

void BM_TransitionRunMixture(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const Schedule schedule(8, 4);
    const SamplerKind kind = SamplerKind::transition(4);
    for (auto _ : state) {
        RunResult run = run_sampler(bimodal_target(), kind, schedule, count, 7);
        benchmark::DoNotOptimize(run.final_batch.states.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count) * 8 * 4);
}
BENCHMARK(BM_TransitionRunMixture)->Arg(1 << 12);

void BM_VarianceTrace(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        VarianceTrace trace = tm_variance_trace(1.0, n, 8, 1);
        benchmark::DoNotOptimize(trace.rows.data());
    }
}
BENCHMARK(BM_VarianceTrace)->Arg(64)->Arg(1024);

void BM_KnnKL(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const auto& target = unimodal_target();
    RunResult run = run_sampler(target, SamplerKind::transition_exact(), Schedule(1), count, 11);
    const auto log_q = [&](std::span<const double> x) { return target.log_density(x); };
    for (auto _ : state) {
        KLEstimate estimate = knn_kl(run.final_batch.states, target.dim(), log_q);
        benchmark::DoNotOptimize(estimate.value);
    }
}
BENCHMARK(BM_KnnKL)->Arg(1 << 12)->Arg(1 << 14);

void BM_BruteForceTV(benchmark::State& state) {
    const auto& target = bimodal_target();
    const std::vector<double> x = {1.2, 0.3};
    for (auto _ : state) {
        const double tv = brute_force_tv(target, 0.6, x);
        benchmark::DoNotOptimize(tv);
    }
}
BENCHMARK(BM_BruteForceTV);

}  // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}
