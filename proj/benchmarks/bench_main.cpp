#include <benchmark/benchmark.h>

#include "spacs/homodyne.hpp"
#include "spacs/loss.hpp"
#include "spacs/phase_space.hpp"
#include "spacs/tomography.hpp"

namespace {

void BM_PatternTableBuild(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto table = spacs::build_pattern_functions(dim, {}, {false, 0});
        benchmark::DoNotOptimize(table.n_nodes());
    }
}
BENCHMARK(BM_PatternTableBuild)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
    const auto table = spacs::build_pattern_functions(8, {}, {false, 0});
    const auto samples = spacs::acquire_frames({0.03, 0.955}, spacs::PhaseSchedule::uniform(12, 5000), {},
                                               spacs::EfficiencyModel(0.6), 7);
    for (auto _ : state) {
        auto r = spacs::reconstruct(samples, table);
        benchmark::DoNotOptimize(r.rho.trace());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size() / 2));
}
BENCHMARK(BM_Reconstruct)->Unit(benchmark::kMillisecond);

void BM_BernoulliMap(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    const auto rho = spacs::spacs_density(1.0, {dim, 1.0});
    const spacs::EfficiencyModel eff(0.6);
    for (auto _ : state) {
        auto out = spacs::bernoulli_map(rho, eff, {0, 1.0});
        benchmark::DoNotOptimize(out.trace());
    }
}
BENCHMARK(BM_BernoulliMap)->Arg(20)->Arg(60);

void BM_WignerFromDensity(benchmark::State& state) {
    const auto rho = spacs::lossy_spacs_density(1.0, spacs::EfficiencyModel(0.6), 20);
    spacs::GridSpec spec = spacs::GridSpec::default_for(1.0);
    spec.nx = spec.ny = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto g = spacs::wigner_from_density(rho, spec);
        benchmark::DoNotOptimize(g.values().data());
    }
}
BENCHMARK(BM_WignerFromDensity)->Arg(101)->Arg(301)->Unit(benchmark::kMillisecond);

void BM_MarginalSampling(benchmark::State& state) {
    const auto dist = spacs::marginal_spacs_lossy(0.955, spacs::EfficiencyModel(0.6));
    for (auto _ : state) {
        auto s = spacs::sample_marginal(dist, 0.0, 100000, 11);
        benchmark::DoNotOptimize(s.data());
    }
}
BENCHMARK(BM_MarginalSampling)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
