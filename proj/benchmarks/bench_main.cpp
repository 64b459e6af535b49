#include "exitlab/agmon.hpp"
#include "exitlab/kmc.hpp"
#include "exitlab/sde.hpp"
#include "exitlab/spectral.hpp"

#include <benchmark/benchmark.h>

using namespace exitlab;

static void BM_EmStep1d(benchmark::State& state) {
    const PotentialField p = catalog::p1();
    SimConfig cfg{.h = 0.3, .dt = 1e-4};
    Rng rng(1);
    Vec x = Vec::Zero();
    for (auto _ : state) {
        x = em_step(x, p, cfg, rng);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_EmStep1d);

static void BM_EmStep2d(benchmark::State& state) {
    const PotentialField p = catalog::p3();
    SimConfig cfg{.h = 0.3, .dt = 1e-4};
    Rng rng(1);
    Vec x = Vec::Zero();
    for (auto _ : state) {
        x = em_step(x, p, cfg, rng);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_EmStep2d);

static void BM_Eigenpair1d(benchmark::State& state) {
    const auto grid = DomainGrid::uniform(default_domain("P1"), static_cast<int>(state.range(0)));
    const PotentialField p = catalog::p1();
    for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(assemble_generator(p, grid, 0.2)).lambda_h);
}
BENCHMARK(BM_Eigenpair1d)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

static void BM_Eigenpair2d(benchmark::State& state) {
    const auto grid = DomainGrid::uniform(default_domain("P3"), static_cast<int>(state.range(0)));
    const PotentialField p = catalog::p3();
    for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(assemble_generator(p, grid, 0.5)).lambda_h);
}
BENCHMARK(BM_Eigenpair2d)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_AgmonDijkstra2d(benchmark::State& state) {
    const auto grid = DomainGrid::uniform(default_domain("P3"), static_cast<int>(state.range(0)));
    const AgmonGraph g(catalog::p3(), grid);
    for (auto _ : state) benchmark::DoNotOptimize(g.distances_from(0));
}
BENCHMARK(BM_AgmonDijkstra2d)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_KmcSampleJump(benchmark::State& state) {
    const std::vector<double> k = {1.0, 3.0, 0.5, 0.01};
    const RateTable t = RateTable::from_rates(k, Provenance::User);
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(sample_jump(t, rng));
}
BENCHMARK(BM_KmcSampleJump);

static void BM_KmcSampleJumpMinexp(benchmark::State& state) {
    const std::vector<double> k = {1.0, 3.0, 0.5, 0.01};
    const RateTable t = RateTable::from_rates(k, Provenance::User);
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(sample_jump_minexp(t, rng));
}
BENCHMARK(BM_KmcSampleJumpMinexp);
BENCHMARK_MAIN();
