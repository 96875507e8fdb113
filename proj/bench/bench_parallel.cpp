// Serial vs OpenMP throughput of the batch kernels.

#include <benchmark/benchmark.h>

#include "ctmg/parallel.hpp"
#include "ctmg/solver.hpp"
#include "ctmg/verify.hpp"
#include "corpus.hpp"
#include "fig1.hpp"

namespace {

using ctmg::Execution;

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::Serial : Execution::Parallel; }

void BM_Simulate(benchmark::State& state) {
    const auto model = ctmg::testing::fig1Model();
    const auto sched = ctmg::solve(model, ctmg::Objective::Max).scheduler;
    for (auto _ : state) benchmark::DoNotOptimize(ctmg::simulate(model, sched, 200000, 7, mode(state)));
    state.SetItemsProcessed(state.iterations() * 200000);
}

void BM_Enumerate(benchmark::State& state) {
    ctmg::testing::CorpusOptions opts;
    opts.maxLocations = 8;
    opts.maxActions = 3;
    const auto model = ctmg::testing::corpus(1, 11, opts).front();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ctmg::enumeratePositional(model, ctmg::Objective::Max, {}, 1000000, mode(state)));
}

void BM_SolveAll(benchmark::State& state) {
    const auto models = ctmg::testing::standardCorpus(40);
    for (auto _ : state) benchmark::DoNotOptimize(ctmg::solveAll(models, ctmg::Objective::Max, {}, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(models.size()));
}

} // namespace

BENCHMARK(BM_Simulate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Enumerate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveAll)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
