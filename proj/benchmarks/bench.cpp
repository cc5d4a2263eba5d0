#include <random>

#include <benchmark/benchmark.h>

#include "qsig/harness.hpp"
#include "qsig/qubo.hpp"
#include "qsig/signal.hpp"

namespace {

qsig::QuboProblem random_problem(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    qsig::QuboProblem p(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) p.add(i, j, coef(rng));
    }
    return p;
}

void BM_Anneal(benchmark::State& state) {
    const auto p = random_problem(static_cast<std::size_t>(state.range(0)), 7);
    qsig::AnnealConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qsig::solve_anneal(p, cfg));
        ++cfg.seed;
    }
}
BENCHMARK(BM_Anneal)->Arg(4)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Exact(benchmark::State& state) {
    const auto p = random_problem(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) benchmark::DoNotOptimize(qsig::solve_exact(p));
}
BENCHMARK(BM_Exact)->Arg(4)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TrafficQubo(benchmark::State& state) {
    const qsig::HaltCountMatrix halts({{12, 3, 7, 0}});
    for (auto _ : state) {
        auto [problem, layout] = qsig::build_traffic_qubo(halts, qsig::penalty_floor(halts));
        benchmark::DoNotOptimize(qsig::decode_selection(qsig::solve_exact(problem), layout));
    }
}
BENCHMARK(BM_TrafficQubo);

void BM_DongdaHour(benchmark::State& state) {
    qsig::ExperimentConfig c;
    c.preset = "T2";
    c.controller = static_cast<qsig::ControllerKind>(state.range(0));
    c.duration = 3600.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qsig::run_experiment(c));
        ++c.seed;
    }
}
BENCHMARK(BM_DongdaHour)
    ->Arg(static_cast<int>(qsig::ControllerKind::Fixed))
    ->Arg(static_cast<int>(qsig::ControllerKind::Qubo))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
