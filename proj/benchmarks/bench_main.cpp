#include <benchmark/benchmark.h>

#include "polymer/localtime.hpp"
#include "polymer/paths.hpp"
#include "polymer/renorm.hpp"

namespace {

void BM_LocalTime(benchmark::State& state) {
    const polymer::TimeGrid grid(static_cast<std::size_t>(state.range(0)));
    const auto path = polymer::sample_wiener(grid, 7, 0);
    const auto reg = polymer::Regularization::fixed(0.1, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(polymer::local_time(path, reg).value);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LocalTime)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_LocalTimeGradient(benchmark::State& state) {
    const polymer::TimeGrid grid(static_cast<std::size_t>(state.range(0)));
    const auto path = polymer::sample_wiener(grid, 7, 0);
    const auto reg = polymer::Regularization::fixed(0.1, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(polymer::local_time_with_gradient(path, reg));
}
BENCHMARK(BM_LocalTimeGradient)->RangeMultiplier(2)->Range(128, 512);

void BM_LocalTimeBatch(benchmark::State& state) {
    const polymer::TimeGrid grid(512);
    const auto path = polymer::sample_wiener(grid, 7, 0);
    const double eps[] = {0.2, 0.1, 0.05};
    const double a[] = {0.1, 0.05, 0.02};
    for (auto _ : state) benchmark::DoNotOptimize(polymer::local_time_batch(path, eps, a));
}
BENCHMARK(BM_LocalTimeBatch);

// kappa2 itself is memoized, so time its derivative, which shares the cubature.
void BM_Kappa2Derivative(benchmark::State& state) {
    const double eps = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(polymer::kappa2_derivative(eps));
}
BENCHMARK(BM_Kappa2Derivative)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
