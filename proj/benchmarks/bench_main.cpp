#include <benchmark/benchmark.h>

#include <cmath>

#include "multibump/classifier.hpp"
#include "multibump/continuation.hpp"
#include "multibump/greens.hpp"
#include "multibump/newton.hpp"
#include "multibump/shooting.hpp"

using namespace multibump;

namespace {

const Weight& sine(int m) {
    static const Weight w3 = Weight::build(WeightSpec::sin_multibump(3));
    static const Weight w5 = Weight::build(WeightSpec::sin_multibump(5));
    return m == 3 ? w3 : w5;
}

void BM_apply_K(benchmark::State& state) {
    Grid g(static_cast<int>(state.range(0)), 1.0);
    std::vector<double> f(g.size());
    for (int j = 0; j < g.size(); ++j) f[j] = std::exp(g.x(j));
    for (auto _ : state) benchmark::DoNotOptimize(apply_K(g, f));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_apply_K)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_integrate_ivp(benchmark::State& state) {
    ShootingField f;
    f.lambda = -80;
    for (auto _ : state) benchmark::DoNotOptimize(integrate_ivp(sine(3), f, 50.0, ShootingCaps{}));
}
BENCHMARK(BM_integrate_ivp);

void BM_newton_solve(benchmark::State& state) {
    Grid g(static_cast<int>(state.range(0)), 1.0);
    auto seed = seed_profile(g, IndexSet{1, 2}, sine(3), -80, 2 * std::sqrt(80.0));
    for (auto _ : state) benchmark::DoNotOptimize(newton_solve(g, -80, sine(3), 3, seed, NewtonConfig{}));
}
BENCHMARK(BM_newton_solve)->Arg(513)->Arg(2049)->Unit(benchmark::kMillisecond);

void BM_solve_all(benchmark::State& state) {
    Grid g(2049, 1.0);
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_all(-160, sine(m), 3, NewtonConfig{}, g, ClassifierConfig{}));
}
BENCHMARK(BM_solve_all)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_enumerate_solutions(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_solutions(-80, sine(m), 3, ScanOptions{}));
}
BENCHMARK(BM_enumerate_solutions)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_continue_branch(benchmark::State& state) {
    Grid g(257, 1.0);
    BranchPoint seed = init_branch(sine(3), 3, 1e-4, g);
    for (auto _ : state) benchmark::DoNotOptimize(continue_branch(sine(3), 3, seed, ContinuationConfig{}, g));
}
BENCHMARK(BM_continue_branch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
