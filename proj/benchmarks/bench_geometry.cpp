#include <benchmark/benchmark.h>

#include <random>

#include "mabs/correlation.hpp"

namespace {

mabs::CorrelationPoint random_point(int n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    std::vector<double> e(n * (n - 1) / 2);
    for (double& v : e) v = u(gen);
    return mabs::CorrelationPoint(n, std::move(e));
}

void BM_DeterminantClosed3(benchmark::State& state) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double x = u(gen), y = u(gen), z = u(gen);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::determinant_closed3(x, y, z));
    }
}
BENCHMARK(BM_DeterminantClosed3);

void BM_DeterminantGeneric(benchmark::State& state) {
    std::mt19937_64 gen(7);
    int n = static_cast<int>(state.range(0));
    auto m = mabs::assemble_matrix(random_point(n, gen));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::determinant_generic(m));
    }
}
BENCHMARK(BM_DeterminantGeneric)->Arg(3)->Arg(6)->Arg(8);

void BM_SpectralDecompose(benchmark::State& state) {
    std::mt19937_64 gen(7);
    int n = static_cast<int>(state.range(0));
    auto m = mabs::assemble_matrix(random_point(n, gen));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::spectral_decompose(m));
    }
}
BENCHMARK(BM_SpectralDecompose)->Arg(3)->Arg(6)->Arg(8);

void BM_Classify(benchmark::State& state) {
    std::mt19937_64 gen(7);
    auto p = random_point(4, gen);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::classify(p));
    }
}
BENCHMARK(BM_Classify);

void BM_GradientEta(benchmark::State& state) {
    std::mt19937_64 gen(7);
    int n = static_cast<int>(state.range(0));
    auto p = random_point(n, gen);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::gradient_eta(p));
    }
}
BENCHMARK(BM_GradientEta)->Arg(3)->Arg(5);

}  // namespace
