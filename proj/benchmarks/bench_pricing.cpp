#include <benchmark/benchmark.h>

#include "mabs/pricing.hpp"

namespace {

mabs::PricingRequest call_request(int n, double rho, mabs::PricingMethod method) {
    mabs::MarketParams params(0.05, std::vector<double>(n, 0.2), 1.0);
    std::vector<double> corr(n * (n - 1) / 2, rho);
    Eigen::VectorXd spot = Eigen::VectorXd::Constant(n, 100.0);
    return mabs::PricingRequest{params, mabs::CorrelationPoint(n, corr), spot, 0.0,
                                mabs::PayoffDescriptor::basket_call(
                                    std::vector<double>(n, 1.0 / n), 100.0),
                                method};
}

void BM_PriceQuadrature1D(benchmark::State& state) {
    auto req = call_request(2, 0.0, mabs::QuadratureSpec{64, 1e-8});
    req.payoff = mabs::PayoffDescriptor::vanilla_call(0, 100.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::price(req));
    }
}
BENCHMARK(BM_PriceQuadrature1D);

void BM_PriceQuadrature2D(benchmark::State& state) {
    auto req = call_request(2, 0.5, mabs::QuadratureSpec{32, 1e-6});
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::price(req));
    }
}
BENCHMARK(BM_PriceQuadrature2D);

void BM_PriceMonteCarlo(benchmark::State& state) {
    auto req = call_request(3, 0.3, mabs::MonteCarloSpec{
                                        static_cast<long>(state.range(0)), 42});
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::price(req));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PriceMonteCarlo)->Arg(10000)->Arg(100000);

void BM_DegenerateVertexQuadrature(benchmark::State& state) {
    auto req = call_request(3, 1.0, mabs::QuadratureSpec{64, 1e-9});
    for (auto _ : state) {
        benchmark::DoNotOptimize(mabs::price(req));
    }
}
BENCHMARK(BM_DegenerateVertexQuadrature);

}  // namespace

BENCHMARK_MAIN();
