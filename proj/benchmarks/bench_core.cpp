#include <benchmark/benchmark.h>

#include <random>

#include "eotlab/metrics.hpp"
#include "eotlab/oracle.hpp"

namespace {

using namespace eotlab;

std::vector<double> random_logs(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-30.0, 5.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

SinkhornProblem bench_problem(int nodes) {
    return make_problem(normalize(make_gaussian(0.0, 1.0), nodes),
                        normalize(make_gaussian(0.0, 1.0), nodes), 2.0);
}

void BM_LogSumExp(benchmark::State& state) {
    const auto v = random_logs(static_cast<std::size_t>(state.range(0)), 17);
    for (auto _ : state) benchmark::DoNotOptimize(log_sum_exp(v));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogSumExp)->Arg(1024)->Arg(4096);

void BM_HeatTransform(benchmark::State& state) {
    const auto prob = bench_problem(static_cast<int>(state.range(0)));
    std::vector<double> h(prob.nu.grid.size());
    for (std::size_t j = 0; j < h.size(); ++j)
        h[j] = prob.nu.potential_true(prob.nu.grid.nodes[j]);
    for (auto _ : state) benchmark::DoNotOptimize(heat_log_transform(h, prob.nu.grid, 2.0, 0.37));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HeatTransform)->Arg(1024)->Arg(4096);

void BM_SinkhornStep(benchmark::State& state) {
    const auto prob = bench_problem(static_cast<int>(state.range(0)));
    const HeatKernel kernel = HeatKernel::build(prob);
    SinkhornState s = make_initial_state(prob);
    for (auto _ : state) {
        sinkhorn_step(prob, kernel, s);
        benchmark::DoNotOptimize(s.phi.data());
    }
}
BENCHMARK(BM_SinkhornStep)->Arg(256)->Arg(1024);

void BM_W1Conditional(benchmark::State& state) {
    const auto prob = bench_problem(static_cast<int>(state.range(0)));
    const auto a = conditional_measure(0.2, std::vector<double>(prob.nu.grid.size(), 0.0),
                                       prob.nu.grid, 2.0);
    std::vector<double> hb(prob.nu.grid.size());
    for (std::size_t j = 0; j < hb.size(); ++j)
        hb[j] = 0.4 * prob.nu.grid.nodes[j] * prob.nu.grid.nodes[j];
    const auto b = conditional_measure(0.2, hb, prob.nu.grid, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(w1_1d_shared(a, b, prob.nu.grid.nodes));
}
BENCHMARK(BM_W1Conditional)->Arg(1024)->Arg(4096);

void BM_GaussianOracle(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(solve_gaussian(0.1, 1.2, -0.3, 0.8, 2.0));
}
BENCHMARK(BM_GaussianOracle);

void BM_RateSchedule(benchmark::State& state) {
    RateParams p;
    p.alpha_mu = p.alpha_nu = 1.0;
    p.beta_mu = p.beta_nu = 1.4;
    p.gt_mu = tanh_profile(0.4);
    p.gt_nu = tanh_profile(0.4);
    p.T = 2.0;
    for (auto _ : state) benchmark::DoNotOptimize(alpha_sequence(p, Side::Nu, 32, 1e-10));
}
BENCHMARK(BM_RateSchedule);

}  // namespace

BENCHMARK_MAIN();
