// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>

#include "chaoskit/core/rng.hpp"
#include "chaoskit/kernels/kernels.hpp"

namespace
{
using namespace chaoskit;

std::vector<double> normals(std::size_t n, std::uint64_t seed)
{
    RngStream rng(seed);
    std::vector<double> v(n);
    for (auto& x : v)
        x = rng.normal();
    return v;
}

DiffusionModel pairwise_model(std::size_t n_atoms)
{
    DiffusionModel m;
    m.name = "pairwise";
    m.needs_atoms = true;
    m.drift = [](std::span<const double> x, const MeasureContext& ctx, std::span<double> out) {
        double acc = 0;
        for (std::size_t j = 0; j < ctx.atoms.n; ++j)
            acc += std::tanh(ctx.atoms.atoms[j] - x[0]);
        out[0] = acc / static_cast<double>(ctx.atoms.n);
    };
    m.diffusion = [](auto, auto&, std::span<double> out) { out[0] = 0.5; };
    (void)n_atoms;
    return m;
}

template<bool Parallel>
void em_update(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    auto model = pairwise_model(n);
    auto x = normals(n, 1);
    auto xi = normals(n, 2);
    std::vector<double> out(n);
    MeasureContext ctx{MeasureView{x, n, 1, Domain::euclidean}, {}};
    for (auto _ : state)
    {
        if constexpr (Parallel)
            kernels::em_update(model, ctx, x, n, 1e-3, xi, out);
        else
            kernels::serial::em_update(model, ctx, x, n, 1e-3, xi, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetComplexityN(state.range(0));
}

template<bool Parallel>
void radial_sum(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    auto x = normals(3 * n, 3);
    auto y = normals(3 * n, 4);
    kernels::RadialKernel k = [](double r) { return std::exp(-r); };
    for (auto _ : state)
    {
        double v = Parallel ? kernels::radial_double_sum(x, y, 3, k)
                            : kernels::serial::radial_double_sum(x, y, 3, k);
        benchmark::DoNotOptimize(v);
    }
    state.SetComplexityN(state.range(0));
}
}  // namespace

BENCHMARK(em_update<true>)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(em_update<false>)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(radial_sum<true>)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(radial_sum<false>)->RangeMultiplier(4)->Range(256, 4096);

BENCHMARK_MAIN();
