// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>

#include "somscreen/kernels.hpp"

using namespace somscreen;

namespace {

Lattice random_lattice(std::size_t rows, std::size_t cols, std::size_t dim) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Lattice lattice(rows, cols, dim, Topology::hexagonal);
    for (auto& w : lattice.weights()) w = u(gen);
    return lattice;
}

SampleMatrix random_samples(std::size_t n, std::size_t dim) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SampleMatrix data(dim);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : row) v = u(gen);
        data.push_back(row);
    }
    return data;
}

// A 65x22 lattice of six-dimensional weights, the size a large screening set produces.
template <auto Kernel>
void bmu_batch(benchmark::State& state) {
    const auto lattice = random_lattice(65, 22, 6);
    const auto data = random_samples(static_cast<std::size_t>(state.range(0)), 6);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(lattice, data));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void distance_map(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto lattice = random_lattice(side, side, 6);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(lattice));
}

}  // namespace

BENCHMARK(bmu_batch<kernels::serial::bmu_batch>)->Name("bmu_batch/serial")->Arg(1000)->Arg(20000)->UseRealTime();
BENCHMARK(bmu_batch<kernels::parallel::bmu_batch>)->Name("bmu_batch/parallel")->Arg(1000)->Arg(20000)->UseRealTime();
BENCHMARK(distance_map<kernels::serial::unnormalized_distance_map>)
    ->Name("distance_map/serial")
    ->Arg(20)
    ->Arg(60)
    ->UseRealTime();
BENCHMARK(distance_map<kernels::parallel::unnormalized_distance_map>)
    ->Name("distance_map/parallel")
    ->Arg(20)
    ->Arg(60)
    ->UseRealTime();

BENCHMARK_MAIN();
