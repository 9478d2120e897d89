#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <omp.h>

#include <random>

#include "oracles.hpp"
#include "somscreen/kernels.hpp"

using namespace somscreen;

TEST_CASE("parallel BMU batch is bit-identical to the serial reference") {
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int threads : {1, 2, 4, 7}) {
        omp_set_num_threads(threads);
        for (int trial = 0; trial < 25; ++trial) {
            const auto lattice = oracle::random_lattice(gen, 15, 6);
            SampleMatrix data(lattice.dim());
            std::vector<double> x(lattice.dim());
            for (int i = 0; i < 257; ++i) {
                for (auto& v : x) v = u(gen);
                data.push_back(x);
            }
            const auto serial = kernels::serial::bmu_batch(lattice, data);
            const auto parallel = kernels::parallel::bmu_batch(lattice, data);
            REQUIRE(serial == parallel);
            const auto w = oracle::weights_of(lattice);
            for (std::size_t i = 0; i < data.size(); ++i) {
                const auto row = data.row(i);
                const auto [idx, dist] = oracle::brute_force_bmu(w, {row.begin(), row.end()});
                CHECK(parallel[i] == BmuResult{idx, dist});
            }
        }
    }
}

TEST_CASE("parallel distance map is bit-identical to the serial all-pairs reference") {
    std::mt19937_64 gen(405);
    for (int threads : {1, 3, 8}) {
        omp_set_num_threads(threads);
        for (int trial = 0; trial < 40; ++trial) {
            const auto lattice = oracle::random_lattice(gen, 16, 5);
            REQUIRE(kernels::serial::unnormalized_distance_map(lattice) ==
                    kernels::parallel::unnormalized_distance_map(lattice));
        }
    }
}

TEST_CASE("batch kernels handle empty input and reject dimension mismatch") {
    Lattice lattice(2, 2, 3, Topology::hexagonal);
    CHECK(kernels::parallel::bmu_batch(lattice, SampleMatrix(3)).empty());
    SampleMatrix wrong(2);
    const double x[2] = {1, 2};
    wrong.push_back(x);
    CHECK_THROWS_AS(kernels::parallel::bmu_batch(lattice, wrong), InvalidArgument);
    CHECK_THROWS_AS(kernels::serial::bmu_batch(lattice, wrong), InvalidArgument);
}

TEST_CASE("single-neuron lattice has a zero distance map") {
    Lattice lattice(1, 1, 2, Topology::rectangular);
    lattice.weight(0)[0] = 4;
    const auto dm = distance_map(lattice);
    CHECK(dm.values == std::vector<double>{0.0});
}
