#pragma once

#include <vector>

#include "somscreen/som.hpp"

// Batch kernels over samples or neurons. The serial versions are the
// reference the OpenMP versions are tested and benchmarked against; both
// must produce bit-identical results.
namespace somscreen::kernels {

namespace serial {
std::vector<BmuResult> bmu_batch(const Lattice& lattice, const SampleMatrix& data);
std::vector<double> unnormalized_distance_map(const Lattice& lattice);
}  // namespace serial

namespace parallel {
std::vector<BmuResult> bmu_batch(const Lattice& lattice, const SampleMatrix& data);
std::vector<double> unnormalized_distance_map(const Lattice& lattice);
}  // namespace parallel

/// Divides by the maximum; leaves an all-zero grid untouched.
DistanceMap normalize_distance_map(const Lattice& lattice, std::vector<double> raw);

}  // namespace somscreen::kernels
