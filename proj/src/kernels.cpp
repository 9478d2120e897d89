#include "somscreen/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "somscreen/errors.hpp"

namespace somscreen::kernels {

namespace {

// Plane distance of lattice neighbours: 8-neighbourhood on a rectangular
// grid (diagonals at sqrt 2), the six unit-distance cells on a hexagonal one.
double neighbour_radius(Topology t) { return t == Topology::rectangular ? std::sqrt(2.0) : 1.0; }
constexpr double kRadiusSlack = 1e-9;

double weight_distance(const Lattice& lattice, std::size_t i, std::size_t j) {
    const auto a = lattice.weight(i);
    const auto b = lattice.weight(j);
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

void check_batch(const Lattice& lattice, const SampleMatrix& data) {
    if (!data.empty() && data.dim() != lattice.dim()) throw InvalidArgument("dimension mismatch in batch");
}

}  // namespace

namespace serial {

std::vector<BmuResult> bmu_batch(const Lattice& lattice, const SampleMatrix& data) {
    check_batch(lattice, data);
    std::vector<BmuResult> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.push_back(find_bmu(lattice, data.row(i)));
    return out;
}

std::vector<double> unnormalized_distance_map(const Lattice& lattice) {
    const double radius = neighbour_radius(lattice.topology()) + kRadiusSlack;
    std::vector<double> raw(lattice.size(), 0.0);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j < lattice.size(); ++j) {
            if (i == j || lattice.lattice_distance(i, j) > radius) continue;
            sum += weight_distance(lattice, i, j);
            ++count;
        }
        raw[i] = count ? sum / static_cast<double>(count) : 0.0;
    }
    return raw;
}

}  // namespace serial

namespace parallel {

std::vector<BmuResult> bmu_batch(const Lattice& lattice, const SampleMatrix& data) {
    check_batch(lattice, data);
    const auto n = static_cast<std::ptrdiff_t>(data.size());
    std::vector<BmuResult> out(data.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = find_bmu(lattice, data.row(i));
    return out;
}

std::vector<double> unnormalized_distance_map(const Lattice& lattice) {
    const double radius = neighbour_radius(lattice.topology()) + kRadiusSlack;
    const auto rows = static_cast<std::ptrdiff_t>(lattice.rows());
    const auto cols = static_cast<std::ptrdiff_t>(lattice.cols());
    std::vector<double> raw(lattice.size(), 0.0);
    // Every neighbour lies in the surrounding 3 x 3 window; visiting it in
    // row-major order keeps the summation order of the serial scan.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        for (std::ptrdiff_t c = 0; c < cols; ++c) {
            const auto i = static_cast<std::size_t>(r * cols + c);
            double sum = 0.0;
            std::size_t count = 0;
            for (std::ptrdiff_t rr = std::max<std::ptrdiff_t>(0, r - 1); rr <= std::min(rows - 1, r + 1); ++rr) {
                for (std::ptrdiff_t cc = std::max<std::ptrdiff_t>(0, c - 1); cc <= std::min(cols - 1, c + 1); ++cc) {
                    const auto j = static_cast<std::size_t>(rr * cols + cc);
                    if (i == j || lattice.lattice_distance(i, j) > radius) continue;
                    sum += weight_distance(lattice, i, j);
                    ++count;
                }
            }
            raw[i] = count ? sum / static_cast<double>(count) : 0.0;
        }
    }
    return raw;
}

}  // namespace parallel

DistanceMap normalize_distance_map(const Lattice& lattice, std::vector<double> raw) {
    if (raw.size() != lattice.size()) throw InvalidArgument("distance map size mismatch");
    const double peak = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
    if (peak > 0.0)
        for (auto& v : raw) v /= peak;
    return {lattice.rows(), lattice.cols(), std::move(raw)};
}

}  // namespace somscreen::kernels
