#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "somscreen/samples.hpp"

namespace somscreen {

enum class Topology { rectangular, hexagonal };

struct PlanePosition {
    double x;
    double y;
};

/// H x W grid of neuron weight vectors, stored row-major: neuron j sits at
/// row j / cols, column j % cols.
class Lattice {
public:
    Lattice(std::size_t rows, std::size_t cols, std::size_t dim, Topology topology);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return rows_ * cols_; }
    Topology topology() const noexcept { return topology_; }

    std::span<const double> weight(std::size_t j) const { return {weights_.data() + j * dim_, dim_}; }
    std::span<double> weight(std::size_t j) { return {weights_.data() + j * dim_, dim_}; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> weights() noexcept { return weights_; }

    /// Rectangular: (c, r). Hexagonal: odd rows shifted by half a cell,
    /// row pitch sqrt(3)/2.
    PlanePosition position(std::size_t j) const;

    /// Euclidean distance between plane positions.
    double lattice_distance(std::size_t i, std::size_t j) const;

    bool operator==(const Lattice&) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::size_t dim_;
    Topology topology_;
    std::vector<double> weights_;
};

enum class InitMethod { random_uniform, pca_plane };
enum class Decay { asymptotic };

struct TrainConfig {
    /// Unset means 10 * number of training samples.
    std::optional<std::size_t> iterations;
    double sigma0 = 1.0;
    double alpha0 = 1.0;
    Topology topology = Topology::hexagonal;
    InitMethod init = InitMethod::random_uniform;
    std::uint64_t seed = 0;
    Decay decay = Decay::asymptotic;
    /// When false sigma stays at sigma0 for the whole run.
    bool decay_sigma = true;

    void validate() const;
    std::size_t resolved_iterations(std::size_t sample_count) const;
};

struct LatticeShape {
    std::size_t rows;
    std::size_t cols;
    bool operator==(const LatticeShape&) const = default;
};

struct BmuResult {
    std::size_t neuron_index;
    double distance;
    bool operator==(const BmuResult&) const = default;
};

struct DistanceMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major, each in [0, 1]

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct InitResult {
    Lattice lattice;
    /// pca_plane was requested but the data was degenerate.
    bool fell_back = false;
};

/// round(5 sqrt(K)) neurons with rows/cols following the eigenvalue ratio.
LatticeShape size_lattice(std::uint64_t sample_count, double eigen_ratio);

/// lambda1 / lambda2 of the uncentered autocorrelation matrix (1/M) sum x x^T.
/// Throws DegenerateData when lambda2 <= 1e-12.
double compute_eigen_ratio(const SampleMatrix& data);

InitResult init_lattice(LatticeShape shape, const SampleMatrix& data, const TrainConfig& config);

/// Exhaustive scan, lowest index wins ties.
BmuResult find_bmu(const Lattice& lattice, std::span<const double> x);

/// Gaussian kernel exp(-D^2 / (2 sigma^2)) on plane-position distance D.
double neighborhood_weight(const Lattice& lattice, std::size_t j, std::size_t c, double sigma);

/// Online training. Deterministic in (lattice, data, config).
Lattice train(Lattice lattice, const SampleMatrix& data, const TrainConfig& config);

double quantization_error(const Lattice& lattice, std::span<const double> x);

double average_quantization_error(const Lattice& lattice, const SampleMatrix& data);

DistanceMap distance_map(const Lattice& lattice);

}  // namespace somscreen
