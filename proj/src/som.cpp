#include "somscreen/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "somscreen/errors.hpp"
#include "somscreen/kernels.hpp"
#include "somscreen/rng.hpp"

namespace somscreen {

namespace {

constexpr double kDegenerateEigenvalue = 1e-12;

double squared_plane_distance(const Lattice& lattice, std::size_t i, std::size_t j) {
    const auto a = lattice.position(i);
    const auto b = lattice.position(j);
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

void check_dim(const Lattice& lattice, std::size_t dim) {
    if (dim != lattice.dim())
        throw InvalidArgument("dimension mismatch: lattice dim " + std::to_string(lattice.dim()) + ", input dim " +
                              std::to_string(dim));
}

Eigen::MatrixXd second_moment(const SampleMatrix& data, const Eigen::VectorXd& center) {
    const auto d = static_cast<Eigen::Index>(data.dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(data.row(i).data(), d) - center;
        m.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    m = m.selfadjointView<Eigen::Lower>();
    return m / static_cast<double>(data.size());
}

Lattice random_uniform_lattice(LatticeShape shape, const SampleMatrix& data, const TrainConfig& config) {
    const std::size_t d = data.dim();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], x[k]);
            hi[k] = std::max(hi[k], x[k]);
        }
    }
    Lattice lattice(shape.rows, shape.cols, d, config.topology);
    Rng rng(config.seed);
    auto w = lattice.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t k = i % d;
        w[i] = rng.uniform(lo[k], hi[k]);
    }
    return lattice;
}

double linspace_unit(std::size_t i, std::size_t n) {
    return n > 1 ? -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
}

}  // namespace

Lattice::Lattice(std::size_t rows, std::size_t cols, std::size_t dim, Topology topology)
    : rows_(rows), cols_(cols), dim_(dim), topology_(topology) {
    if (rows == 0 || cols == 0 || dim == 0) throw InvalidArgument("lattice rows, cols and dim must be positive");
    weights_.assign(rows * cols * dim, 0.0);
}

PlanePosition Lattice::position(std::size_t j) const {
    const auto r = static_cast<double>(j / cols_);
    const auto c = static_cast<double>(j % cols_);
    if (topology_ == Topology::rectangular) return {c, r};
    const double shift = (j / cols_) % 2 == 1 ? 0.5 : 0.0;
    return {c + shift, r * std::numbers::sqrt3 / 2.0};
}

double Lattice::lattice_distance(std::size_t i, std::size_t j) const {
    return std::sqrt(squared_plane_distance(*this, i, j));
}

void TrainConfig::validate() const {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw InvalidArgument("sigma0 must be positive and finite");
    if (!(alpha0 > 0.0) || alpha0 > 1.0) throw InvalidArgument("alpha0 must lie in (0, 1]");
    if (iterations && *iterations == 0) throw InvalidArgument("iterations must be at least 1");
}

std::size_t TrainConfig::resolved_iterations(std::size_t sample_count) const {
    return iterations.value_or(std::max<std::size_t>(1, 10 * sample_count));
}

LatticeShape size_lattice(std::uint64_t sample_count, double eigen_ratio) {
    if (sample_count == 0) throw InvalidArgument("sample count must be positive");
    if (!std::isfinite(eigen_ratio) || !(eigen_ratio > 0.0))
        throw InvalidArgument("eigen ratio must be positive and finite");
    const double neurons = static_cast<double>(std::llround(5.0 * std::sqrt(static_cast<double>(sample_count))));
    const auto rows = std::llround(std::sqrt(neurons * eigen_ratio));
    const auto cols = std::llround(std::sqrt(neurons / eigen_ratio));
    return {static_cast<std::size_t>(std::max(2LL, rows)), static_cast<std::size_t>(std::max(2LL, cols))};
}

double compute_eigen_ratio(const SampleMatrix& data) {
    if (data.size() < 2) throw InvalidArgument("eigen ratio needs at least 2 samples");
    if (data.dim() < 2) throw InvalidArgument("eigen ratio needs at least 2 features");
    const Eigen::MatrixXd autocorr = second_moment(data, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.dim())));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(autocorr, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();  // ascending
    const double l1 = ev(ev.size() - 1);
    const double l2 = ev(ev.size() - 2);
    if (!(l2 > kDegenerateEigenvalue)) throw DegenerateData("second autocorrelation eigenvalue is zero");
    return l1 / l2;
}

InitResult init_lattice(LatticeShape shape, const SampleMatrix& data, const TrainConfig& config) {
    if (data.empty()) throw InvalidArgument("cannot initialize from empty data");
    if (shape.rows == 0 || shape.cols == 0) throw InvalidArgument("lattice shape must be positive");
    if (config.init == InitMethod::random_uniform)
        return {random_uniform_lattice(shape, data, config), false};

    const auto d = static_cast<Eigen::Index>(data.dim());
    if (data.size() < 2 || d < 2) return {random_uniform_lattice(shape, data, config), true};

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < data.size(); ++i) mean += Eigen::Map<const Eigen::VectorXd>(data.row(i).data(), d);
    mean /= static_cast<double>(data.size());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(second_moment(data, mean));
    const auto& ev = solver.eigenvalues();
    const double l1 = ev(d - 1);
    const double l2 = ev(d - 2);
    if (!(l2 > kDegenerateEigenvalue)) return {random_uniform_lattice(shape, data, config), true};

    // Eigenvectors are defined up to sign; pin the largest component positive.
    auto direction = [&](Eigen::Index col) {
        Eigen::VectorXd u = solver.eigenvectors().col(col);
        Eigen::Index arg = 0;
        u.cwiseAbs().maxCoeff(&arg);
        return u(arg) < 0 ? Eigen::VectorXd(-u) : u;
    };
    const Eigen::VectorXd axis1 = direction(d - 1) * std::sqrt(l1);
    const Eigen::VectorXd axis2 = direction(d - 2) * std::sqrt(l2);

    Lattice lattice(shape.rows, shape.cols, data.dim(), config.topology);
    for (std::size_t r = 0; r < shape.rows; ++r) {
        for (std::size_t c = 0; c < shape.cols; ++c) {
            const Eigen::VectorXd w =
                mean + linspace_unit(r, shape.rows) * axis1 + linspace_unit(c, shape.cols) * axis2;
            auto out = lattice.weight(r * shape.cols + c);
            std::copy(w.data(), w.data() + d, out.begin());
        }
    }
    return {std::move(lattice), false};
}

BmuResult find_bmu(const Lattice& lattice, std::span<const double> x) {
    check_dim(lattice, x.size());
    const std::size_t d = lattice.dim();
    const double* w = lattice.weights().data();
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lattice.size(); ++j, w += d) {
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = x[k] - w[k];
            sq += diff * diff;
        }
        if (sq < best_sq) {
            best_sq = sq;
            best = j;
        }
    }
    return {best, std::sqrt(best_sq)};
}

double neighborhood_weight(const Lattice& lattice, std::size_t j, std::size_t c, double sigma) {
    if (j >= lattice.size() || c >= lattice.size()) throw InvalidArgument("neuron index out of range");
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    return std::exp(-squared_plane_distance(lattice, j, c) / (2.0 * sigma * sigma));
}

Lattice train(Lattice lattice, const SampleMatrix& data, const TrainConfig& config) {
    config.validate();
    if (data.empty()) throw InvalidArgument("cannot train on empty data");
    check_dim(lattice, data.dim());

    const std::size_t neurons = lattice.size();
    const std::size_t d = lattice.dim();
    std::vector<PlanePosition> plane(neurons);
    for (std::size_t j = 0; j < neurons; ++j) plane[j] = lattice.position(j);

    const std::size_t total = config.resolved_iterations(data.size());
    const double half = static_cast<double>(total) / 2.0;
    Rng rng(config.seed);
    for (std::size_t n = 0; n < total; ++n) {
        const double decay = 1.0 / (1.0 + static_cast<double>(n) / half);
        const double alpha = config.alpha0 * decay;
        const double sigma = config.decay_sigma ? config.sigma0 * decay : config.sigma0;
        const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

        const auto x = data.row(rng.index(data.size()));
        const std::size_t c = find_bmu(lattice, x).neuron_index;
        for (std::size_t j = 0; j < neurons; ++j) {
            const double dx = plane[j].x - plane[c].x;
            const double dy = plane[j].y - plane[c].y;
            const double rate = alpha * std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
            if (rate == 0.0) continue;
            auto w = lattice.weight(j);
            // lerp is exact at rate 1 and stays between its endpoints.
            for (std::size_t k = 0; k < d; ++k) w[k] = std::lerp(w[k], x[k], rate);
        }
    }
    return lattice;
}

double quantization_error(const Lattice& lattice, std::span<const double> x) { return find_bmu(lattice, x).distance; }

double average_quantization_error(const Lattice& lattice, const SampleMatrix& data) {
    if (data.empty()) throw InvalidArgument("average quantization error of empty data");
    check_dim(lattice, data.dim());
    const auto bmus = kernels::parallel::bmu_batch(lattice, data);
    double sum = 0.0;
    for (const auto& b : bmus) sum += b.distance;
    return sum / static_cast<double>(bmus.size());
}

DistanceMap distance_map(const Lattice& lattice) {
    return kernels::normalize_distance_map(lattice, kernels::parallel::unnormalized_distance_map(lattice));
}

}  // namespace somscreen
