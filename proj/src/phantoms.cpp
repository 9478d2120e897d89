#include "somscreen/phantoms.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "somscreen/errors.hpp"
#include "somscreen/rng.hpp"

namespace somscreen {

namespace {

constexpr double kCentre = (static_cast<double>(kPatchSide) - 1.0) / 2.0;
constexpr double kMaxJitter = 3.0;
constexpr double kBumpWidth = 0.6;      // bump std as a fraction of the radius
constexpr double kCellNoise = 0.01;     // fraction of amplitude

struct Bump {
    double row;
    double col;
    double amplitude;
    double width;
};

void add_bump(PhasePatch& patch, const Bump& b) {
    const double inv = 1.0 / (2.0 * b.width * b.width);
    for (std::size_t r = 0; r < kPatchSide; ++r) {
        for (std::size_t c = 0; c < kPatchSide; ++c) {
            const double dr = static_cast<double>(r) - b.row;
            const double dc = static_cast<double>(c) - b.col;
            patch.at(r, c) += b.amplitude * std::exp(-(dr * dr + dc * dc) * inv);
        }
    }
}

// Adds a linear ramp rising from 0 to `height` toward one patch edge.
void add_edge_ramp(PhasePatch& patch, std::size_t side, std::size_t depth, double height) {
    for (std::size_t r = 0; r < kPatchSide; ++r) {
        for (std::size_t c = 0; c < kPatchSide; ++c) {
            std::size_t from_edge = 0;
            switch (side) {
                case 0: from_edge = c; break;
                case 1: from_edge = kPatchSide - 1 - c; break;
                case 2: from_edge = r; break;
                default: from_edge = kPatchSide - 1 - r; break;
            }
            if (from_edge < depth)
                patch.at(r, c) += height * static_cast<double>(depth - from_edge) / static_cast<double>(depth);
        }
    }
}

}  // namespace

std::string_view kind_name(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::inlier: return "inlier";
        case PhantomKind::duplet: return "duplet";
        case PhantomKind::noise: return "noise";
        case PhantomKind::defocus: return "defocus";
        case PhantomKind::border_cut: return "border_cut";
    }
    return "inlier";
}

std::optional<PhantomKind> parse_kind(std::string_view name) {
    for (auto k : {PhantomKind::inlier, PhantomKind::duplet, PhantomKind::noise, PhantomKind::defocus,
                   PhantomKind::border_cut})
        if (kind_name(k) == name) return k;
    return std::nullopt;
}

void PhantomSpec::validate() const {
    if (!(amplitude.lo > 0.0) || !(amplitude.lo <= amplitude.hi) || !std::isfinite(amplitude.hi))
        throw InvalidArgument("phantom amplitude range must satisfy 0 < lo <= hi");
    if (!(radius.lo > 2.0) || !(radius.lo <= radius.hi) || !(radius.hi < 20.0))
        throw InvalidArgument("phantom radius range must satisfy 2 < lo <= hi < 20");
}

PhasePatch generate(const PhantomSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    // Draws shared by every kind.
    const double amplitude = rng.uniform(spec.amplitude.lo, spec.amplitude.hi);
    const double radius = rng.uniform(spec.radius.lo, spec.radius.hi);
    const double jitter = kMaxJitter * std::sqrt(rng.uniform());
    const double jitter_angle = 2.0 * std::numbers::pi * rng.uniform();
    const double row = kCentre + jitter * std::sin(jitter_angle);
    const double col = kCentre + jitter * std::cos(jitter_angle);
    std::vector<double> cell_noise(kPatchPixels);
    for (auto& v : cell_noise) v = kCellNoise * amplitude * rng.normal();

    PhasePatch patch;
    patch.label = std::string(kind_name(spec.kind));
    const Bump cell{row, col, amplitude, kBumpWidth * radius};

    switch (spec.kind) {
        case PhantomKind::inlier:
            add_bump(patch, cell);
            break;
        case PhantomKind::duplet: {
            const double separation = rng.uniform(1.0, 1.8) * radius;
            const double angle = 2.0 * std::numbers::pi * rng.uniform();
            const double second_amplitude = amplitude * rng.uniform(0.85, 1.15);
            // The pair straddles the drawn centre so it stays inside the patch.
            const double dr = 0.5 * separation * std::sin(angle);
            const double dc = 0.5 * separation * std::cos(angle);
            add_bump(patch, {row - dr, col - dc, amplitude, cell.width});
            add_bump(patch, {row + dr, col + dc, second_amplitude, cell.width});
            break;
        }
        case PhantomKind::noise: {
            add_bump(patch, cell);
            const double sd = rng.uniform(0.25, 0.5) * amplitude;
            for (auto& v : patch.pixels) v += sd * rng.normal();
            break;
        }
        case PhantomKind::defocus: {
            // A Gaussian blur of a Gaussian bump is again Gaussian: widths add
            // in quadrature and the 2-D integral is conserved.
            const double blur = rng.uniform(1.0, 1.5) * radius;
            const double width = std::hypot(cell.width, blur);
            add_bump(patch, {row, col, amplitude * (cell.width * cell.width) / (width * width), width});
            break;
        }
        case PhantomKind::border_cut: {
            add_bump(patch, cell);
            const auto side = static_cast<std::size_t>(rng.index(4));
            const auto depth = static_cast<std::size_t>(10 + rng.index(6));
            add_edge_ramp(patch, side, depth, rng.uniform(2.0, 3.0) * amplitude);
            break;
        }
    }
    for (std::size_t i = 0; i < kPatchPixels; ++i) patch.pixels[i] += cell_noise[i];
    return patch;
}

std::vector<PhasePatch> generate_patches(std::size_t n_inliers, std::size_t n_outliers_per_kind,
                                         std::uint64_t master_seed, const PhantomSpec& base) {
    base.validate();
    std::vector<std::pair<PhantomKind, std::size_t>> plan;
    for (std::size_t i = 0; i < n_inliers; ++i) plan.emplace_back(PhantomKind::inlier, i);
    for (auto kind : kOutlierKinds)
        for (std::size_t i = 0; i < n_outliers_per_kind; ++i) plan.emplace_back(kind, i);

    std::vector<PhasePatch> patches(plan.size());
    const auto n = static_cast<std::ptrdiff_t>(plan.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        PhantomSpec spec = base;
        spec.kind = plan[i].first;
        spec.seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
        patches[i] = generate(spec);
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_%06zu", plan[i].second);
        patches[i].id = std::string(kind_name(spec.kind)) + suffix;
    }
    return patches;
}

std::vector<ManifestEntry> generate_dataset(std::size_t n_inliers, std::size_t n_outliers_per_kind,
                                            std::uint64_t master_seed, const std::filesystem::path& out_dir,
                                            const PhantomSpec& base) {
    const auto patches = generate_patches(n_inliers, n_outliers_per_kind, master_seed, base);
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "patches", ec);
    if (ec) throw IoError("cannot create '" + (out_dir / "patches").string() + "': " + ec.message());

    std::vector<ManifestEntry> manifest;
    manifest.reserve(patches.size());
    for (const auto& p : patches) {
        const std::string rel = "patches/" + p.id + ".txt";
        write_patch(out_dir / rel, p);
        manifest.push_back({rel, p.id, p.label});
    }
    write_manifest(out_dir / "manifest.csv", manifest);
    return manifest;
}

}  // namespace somscreen
