#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "somscreen/features.hpp"
#include "somscreen/features_io.hpp"

namespace somscreen {

enum class PhantomKind { inlier, duplet, noise, defocus, border_cut };

inline constexpr std::array<PhantomKind, 4> kOutlierKinds = {
    PhantomKind::duplet, PhantomKind::noise, PhantomKind::defocus, PhantomKind::border_cut};

std::string_view kind_name(PhantomKind kind);
std::optional<PhantomKind> parse_kind(std::string_view name);

struct Range {
    double lo;
    double hi;
};

/// Synthetic cell image recipe. The cell is a Gaussian optical-density bump
/// with standard deviation 0.6 * radius.
struct PhantomSpec {
    PhantomKind kind = PhantomKind::inlier;
    std::uint64_t seed = 0;
    Range amplitude{1.0, 1.5};
    Range radius{14.0, 18.0};

    void validate() const;
};

/// Deterministic in the spec. The first draws (amplitude, radius, centre
/// jitter, cell noise) are shared by every kind, so a kind and the inlier
/// with the same seed describe the same base cell.
PhasePatch generate(const PhantomSpec& spec);

/// Inliers first, then `n_outliers_per_kind` of each outlier kind. Sample i
/// uses seed derive_seed(master_seed, i). Ids look like `duplet_000003`.
std::vector<PhasePatch> generate_patches(std::size_t n_inliers, std::size_t n_outliers_per_kind,
                                         std::uint64_t master_seed, const PhantomSpec& base = {});

/// Writes `patches/<id>.txt` and `manifest.csv` under out_dir.
std::vector<ManifestEntry> generate_dataset(std::size_t n_inliers, std::size_t n_outliers_per_kind,
                                            std::uint64_t master_seed, const std::filesystem::path& out_dir,
                                            const PhantomSpec& base = {});

}  // namespace somscreen
