#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "somscreen/samples.hpp"

namespace somscreen {

inline constexpr std::size_t kPatchSide = 50;
inline constexpr std::size_t kPatchPixels = kPatchSide * kPatchSide;
inline constexpr std::size_t kFeatureCount = 6;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "area", "circularity", "equivalent_diameter",
    "optical_height_max", "optical_height_variance", "energy"};

/// 50 x 50 optical phase values (radians), row-major.
struct PhasePatch {
    std::vector<double> pixels = std::vector<double>(kPatchPixels, 0.0);
    std::string id;
    std::optional<std::string> label;

    double at(std::size_t r, std::size_t c) const { return pixels[r * kPatchSide + c]; }
    double& at(std::size_t r, std::size_t c) { return pixels[r * kPatchSide + c]; }

    /// Throws InvalidArgument unless exactly 50 x 50 finite values.
    void validate() const;
};

struct SegmentationMask {
    std::vector<std::uint8_t> mask = std::vector<std::uint8_t>(kPatchPixels, 0);
    std::size_t pixel_count = 0;

    bool at(std::size_t r, std::size_t c) const { return mask[r * kPatchSide + c] != 0; }
    bool empty() const noexcept { return pixel_count == 0; }
};

using FeatureValues = std::array<double, kFeatureCount>;

/// Ordered as kFeatureNames.
struct FeatureVector {
    std::string id;
    std::optional<std::string> label;
    FeatureValues values{};

    bool operator==(const FeatureVector&) const = default;
};

struct NormStats {
    FeatureValues min{};
    FeatureValues max{};

    bool operator==(const NormStats&) const = default;
};

struct NormalizerFit {
    NormStats stats;
    /// Features whose range was zero and got max raised by 1.
    std::array<bool, kFeatureCount> widened{};
};

/// Pixels >= threshold, reduced to the largest 8-connected component. Equal
/// sized components resolve to the one reached first in row-major order.
SegmentationMask segment(const PhasePatch& patch, double threshold);

/// Otsu's threshold over a 256-bin histogram spanning [min, max] of the patch.
/// Returns the lower edge of the first foreground bin.
double otsu_threshold(const PhasePatch& patch);

/// Six morphological features of the masked region. Throws EmptySegmentation
/// on an empty mask.
FeatureVector extract_features(const PhasePatch& patch, const SegmentationMask& mask);

NormalizerFit fit_normalizer(std::span<const FeatureVector> inliers);

/// Affine map onto the inlier range, not clipped.
FeatureVector apply_normalizer(const NormStats& stats, const FeatureVector& v);

SampleMatrix to_samples(std::span<const FeatureVector> features);

}  // namespace somscreen
