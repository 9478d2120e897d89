#include "somscreen/features.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

#include "somscreen/errors.hpp"

namespace somscreen {

namespace {

constexpr std::size_t kOtsuBins = 256;

}  // namespace

void PhasePatch::validate() const {
    if (pixels.size() != kPatchPixels) throw InvalidArgument("patch '" + id + "' is not 50x50");
    for (double v : pixels)
        if (!std::isfinite(v)) throw InvalidArgument("patch '" + id + "' has a non-finite pixel");
}

SegmentationMask segment(const PhasePatch& patch, double threshold) {
    if (!std::isfinite(threshold)) throw InvalidArgument("segmentation threshold must be finite");
    patch.validate();

    constexpr auto side = static_cast<std::ptrdiff_t>(kPatchSide);
    // 0 = background, -1 = unvisited foreground, >0 = component label
    std::vector<int> label(kPatchPixels, 0);
    for (std::size_t i = 0; i < kPatchPixels; ++i)
        if (patch.pixels[i] >= threshold) label[i] = -1;

    int best_label = 0;
    std::size_t best_size = 0;
    int next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < kPatchPixels; ++seed) {
        if (label[seed] != -1) continue;
        ++next;
        std::size_t size = 0;
        label[seed] = next;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++size;
            const auto r = static_cast<std::ptrdiff_t>(p / kPatchSide);
            const auto c = static_cast<std::ptrdiff_t>(p % kPatchSide);
            for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
                for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
                    const auto rr = r + dr;
                    const auto cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= side || cc >= side) continue;
                    const auto q = static_cast<std::size_t>(rr * side + cc);
                    if (label[q] != -1) continue;
                    label[q] = next;
                    stack.push_back(q);
                }
            }
        }
        if (size > best_size) {
            best_size = size;
            best_label = next;
        }
    }

    SegmentationMask out;
    out.pixel_count = best_size;
    if (best_size > 0)
        for (std::size_t i = 0; i < kPatchPixels; ++i) out.mask[i] = label[i] == best_label ? 1 : 0;
    return out;
}

double otsu_threshold(const PhasePatch& patch) {
    patch.validate();
    const auto [lo_it, hi_it] = std::minmax_element(patch.pixels.begin(), patch.pixels.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) return lo;

    const double width = (hi - lo) / static_cast<double>(kOtsuBins);
    std::array<double, kOtsuBins> hist{};
    for (double v : patch.pixels) {
        const auto b = std::min(kOtsuBins - 1, static_cast<std::size_t>((v - lo) / width));
        hist[b] += 1.0;
    }

    double total_mass = 0.0;
    double total_moment = 0.0;
    for (std::size_t b = 0; b < kOtsuBins; ++b) {
        total_mass += hist[b];
        total_moment += hist[b] * (lo + (static_cast<double>(b) + 0.5) * width);
    }

    std::size_t best_split = 1;
    double best_var = -1.0;
    double mass0 = 0.0;
    double moment0 = 0.0;
    for (std::size_t k = 1; k < kOtsuBins; ++k) {
        mass0 += hist[k - 1];
        moment0 += hist[k - 1] * (lo + (static_cast<double>(k - 1) + 0.5) * width);
        const double mass1 = total_mass - mass0;
        if (mass0 == 0.0 || mass1 == 0.0) continue;
        const double mean0 = moment0 / mass0;
        const double mean1 = (total_moment - moment0) / mass1;
        const double var = mass0 * mass1 * (mean0 - mean1) * (mean0 - mean1) / (total_mass * total_mass);
        if (var > best_var) {
            best_var = var;
            best_split = k;
        }
    }
    return lo + static_cast<double>(best_split) * width;
}

FeatureVector extract_features(const PhasePatch& patch, const SegmentationMask& mask) {
    if (mask.empty()) throw EmptySegmentation("patch '" + patch.id + "' has an empty segmentation mask");
    patch.validate();

    const auto inside = [&](std::size_t r, std::size_t c) { return mask.at(r, c); };
    std::size_t area = 0;
    std::size_t perimeter = 0;
    double peak = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    double energy = 0.0;
    for (std::size_t r = 0; r < kPatchSide; ++r) {
        for (std::size_t c = 0; c < kPatchSide; ++c) {
            if (!inside(r, c)) continue;
            const double v = patch.at(r, c);
            ++area;
            peak = std::max(peak, v);
            sum += v;
            energy += v * v;
            const bool on_border = r == 0 || c == 0 || r + 1 == kPatchSide || c + 1 == kPatchSide;
            if (on_border || !inside(r - 1, c) || !inside(r + 1, c) || !inside(r, c - 1) || !inside(r, c + 1))
                ++perimeter;
        }
    }

    const double a = static_cast<double>(area);
    const double p = static_cast<double>(perimeter);
    const double mean = sum / a;
    double var = 0.0;
    for (std::size_t i = 0; i < kPatchPixels; ++i) {
        if (!mask.mask[i]) continue;
        const double dev = patch.pixels[i] - mean;
        var += dev * dev;
    }
    var /= a;

    FeatureVector out;
    out.id = patch.id;
    out.label = patch.label;
    out.values = {a, 4.0 * std::numbers::pi * a / (p * p), std::sqrt(4.0 * a / std::numbers::pi), peak, var, energy};
    return out;
}

NormalizerFit fit_normalizer(std::span<const FeatureVector> inliers) {
    if (inliers.empty()) throw InvalidArgument("cannot fit a normalizer on no samples");
    NormalizerFit fit;
    fit.stats.min = inliers.front().values;
    fit.stats.max = inliers.front().values;
    for (const auto& f : inliers) {
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            if (!std::isfinite(f.values[k])) throw InvalidArgument("non-finite feature in sample '" + f.id + "'");
            fit.stats.min[k] = std::min(fit.stats.min[k], f.values[k]);
            fit.stats.max[k] = std::max(fit.stats.max[k], f.values[k]);
        }
    }
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        if (fit.stats.min[k] == fit.stats.max[k]) {
            fit.stats.max[k] += 1.0;
            fit.widened[k] = true;
        }
    }
    return fit;
}

FeatureVector apply_normalizer(const NormStats& stats, const FeatureVector& v) {
    FeatureVector out = v;
    for (std::size_t k = 0; k < kFeatureCount; ++k)
        out.values[k] = (v.values[k] - stats.min[k]) / (stats.max[k] - stats.min[k]);
    return out;
}

SampleMatrix to_samples(std::span<const FeatureVector> features) {
    SampleMatrix m(kFeatureCount);
    for (const auto& f : features) m.push_back(f.values);
    return m;
}

}  // namespace somscreen
