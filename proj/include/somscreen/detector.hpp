#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "somscreen/features.hpp"
#include "somscreen/som.hpp"

namespace somscreen {

enum class Verdict { inlier, outlier };

enum class GateMode {
    mean_plus_2std,  // mean + 2 * population std
    two_std,         // 2 * population std
};

/// Half-open quantization-error range [lo, hi).
struct ErrorBin {
    double lo;
    double hi;
    std::string name;

    bool operator==(const ErrorBin&) const = default;
};

inline constexpr std::string_view kOtherBin = "other";

/// Trained lattice plus everything needed to score raw features.
struct DetectionModel {
    Lattice lattice;
    NormStats norm;
    double threshold = 0.0;
    std::array<std::string, kFeatureCount> feature_names;

    void validate() const;
};

struct ScoreRecord {
    std::string id;
    std::optional<std::string> label;
    double qe = 0.0;
    std::size_t bmu_row = 0;
    std::size_t bmu_col = 0;
    Verdict verdict = Verdict::inlier;
    std::string bin;

    bool operator==(const ScoreRecord&) const = default;
};

struct HitMap {
    std::string group;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint64_t> counts;  // row-major

    std::uint64_t total() const;
};

struct BinCount {
    std::string name;
    std::size_t count;
};

std::array<std::string, kFeatureCount> default_feature_names();

/// Quantization-error ranges used for browsing outliers: 0-0.1, 0.5-0.6,
/// 1-2, 3-4, 10-20, 30-100.
std::vector<ErrorBin> default_bins();

/// "lo-hi" with at least one decimal on each side, e.g. "0.0-0.1".
std::string bin_name(double lo, double hi);

/// Throws InvalidArgument on lo >= hi or overlap.
void validate_bins(std::span<const ErrorBin> bins);

/// Name of the first bin containing qe, or "other".
std::string assign_bin(double qe, std::span<const ErrorBin> bins);

double fit_threshold(std::span<const double> training_qes, GateMode mode = GateMode::mean_plus_2std);

/// Outlier iff qe > threshold.
Verdict classify(double qe, double threshold);

/// One count per configured bin, in order, then "other".
std::vector<BinCount> bin_errors(std::span<const ScoreRecord> records, std::span<const ErrorBin> bins);

/// Scores samples in input order. With `normalize` the raw features are
/// first mapped through model.norm.
std::vector<ScoreRecord> score_dataset(const DetectionModel& model, std::span<const FeatureVector> features,
                                       std::span<const ErrorBin> bins, bool normalize);

/// One map per label, sorted by label; unlabeled records go to "unlabeled".
std::vector<HitMap> hit_map(const DetectionModel& model, std::span<const ScoreRecord> records);

/// Hit map over every record whose label is (or is not) in `labels`.
HitMap hit_map_for(const Lattice& lattice, std::span<const ScoreRecord> records, std::string group,
                   std::span<const std::string> labels, bool include);

/// Count-weighted median distance-map value under outlier hits minus the same
/// under inlier hits.
double separation_stat(const DistanceMap& dmap, const HitMap& inlier_hits, const HitMap& outlier_hits);

std::string_view verdict_name(Verdict v);

/// Hand-set per-feature acceptance window on raw features, the kind of
/// expert filter the detector is compared against. Infinite bounds disable
/// a feature.
struct FeatureBounds {
    FeatureValues lo;
    FeatureValues hi;
};

/// Outlier iff any raw feature falls outside [lo, hi].
std::vector<Verdict> range_filter(std::span<const FeatureVector> features, const FeatureBounds& bounds);

/// Fraction of positions where the two verdict lists agree.
double verdict_agreement(std::span<const Verdict> a, std::span<const Verdict> b);

// Scores CSV: `id,label,qe,bmu_row,bmu_col,verdict,bin`.
void write_scores(std::ostream& out, std::span<const ScoreRecord> records);
std::vector<ScoreRecord> read_scores(std::istream& in);

}  // namespace somscreen
