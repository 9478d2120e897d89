#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "somscreen/detector.hpp"
#include "somscreen/features.hpp"
#include "somscreen/phantoms.hpp"
#include "somscreen/report.hpp"
#include "somscreen/som.hpp"

namespace somscreen {

enum class ThresholdMode { otsu, fixed };

struct PipelineConfig {
    TrainConfig train;
    ThresholdMode threshold_mode = ThresholdMode::otsu;
    double fixed_threshold = 0.0;
    GateMode gate = GateMode::mean_plus_2std;
    std::vector<ErrorBin> bins = default_bins();
    std::size_t folds = 5;
    PhantomSpec phantom;
    std::vector<std::string> inlier_labels{"inlier"};

    void validate() const;
};

/// Flat `key = value` lines, `#` comments. Unknown keys throw ParseError.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

struct ExtractOutcome {
    std::vector<FeatureVector> features;
    std::vector<std::string> skipped;  // ids with empty segmentation
};

/// Segments and measures every patch; order preserved, empty masks skipped.
ExtractOutcome extract_batch(std::span<const PhasePatch> patches, const PipelineConfig& config);

struct TrainOutcome {
    DetectionModel model;
    double eaq = 0.0;
    double eigen_ratio = 1.0;
    bool eigen_fallback = false;
    bool init_fallback = false;
    std::array<bool, kFeatureCount> widened{};
};

/// Normalize, size, initialize, train and gate on raw inlier features.
TrainOutcome train_detector(std::span<const FeatureVector> raw_inliers, const PipelineConfig& config);

struct GridPoint {
    double sigma0;
    double alpha0;
    Topology topology;

    bool operator==(const GridPoint&) const = default;
};

std::vector<GridPoint> default_grid();
/// One point per line: `sigma0=<x> alpha0=<y> topology=<hex|rect>`.
std::vector<GridPoint> parse_grid(std::istream& in);

/// Fold index per sample. Stratified by label when any label is present.
std::vector<std::size_t> assign_folds(std::span<const FeatureVector> features, std::size_t folds,
                                      std::uint64_t seed);

struct CrossvalRow {
    GridPoint point;
    double mean_eaq;
    double std_eaq;
    bool selected;
};

std::vector<CrossvalRow> crossval(std::span<const FeatureVector> raw, std::span<const GridPoint> grid,
                                  const PipelineConfig& config);

void write_crossval_report(std::ostream& out, std::span<const CrossvalRow> rows);

std::string_view topology_name(Topology t);
Topology parse_topology(std::string_view name);

// File-level commands behind the CLI.
std::vector<ManifestEntry> cmd_synth(const std::filesystem::path& out_dir, std::size_t n_inliers,
                                     std::size_t n_outliers_per_kind, const PipelineConfig& config);
ExtractOutcome cmd_extract(const std::filesystem::path& manifest, const std::filesystem::path& features_out,
                           const PipelineConfig& config);
TrainOutcome cmd_train(const std::filesystem::path& features, const std::filesystem::path& model_out,
                       const PipelineConfig& config);
std::vector<CrossvalRow> cmd_crossval(const std::filesystem::path& features, const std::filesystem::path* grid_file,
                                      const std::filesystem::path& report_out, const PipelineConfig& config);

struct ScoreSummary {
    std::size_t records = 0;
    std::size_t outliers = 0;
    double outlier_percentage() const { return records ? 100.0 * double(outliers) / double(records) : 0.0; }
};

ScoreSummary cmd_score(const std::filesystem::path& model, const std::filesystem::path& features,
                       const std::filesystem::path& scores_out, const PipelineConfig& config);
ReportSummary cmd_report(const std::filesystem::path& model, const std::filesystem::path& scores,
                         const std::filesystem::path& out_dir, const PipelineConfig& config);

}  // namespace somscreen
