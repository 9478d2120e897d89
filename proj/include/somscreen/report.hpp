#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "somscreen/detector.hpp"

namespace somscreen {

struct HistogramBin {
    std::string kind;  // "log" or "range"
    std::string name;
    double lo;  // NaN for the "other" range bin
    double hi;
    std::size_t count;
};

/// Log-spaced bins (4 per decade from 1e-3 to 1e3, plus underflow and
/// overflow) followed by the configured error ranges and "other". Each kind
/// sums to the record count.
std::vector<HistogramBin> qe_histogram(std::span<const ScoreRecord> records, std::span<const ErrorBin> ranges);

std::string render_histogram_svg(std::span<const HistogramBin> bins, double threshold);

struct ReportSummary {
    std::size_t records = 0;
    std::size_t outliers = 0;
    /// Records labelled with `inlier_labels` vs everything else labelled.
    double separation_by_label = 0.0;
    bool has_label_separation = false;
    double separation_by_verdict = 0.0;
    bool has_verdict_separation = false;
};

/// Writes qe_histogram.csv, qe_histogram.svg, distance_map.csv,
/// hits_<group>.csv and separation.csv into out_dir.
ReportSummary write_report(const DetectionModel& model, std::span<const ScoreRecord> records,
                           std::span<const ErrorBin> ranges, std::span<const std::string> inlier_labels,
                           const std::filesystem::path& out_dir);

}  // namespace somscreen
