#include "somscreen/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "somscreen/errors.hpp"
#include "somscreen/float_io.hpp"

namespace somscreen {

namespace {

constexpr int kDecadeLo = -3;
constexpr int kDecadeHi = 3;
constexpr int kPerDecade = 4;

std::vector<double> log_edges() {
    std::vector<double> edges;
    for (int k = kDecadeLo * kPerDecade; k <= kDecadeHi * kPerDecade; ++k)
        edges.push_back(std::pow(10.0, static_cast<double>(k) / kPerDecade));
    return edges;
}

std::string fmt_or_empty(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::string file_safe(const std::string& group) {
    std::string out;
    for (char ch : group) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ? ch : '_';
    return out.empty() ? "_" : out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
}

template <typename T>
std::string grid_csv(std::size_t rows, std::size_t cols, const std::vector<T>& values) {
    std::ostringstream out;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out << ',';
            if constexpr (std::is_floating_point_v<T>)
                out << format_double(values[r * cols + c]);
            else
                out << values[r * cols + c];
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::vector<HistogramBin> qe_histogram(std::span<const ScoreRecord> records, std::span<const ErrorBin> ranges) {
    const auto edges = log_edges();
    std::vector<HistogramBin> bins;
    bins.push_back({"log", "underflow", 0.0, edges.front(), 0});
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) bins.push_back({"log", "", edges[i], edges[i + 1], 0});
    bins.push_back({"log", "overflow", edges.back(), std::numeric_limits<double>::infinity(), 0});
    for (auto& b : bins)
        if (b.name.empty()) b.name = format_double(b.lo) + "-" + format_double(b.hi);
    const std::size_t log_count = bins.size();

    for (const auto& r : records) {
        for (std::size_t i = 0; i < log_count; ++i) {
            if (r.qe >= bins[i].lo && r.qe < bins[i].hi) {
                ++bins[i].count;
                break;
            }
        }
    }
    const auto counts = bin_errors(records, ranges);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const bool other = i == ranges.size();
        bins.push_back({"range", counts[i].name, other ? nan : ranges[i].lo, other ? nan : ranges[i].hi,
                        counts[i].count});
    }
    return bins;
}

std::string render_histogram_svg(std::span<const HistogramBin> bins, double threshold) {
    constexpr double width = 720.0, height = 320.0, margin = 40.0;
    std::vector<const HistogramBin*> log_bins;
    for (const auto& b : bins)
        if (b.kind == "log") log_bins.push_back(&b);
    std::size_t peak = 1;
    for (const auto* b : log_bins) peak = std::max(peak, b->count);

    const double plot_w = width - 2 * margin;
    const double plot_h = height - 2 * margin;
    const double bar_w = log_bins.empty() ? 0.0 : plot_w / static_cast<double>(log_bins.size());
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">quantization error histogram (log bins)</text>\n";
    for (std::size_t i = 0; i < log_bins.size(); ++i) {
        const double h = plot_h * static_cast<double>(log_bins[i]->count) / static_cast<double>(peak);
        svg << "<rect x=\"" << format_double(margin + bar_w * static_cast<double>(i)) << "\" y=\""
            << format_double(margin + plot_h - h) << "\" width=\"" << format_double(bar_w * 0.9) << "\" height=\""
            << format_double(h) << "\" fill=\"steelblue\"><title>" << log_bins[i]->name << ": " << log_bins[i]->count
            << "</title></rect>\n";
    }
    // Bins are uniform in log10 between the first and last finite edges.
    if (log_bins.size() > 2 && threshold > 0.0) {
        const double first = std::log10(log_bins[1]->lo);
        const double last = std::log10(log_bins[log_bins.size() - 1]->lo);
        const double t = std::clamp((std::log10(threshold) - first) / (last - first), -0.5, 1.5);
        const double x = margin + bar_w * (1.0 + t * static_cast<double>(log_bins.size() - 2));
        svg << "<line x1=\"" << format_double(x) << "\" y1=\"" << margin << "\" x2=\"" << format_double(x)
            << "\" y2=\"" << margin + plot_h << "\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>\n"
            << "<text x=\"" << format_double(x + 4) << "\" y=\"" << margin + 12
            << "\" font-size=\"11\" fill=\"firebrick\">gate " << format_double(threshold) << "</text>\n";
    }
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin + plot_h << "\" x2=\"" << margin + plot_w << "\" y2=\""
        << margin + plot_h << "\" stroke=\"black\"/>\n</svg>\n";
    return svg.str();
}

ReportSummary write_report(const DetectionModel& model, std::span<const ScoreRecord> records,
                           std::span<const ErrorBin> ranges, std::span<const std::string> inlier_labels,
                           const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    const auto hist = qe_histogram(records, ranges);
    {
        std::ostringstream csv;
        csv << "kind,name,lo,hi,count\n";
        for (const auto& b : hist)
            csv << b.kind << ',' << b.name << ',' << fmt_or_empty(b.lo) << ',' << fmt_or_empty(b.hi) << ','
                << b.count << '\n';
        write_file(out_dir / "qe_histogram.csv", csv.str());
        write_file(out_dir / "qe_histogram.svg", render_histogram_svg(hist, model.threshold));
    }

    const auto dmap = distance_map(model.lattice);
    write_file(out_dir / "distance_map.csv", grid_csv(dmap.rows, dmap.cols, dmap.values));

    const auto everything = [&] {
        HitMap m{"all", model.lattice.rows(), model.lattice.cols(), std::vector<std::uint64_t>(model.lattice.size(), 0)};
        for (const auto& r : records) {
            if (r.bmu_row >= m.rows || r.bmu_col >= m.cols)
                throw InvalidArgument("record '" + r.id + "' has a BMU outside the lattice");
            ++m.counts[r.bmu_row * m.cols + r.bmu_col];
        }
        return m;
    }();
    write_file(out_dir / "hits_all.csv", grid_csv(everything.rows, everything.cols, everything.counts));
    for (const auto& map : hit_map(model, records))
        write_file(out_dir / ("hits_label_" + file_safe(map.group) + ".csv"), grid_csv(map.rows, map.cols, map.counts));

    ReportSummary summary;
    summary.records = records.size();
    HitMap by_verdict_in{"verdict_inlier", dmap.rows, dmap.cols, std::vector<std::uint64_t>(dmap.values.size(), 0)};
    HitMap by_verdict_out = by_verdict_in;
    by_verdict_out.group = "verdict_outlier";
    for (const auto& r : records) {
        const std::size_t cell = r.bmu_row * dmap.cols + r.bmu_col;
        if (r.verdict == Verdict::outlier) {
            ++summary.outliers;
            ++by_verdict_out.counts[cell];
        } else {
            ++by_verdict_in.counts[cell];
        }
    }
    const auto label_in = hit_map_for(model.lattice, records, "label_inlier", inlier_labels, true);
    const auto label_out = hit_map_for(model.lattice, records, "label_outlier", inlier_labels, false);
    if (label_in.total() && label_out.total()) {
        summary.separation_by_label = separation_stat(dmap, label_in, label_out);
        summary.has_label_separation = true;
    }
    if (by_verdict_in.total() && by_verdict_out.total()) {
        summary.separation_by_verdict = separation_stat(dmap, by_verdict_in, by_verdict_out);
        summary.has_verdict_separation = true;
    }

    std::ostringstream sep;
    sep << "basis,separation,inlier_hits,outlier_hits\n";
    sep << "label," << (summary.has_label_separation ? format_double(summary.separation_by_label) : "nan") << ','
        << label_in.total() << ',' << label_out.total() << '\n';
    sep << "verdict," << (summary.has_verdict_separation ? format_double(summary.separation_by_verdict) : "nan")
        << ',' << by_verdict_in.total() << ',' << by_verdict_out.total() << '\n';
    write_file(out_dir / "separation.csv", sep.str());

    std::ostringstream sum;
    sum << "records,outliers,outlier_percentage,threshold\n"
        << summary.records << ',' << summary.outliers << ','
        << format_double(summary.records ? 100.0 * double(summary.outliers) / double(summary.records) : 0.0) << ','
        << format_double(model.threshold) << '\n';
    write_file(out_dir / "summary.csv", sum.str());
    return summary;
}

}  // namespace somscreen
