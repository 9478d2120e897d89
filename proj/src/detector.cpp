#include "somscreen/detector.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "somscreen/errors.hpp"
#include "somscreen/features_io.hpp"
#include "somscreen/float_io.hpp"
#include "somscreen/kernels.hpp"

namespace somscreen {

namespace {

constexpr std::string_view kScoresHeader = "id,label,qe,bmu_row,bmu_col,verdict,bin";
constexpr std::string_view kUnlabeled = "unlabeled";

std::string with_decimal(double v) {
    std::string s = format_double(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

// Median of a multiset given as (value, multiplicity) pairs.
double weighted_median(std::vector<std::pair<double, std::uint64_t>> items) {
    std::sort(items.begin(), items.end());
    std::uint64_t total = 0;
    for (const auto& [v, n] : items) total += n;
    auto nth = [&](std::uint64_t rank) {
        std::uint64_t seen = 0;
        for (const auto& [v, n] : items) {
            seen += n;
            if (rank < seen) return v;
        }
        return items.back().first;
    };
    if (total % 2 == 1) return nth(total / 2);
    return 0.5 * (nth(total / 2 - 1) + nth(total / 2));
}

std::vector<std::pair<double, std::uint64_t>> weighted_values(const DistanceMap& dmap, const HitMap& hits) {
    std::vector<std::pair<double, std::uint64_t>> items;
    for (std::size_t i = 0; i < hits.counts.size(); ++i)
        if (hits.counts[i] > 0) items.emplace_back(dmap.values[i], hits.counts[i]);
    return items;
}

}  // namespace

void DetectionModel::validate() const {
    if (!(threshold > 0.0) || !std::isfinite(threshold)) throw InvalidArgument("model threshold must be positive");
    if (lattice.dim() != kFeatureCount)
        throw InvalidArgument("model lattice must have dim " + std::to_string(kFeatureCount));
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        if (!std::isfinite(norm.min[k]) || !std::isfinite(norm.max[k]) || norm.min[k] > norm.max[k])
            throw InvalidArgument("invalid normalization range for feature " + std::to_string(k));
    }
}

std::uint64_t HitMap::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::array<std::string, kFeatureCount> default_feature_names() {
    std::array<std::string, kFeatureCount> names;
    std::copy(kFeatureNames.begin(), kFeatureNames.end(), names.begin());
    return names;
}

std::string bin_name(double lo, double hi) { return with_decimal(lo) + "-" + with_decimal(hi); }

std::vector<ErrorBin> default_bins() {
    const std::array<std::pair<double, double>, 6> edges = {
        {{0.0, 0.1}, {0.5, 0.6}, {1.0, 2.0}, {3.0, 4.0}, {10.0, 20.0}, {30.0, 100.0}}};
    std::vector<ErrorBin> bins;
    for (auto [lo, hi] : edges) bins.push_back({lo, hi, bin_name(lo, hi)});
    return bins;
}

void validate_bins(std::span<const ErrorBin> bins) {
    std::vector<ErrorBin> sorted(bins.begin(), bins.end());
    for (const auto& b : sorted) {
        if (!std::isfinite(b.lo) || !(b.lo < b.hi)) throw InvalidArgument("bin '" + b.name + "' needs lo < hi");
        if (b.name.empty() || b.name == kOtherBin) throw InvalidArgument("bin name '" + b.name + "' is reserved");
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].lo < sorted[i - 1].hi)
            throw InvalidArgument("bins '" + sorted[i - 1].name + "' and '" + sorted[i].name + "' overlap");
}

std::string assign_bin(double qe, std::span<const ErrorBin> bins) {
    for (const auto& b : bins)
        if (qe >= b.lo && qe < b.hi) return b.name;
    return std::string(kOtherBin);
}

double fit_threshold(std::span<const double> training_qes, GateMode mode) {
    if (training_qes.size() < 2) throw InvalidArgument("threshold fit needs at least 2 quantization errors");
    const auto n = static_cast<double>(training_qes.size());
    double mean = 0.0;
    for (double q : training_qes) mean += q;
    mean /= n;
    double var = 0.0;
    for (double q : training_qes) var += (q - mean) * (q - mean);
    const double std_dev = std::sqrt(var / n);
    return mode == GateMode::mean_plus_2std ? mean + 2.0 * std_dev : 2.0 * std_dev;
}

Verdict classify(double qe, double threshold) { return qe > threshold ? Verdict::outlier : Verdict::inlier; }

std::string_view verdict_name(Verdict v) { return v == Verdict::outlier ? "outlier" : "inlier"; }

std::vector<BinCount> bin_errors(std::span<const ScoreRecord> records, std::span<const ErrorBin> bins) {
    std::vector<BinCount> out;
    for (const auto& b : bins) out.push_back({b.name, 0});
    out.push_back({std::string(kOtherBin), 0});
    for (const auto& r : records) {
        std::size_t slot = bins.size();
        for (std::size_t i = 0; i < bins.size(); ++i) {
            if (r.qe >= bins[i].lo && r.qe < bins[i].hi) {
                slot = i;
                break;
            }
        }
        ++out[slot].count;
    }
    return out;
}

std::vector<ScoreRecord> score_dataset(const DetectionModel& model, std::span<const FeatureVector> features,
                                       std::span<const ErrorBin> bins, bool normalize) {
    model.validate();
    SampleMatrix samples(kFeatureCount);
    for (const auto& f : features) samples.push_back(normalize ? apply_normalizer(model.norm, f).values : f.values);
    const auto bmus = kernels::parallel::bmu_batch(model.lattice, samples);

    std::vector<ScoreRecord> records;
    records.reserve(features.size());
    const std::size_t cols = model.lattice.cols();
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double qe = bmus[i].distance;
        records.push_back({features[i].id, features[i].label, qe, bmus[i].neuron_index / cols,
                           bmus[i].neuron_index % cols, classify(qe, model.threshold), assign_bin(qe, bins)});
    }
    return records;
}

HitMap hit_map_for(const Lattice& lattice, std::span<const ScoreRecord> records, std::string group,
                   std::span<const std::string> labels, bool include) {
    HitMap map{std::move(group), lattice.rows(), lattice.cols(), std::vector<std::uint64_t>(lattice.size(), 0)};
    for (const auto& r : records) {
        const bool listed = r.label && std::find(labels.begin(), labels.end(), *r.label) != labels.end();
        if (listed != include) continue;
        if (!include && !r.label) continue;
        if (r.bmu_row >= lattice.rows() || r.bmu_col >= lattice.cols())
            throw InvalidArgument("record '" + r.id + "' has a BMU outside the lattice");
        ++map.counts[r.bmu_row * lattice.cols() + r.bmu_col];
    }
    return map;
}

std::vector<HitMap> hit_map(const DetectionModel& model, std::span<const ScoreRecord> records) {
    const auto& lattice = model.lattice;
    std::map<std::string, HitMap> groups;
    for (const auto& r : records) {
        if (r.bmu_row >= lattice.rows() || r.bmu_col >= lattice.cols())
            throw InvalidArgument("record '" + r.id + "' has a BMU outside the lattice");
        const std::string name = r.label.value_or(std::string(kUnlabeled));
        auto [it, fresh] = groups.try_emplace(name);
        if (fresh) it->second = {name, lattice.rows(), lattice.cols(), std::vector<std::uint64_t>(lattice.size(), 0)};
        ++it->second.counts[r.bmu_row * lattice.cols() + r.bmu_col];
    }
    std::vector<HitMap> out;
    for (auto& [name, map] : groups) out.push_back(std::move(map));
    return out;
}

double separation_stat(const DistanceMap& dmap, const HitMap& inlier_hits, const HitMap& outlier_hits) {
    for (const HitMap* h : {&inlier_hits, &outlier_hits}) {
        if (h->rows != dmap.rows || h->cols != dmap.cols || h->counts.size() != dmap.values.size())
            throw InvalidArgument("hit map '" + h->group + "' does not match the distance map shape");
        if (h->total() == 0) throw InvalidArgument("hit map '" + h->group + "' is empty");
    }
    return weighted_median(weighted_values(dmap, outlier_hits)) - weighted_median(weighted_values(dmap, inlier_hits));
}

std::vector<Verdict> range_filter(std::span<const FeatureVector> features, const FeatureBounds& bounds) {
    std::vector<Verdict> out;
    out.reserve(features.size());
    for (const auto& f : features) {
        bool inside = true;
        for (std::size_t k = 0; k < kFeatureCount; ++k)
            inside = inside && f.values[k] >= bounds.lo[k] && f.values[k] <= bounds.hi[k];
        out.push_back(inside ? Verdict::inlier : Verdict::outlier);
    }
    return out;
}

double verdict_agreement(std::span<const Verdict> a, std::span<const Verdict> b) {
    if (a.size() != b.size()) throw InvalidArgument("verdict lists differ in length");
    if (a.empty()) throw InvalidArgument("no verdicts to compare");
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
    return static_cast<double>(same) / static_cast<double>(a.size());
}

void write_scores(std::ostream& out, std::span<const ScoreRecord> records) {
    out << kScoresHeader << '\n';
    for (const auto& r : records) {
        check_csv_field(r.id);
        check_csv_field(r.label.value_or(""));
        out << r.id << ',' << r.label.value_or("") << ',' << format_double(r.qe) << ',' << r.bmu_row << ','
            << r.bmu_col << ',' << verdict_name(r.verdict) << ',' << r.bin << '\n';
    }
}

std::vector<ScoreRecord> read_scores(std::istream& in) {
    std::string line;
    auto next_line = [&] {
        if (!std::getline(in, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    if (!next_line() || line != kScoresHeader)
        throw ParseError(1, "scores header must be '" + std::string(kScoresHeader) + "'");
    std::vector<ScoreRecord> records;
    std::size_t line_no = 1;
    while (next_line()) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7) throw ParseError(line_no, "expected 7 fields, got " + std::to_string(f.size()));
        ScoreRecord r;
        r.id = f[0];
        if (!f[1].empty()) r.label = f[1];
        r.qe = parse_double(f[2], line_no);
        const auto row = parse_int(f[3], line_no);
        const auto col = parse_int(f[4], line_no);
        if (row < 0 || col < 0) throw ParseError(line_no, "negative BMU coordinate");
        r.bmu_row = static_cast<std::size_t>(row);
        r.bmu_col = static_cast<std::size_t>(col);
        if (f[5] == "outlier")
            r.verdict = Verdict::outlier;
        else if (f[5] == "inlier")
            r.verdict = Verdict::inlier;
        else
            throw ParseError(line_no, "unknown verdict '" + f[5] + "'");
        r.bin = f[6];
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace somscreen
