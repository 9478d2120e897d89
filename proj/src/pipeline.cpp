#include "somscreen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "somscreen/errors.hpp"
#include "somscreen/features_io.hpp"
#include "somscreen/float_io.hpp"
#include "somscreen/kernels.hpp"
#include "somscreen/model_io.hpp"
#include "somscreen/rng.hpp"

namespace somscreen {

namespace {

bool parse_bool(std::string_view v, std::size_t line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError(line, "expected true or false, got '" + std::string(v) + "'");
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& field : split_csv_line(std::string(text))) {
        const auto t = trim(field);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

// "0:0.1, 0.5:0.6" -> bins named from their edges
std::vector<ErrorBin> parse_bins(std::string_view text, std::size_t line) {
    std::vector<ErrorBin> bins;
    for (const auto& item : split_list(text)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ParseError(line, "bin '" + item + "' must look like lo:hi");
        const double lo = parse_double(std::string_view(item).substr(0, colon), line);
        const double hi = parse_double(std::string_view(item).substr(colon + 1), line);
        bins.push_back({lo, hi, bin_name(lo, hi)});
    }
    return bins;
}

std::size_t parse_count(std::string_view text, std::size_t line) {
    const auto v = parse_int(text, line);
    if (v < 0) throw ParseError(line, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

// Runs body(i) for i in [0, n) across OpenMP threads; rethrows the first
// exception by index once every iteration has finished.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view topology_name(Topology t) { return t == Topology::hexagonal ? "hex" : "rect"; }

Topology parse_topology(std::string_view name) {
    if (name == "hex" || name == "hexagonal") return Topology::hexagonal;
    if (name == "rect" || name == "rectangular") return Topology::rectangular;
    throw InvalidArgument("unknown topology '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
    train.validate();
    if (threshold_mode == ThresholdMode::fixed && !std::isfinite(fixed_threshold))
        throw InvalidArgument("fixed segmentation threshold must be finite");
    validate_bins(bins);
    if (folds < 2) throw InvalidArgument("crossval needs at least 2 folds");
    phantom.validate();
}

PipelineConfig parse_config(std::istream& in, PipelineConfig cfg) {
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto text = std::string_view(raw);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ParseError(line, "expected 'key = value'");
        const std::string key(trim(text.substr(0, eq)));
        const std::string_view value = trim(text.substr(eq + 1));
        try {
            if (key == "train.iterations") {
                if (value == "auto")
                    cfg.train.iterations.reset();
                else
                    cfg.train.iterations = parse_count(value, line);
            } else if (key == "train.sigma0") {
                cfg.train.sigma0 = parse_double(value, line);
            } else if (key == "train.alpha0") {
                cfg.train.alpha0 = parse_double(value, line);
            } else if (key == "train.topology") {
                cfg.train.topology = parse_topology(value);
            } else if (key == "train.init") {
                if (value == "random_uniform")
                    cfg.train.init = InitMethod::random_uniform;
                else if (value == "pca_plane")
                    cfg.train.init = InitMethod::pca_plane;
                else
                    throw ParseError(line, "unknown init '" + std::string(value) + "'");
            } else if (key == "train.seed") {
                cfg.train.seed = parse_count(value, line);
            } else if (key == "train.decay") {
                if (value != "asymptotic") throw ParseError(line, "unknown decay '" + std::string(value) + "'");
                cfg.train.decay = Decay::asymptotic;
            } else if (key == "train.decay_sigma") {
                cfg.train.decay_sigma = parse_bool(value, line);
            } else if (key == "segment.mode") {
                if (value == "otsu")
                    cfg.threshold_mode = ThresholdMode::otsu;
                else if (value == "fixed")
                    cfg.threshold_mode = ThresholdMode::fixed;
                else
                    throw ParseError(line, "unknown segment mode '" + std::string(value) + "'");
            } else if (key == "segment.threshold") {
                cfg.fixed_threshold = parse_double(value, line);
            } else if (key == "gate.mode") {
                if (value == "mean_plus_2std")
                    cfg.gate = GateMode::mean_plus_2std;
                else if (value == "two_std")
                    cfg.gate = GateMode::two_std;
                else
                    throw ParseError(line, "unknown gate mode '" + std::string(value) + "'");
            } else if (key == "detector.bins") {
                cfg.bins = parse_bins(value, line);
            } else if (key == "crossval.folds") {
                cfg.folds = parse_count(value, line);
            } else if (key == "synth.amplitude_lo") {
                cfg.phantom.amplitude.lo = parse_double(value, line);
            } else if (key == "synth.amplitude_hi") {
                cfg.phantom.amplitude.hi = parse_double(value, line);
            } else if (key == "synth.radius_lo") {
                cfg.phantom.radius.lo = parse_double(value, line);
            } else if (key == "synth.radius_hi") {
                cfg.phantom.radius.hi = parse_double(value, line);
            } else if (key == "report.inlier_labels") {
                cfg.inlier_labels = split_list(value);
            } else {
                throw ParseError(line, "unknown config key '" + key + "'");
            }
        } catch (const InvalidArgument& e) {
            throw ParseError(line, e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(0, std::string("invalid config: ") + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    return parse_config(in, std::move(base));
}

ExtractOutcome extract_batch(std::span<const PhasePatch> patches, const PipelineConfig& config) {
    std::vector<std::optional<FeatureVector>> slots(patches.size());
    parallel_for(patches.size(), [&](std::size_t i) {
        const auto& p = patches[i];
        const double t = config.threshold_mode == ThresholdMode::otsu ? otsu_threshold(p) : config.fixed_threshold;
        const auto mask = segment(p, t);
        if (!mask.empty()) slots[i] = extract_features(p, mask);
    });
    ExtractOutcome out;
    for (std::size_t i = 0; i < patches.size(); ++i) {
        if (slots[i])
            out.features.push_back(std::move(*slots[i]));
        else
            out.skipped.push_back(patches[i].id);
    }
    return out;
}

TrainOutcome train_detector(std::span<const FeatureVector> raw_inliers, const PipelineConfig& config) {
    config.train.validate();
    if (raw_inliers.size() < 2) throw InvalidArgument("training needs at least 2 samples");

    TrainOutcome out{DetectionModel{Lattice(1, 1, kFeatureCount, config.train.topology), {}, 1.0,
                                    default_feature_names()}};
    const auto fit = fit_normalizer(raw_inliers);
    out.widened = fit.widened;
    SampleMatrix samples(kFeatureCount);
    for (const auto& f : raw_inliers) samples.push_back(apply_normalizer(fit.stats, f).values);

    try {
        out.eigen_ratio = compute_eigen_ratio(samples);
    } catch (const DegenerateData&) {
        out.eigen_ratio = 1.0;
        out.eigen_fallback = true;
    }
    const auto shape = size_lattice(samples.size(), out.eigen_ratio);
    auto init = init_lattice(shape, samples, config.train);
    out.init_fallback = init.fell_back;
    Lattice trained = train(std::move(init.lattice), samples, config.train);

    const auto bmus = kernels::parallel::bmu_batch(trained, samples);
    std::vector<double> qes;
    qes.reserve(bmus.size());
    for (const auto& b : bmus) qes.push_back(b.distance);
    out.eaq = mean_of(qes);
    double threshold = fit_threshold(qes, config.gate);
    // A perfect fit gives a zero gate; keep the model's threshold positive.
    if (!(threshold > 0.0)) threshold = std::numeric_limits<double>::min();

    out.model = DetectionModel{std::move(trained), fit.stats, threshold, default_feature_names()};
    return out;
}

std::vector<GridPoint> default_grid() {
    std::vector<GridPoint> grid;
    for (double sigma : {0.5, 1.0, 2.0})
        for (double alpha : {0.25, 0.5, 1.0})
            for (auto topo : {Topology::hexagonal, Topology::rectangular}) grid.push_back({sigma, alpha, topo});
    return grid;
}

std::vector<GridPoint> parse_grid(std::istream& in) {
    std::vector<GridPoint> grid;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto text = std::string_view(raw);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        if (trim(text).empty()) continue;
        std::optional<double> sigma, alpha;
        std::optional<Topology> topo;
        std::istringstream tokens{std::string(text)};
        std::string tok;
        try {
            while (tokens >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) throw ParseError(line, "grid token '" + tok + "' must be key=value");
                const auto key = tok.substr(0, eq);
                const auto value = std::string_view(tok).substr(eq + 1);
                if (key == "sigma0")
                    sigma = parse_double(value, line);
                else if (key == "alpha0")
                    alpha = parse_double(value, line);
                else if (key == "topology")
                    topo = parse_topology(value);
                else
                    throw ParseError(line, "unknown grid key '" + key + "'");
            }
        } catch (const InvalidArgument& e) {
            throw ParseError(line, e.what());
        }
        if (!sigma || !alpha || !topo)
            throw ParseError(line, "grid line '" + raw + "' needs sigma0, alpha0 and topology");
        grid.push_back({*sigma, *alpha, *topo});
    }
    if (grid.empty()) throw ParseError(0, "grid file has no points");
    return grid;
}

std::vector<std::size_t> assign_folds(std::span<const FeatureVector> features, std::size_t folds,
                                      std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("crossval needs at least 2 folds");
    const bool stratify = std::any_of(features.begin(), features.end(), [](const auto& f) { return f.label; });
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < features.size(); ++i)
        groups[stratify ? features[i].label.value_or("") : std::string()].push_back(i);

    std::vector<std::size_t> fold(features.size(), 0);
    std::size_t offset = 0;
    std::uint64_t stream = 0;
    for (auto& [label, members] : groups) {
        Rng rng(derive_seed(seed, stream++));
        for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.index(i)]);
        for (std::size_t pos = 0; pos < members.size(); ++pos) fold[members[pos]] = (offset + pos) % folds;
        offset += members.size();
    }
    return fold;
}

std::vector<CrossvalRow> crossval(std::span<const FeatureVector> raw, std::span<const GridPoint> grid,
                                  const PipelineConfig& config) {
    if (grid.empty()) throw InvalidArgument("crossval grid is empty");
    const std::size_t k = config.folds;
    if (k < 2) throw InvalidArgument("crossval needs at least 2 folds");
    if (raw.size() < 2 * k) throw InvalidArgument("crossval needs at least 2 samples per fold");
    const auto fold = assign_folds(raw, k, config.train.seed);

    std::vector<double> eaq(grid.size() * k, 0.0);
    parallel_for(eaq.size(), [&](std::size_t task) {
        const std::size_t g = task / k;
        const std::size_t f = task % k;
        std::vector<FeatureVector> train_set;
        std::vector<FeatureVector> held_out;
        for (std::size_t i = 0; i < raw.size(); ++i) (fold[i] == f ? held_out : train_set).push_back(raw[i]);

        PipelineConfig cfg = config;
        cfg.train.sigma0 = grid[g].sigma0;
        cfg.train.alpha0 = grid[g].alpha0;
        cfg.train.topology = grid[g].topology;
        const auto trained = train_detector(train_set, cfg);
        SampleMatrix validation(kFeatureCount);
        for (const auto& v : held_out) validation.push_back(apply_normalizer(trained.model.norm, v).values);
        eaq[task] = average_quantization_error(trained.model.lattice, validation);
    });

    std::vector<CrossvalRow> rows;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::span<const double> per_fold(eaq.data() + g * k, k);
        const double mean = mean_of(per_fold);
        double var = 0.0;
        for (double v : per_fold) var += (v - mean) * (v - mean);
        rows.push_back({grid[g], mean, std::sqrt(var / static_cast<double>(k)), false});
    }
    auto best = std::min_element(rows.begin(), rows.end(),
                                 [](const auto& a, const auto& b) { return a.mean_eaq < b.mean_eaq; });
    best->selected = true;
    return rows;
}

void write_crossval_report(std::ostream& out, std::span<const CrossvalRow> rows) {
    out << "index,sigma0,alpha0,topology,mean_eaq,std_eaq,selected\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << i << ',' << format_double(r.point.sigma0) << ',' << format_double(r.point.alpha0) << ','
            << topology_name(r.point.topology) << ',' << format_double(r.mean_eaq) << ',' << format_double(r.std_eaq)
            << ',' << (r.selected ? 1 : 0) << '\n';
    }
}

std::vector<ManifestEntry> cmd_synth(const std::filesystem::path& out_dir, std::size_t n_inliers,
                                     std::size_t n_outliers_per_kind, const PipelineConfig& config) {
    return generate_dataset(n_inliers, n_outliers_per_kind, config.train.seed, out_dir, config.phantom);
}

ExtractOutcome cmd_extract(const std::filesystem::path& manifest, const std::filesystem::path& features_out,
                           const PipelineConfig& config) {
    const auto entries = read_manifest(manifest);
    const auto base = manifest.parent_path();
    std::vector<PhasePatch> patches(entries.size());
    parallel_for(entries.size(), [&](std::size_t i) {
        const std::filesystem::path p(entries[i].path);
        patches[i] = read_patch(p.is_absolute() ? p : base / p);
        patches[i].id = entries[i].id;
        patches[i].label = entries[i].label;
    });
    auto outcome = extract_batch(patches, config);
    write_features(features_out, outcome.features);
    return outcome;
}

TrainOutcome cmd_train(const std::filesystem::path& features, const std::filesystem::path& model_out,
                       const PipelineConfig& config) {
    const auto data = read_features(features);
    auto outcome = train_detector(data, config);
    save_model(model_out, outcome.model);
    return outcome;
}

std::vector<CrossvalRow> cmd_crossval(const std::filesystem::path& features, const std::filesystem::path* grid_file,
                                      const std::filesystem::path& report_out, const PipelineConfig& config) {
    const auto data = read_features(features);
    std::vector<GridPoint> grid = default_grid();
    if (grid_file) {
        std::ifstream in(*grid_file, std::ios::binary);
        if (!in) throw IoError("cannot open grid '" + grid_file->string() + "'");
        grid = parse_grid(in);
    }
    auto rows = crossval(data, grid, config);
    std::ofstream out(report_out, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + report_out.string() + "' for writing");
    write_crossval_report(out, rows);
    if (!out.flush()) throw IoError("failed writing '" + report_out.string() + "'");
    return rows;
}

ScoreSummary cmd_score(const std::filesystem::path& model, const std::filesystem::path& features,
                       const std::filesystem::path& scores_out, const PipelineConfig& config) {
    const auto detector = load_model(model);
    const auto data = read_features(features);
    const auto records = score_dataset(detector, data, config.bins, true);
    std::ofstream out(scores_out, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + scores_out.string() + "' for writing");
    write_scores(out, records);
    if (!out.flush()) throw IoError("failed writing '" + scores_out.string() + "'");
    ScoreSummary summary{records.size(), 0};
    for (const auto& r : records) summary.outliers += r.verdict == Verdict::outlier;
    return summary;
}

ReportSummary cmd_report(const std::filesystem::path& model, const std::filesystem::path& scores,
                         const std::filesystem::path& out_dir, const PipelineConfig& config) {
    const auto detector = load_model(model);
    std::ifstream in(scores, std::ios::binary);
    if (!in) throw IoError("cannot open '" + scores.string() + "' for reading");
    const auto records = read_scores(in);
    return write_report(detector, records, config.bins, config.inlier_labels, out_dir);
}

}  // namespace somscreen
