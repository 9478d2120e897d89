// somscreen: SOM-based outlier screening for single-cell phase images.
//
//   somscreen synth    --out DIR --inliers N --outliers-per-kind M
//   somscreen extract  --manifest FILE --out FEATURES.csv
//   somscreen train    --features FEATURES.csv --model MODEL.som
//   somscreen crossval --features FEATURES.csv [--grid FILE] [--folds K] --out REPORT.csv
//   somscreen score    --model MODEL.som --features FEATURES.csv --out SCORES.csv
//   somscreen report   --model MODEL.som --scores SCORES.csv --out-dir DIR
//
// Global flags: --seed, --config, --quiet. Errors go to stderr as a single
// line `error: <kind>: <message>` with exit status 1.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "somscreen/errors.hpp"
#include "somscreen/float_io.hpp"
#include "somscreen/pipeline.hpp"

namespace fs = std::filesystem;
using namespace somscreen;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    bool quiet = false;
};

PipelineConfig resolve_config(const Globals& g) {
    PipelineConfig cfg;
    if (!g.config.empty()) cfg = load_config(g.config);
    if (g.seed) cfg.train.seed = *g.seed;
    return cfg;
}

std::string one_line(std::string s) {
    for (auto& ch : s)
        if (ch == '\n' || ch == '\r') ch = ' ';
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SOM-based outlier screening for single-cell phase images"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "master seed (overrides train.seed)");
    app.add_option("--config", g.config, "key = value config file")->check(CLI::ExistingFile);
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    std::string out, manifest, features, model, grid, scores;
    std::size_t inliers = 0, outliers_per_kind = 0;
    std::optional<std::size_t> folds;
    std::optional<std::size_t> iterations;

    auto* synth = app.add_subcommand("synth", "generate synthetic phantom patches and a manifest");
    synth->add_option("--out", out, "output directory")->required();
    synth->add_option("--inliers", inliers, "number of inlier phantoms")->required();
    synth->add_option("--outliers-per-kind", outliers_per_kind, "phantoms per outlier kind")->required();

    auto* extract = app.add_subcommand("extract", "segment patches and write the feature CSV");
    extract->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    extract->add_option("--out", out, "feature CSV")->required();

    auto* train = app.add_subcommand("train", "train a detector on inlier features");
    train->add_option("--features", features)->required()->check(CLI::ExistingFile);
    train->add_option("--model", model, "model file to write")->required();
    train->add_option("--iterations", iterations, "training iterations (default 10 x samples)");

    auto* cv = app.add_subcommand("crossval", "K-fold grid search on held-out average quantization error");
    cv->add_option("--features", features)->required()->check(CLI::ExistingFile);
    cv->add_option("--grid", grid, "grid file; default grid when omitted")->check(CLI::ExistingFile);
    cv->add_option("--folds", folds);
    cv->add_option("--iterations", iterations);
    cv->add_option("--out", out, "report CSV")->required();

    auto* score = app.add_subcommand("score", "score features against a model");
    score->add_option("--model", model)->required()->check(CLI::ExistingFile);
    score->add_option("--features", features)->required()->check(CLI::ExistingFile);
    score->add_option("--out", out, "scores CSV")->required();

    auto* report = app.add_subcommand("report", "write histogram, distance map and hit maps");
    report->add_option("--model", model)->required()->check(CLI::ExistingFile);
    report->add_option("--scores", scores)->required()->check(CLI::ExistingFile);
    report->add_option("--out-dir", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << one_line(e.what()) << '\n';
        return 1;
    }

    try {
        PipelineConfig cfg = resolve_config(g);
        if (iterations) cfg.train.iterations = *iterations;
        if (folds) cfg.folds = *folds;
        cfg.validate();
        auto log = [&](const std::string& line) {
            if (!g.quiet) std::cout << line << '\n';
        };

        if (*synth) {
            const auto entries = cmd_synth(out, inliers, outliers_per_kind, cfg);
            log("wrote " + std::to_string(entries.size()) + " patches to " + out);
        } else if (*extract) {
            const auto res = cmd_extract(manifest, out, cfg);
            for (const auto& id : res.skipped) std::cerr << "warning: empty segmentation, skipped '" << id << "'\n";
            log("extracted " + std::to_string(res.features.size()) + " samples, skipped " +
                std::to_string(res.skipped.size()));
        } else if (*train) {
            const auto res = cmd_train(features, model, cfg);
            if (res.eigen_fallback) std::cerr << "warning: degenerate data, lattice aspect ratio set to 1\n";
            if (res.init_fallback) std::cerr << "warning: degenerate data, pca_plane fell back to random_uniform\n";
            for (std::size_t k = 0; k < res.widened.size(); ++k)
                if (res.widened[k]) std::cerr << "warning: feature " << kFeatureNames[k] << " has zero range\n";
            log("lattice " + std::to_string(res.model.lattice.rows()) + "x" + std::to_string(res.model.lattice.cols()));
            log("E_AQ " + format_double(res.eaq));
            log("threshold " + format_double(res.model.threshold));
        } else if (*cv) {
            const fs::path grid_path = grid;
            const auto rows = cmd_crossval(features, grid.empty() ? nullptr : &grid_path, out, cfg);
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (rows[i].selected)
                    log("selected row " + std::to_string(i) + ": sigma0=" + format_double(rows[i].point.sigma0) +
                        " alpha0=" + format_double(rows[i].point.alpha0) +
                        " topology=" + std::string(topology_name(rows[i].point.topology)) +
                        " mean E_AQ=" + format_double(rows[i].mean_eaq));
        } else if (*score) {
            const auto res = cmd_score(model, features, out, cfg);
            log("scored " + std::to_string(res.records) + " samples, outliers " + std::to_string(res.outliers) + " (" +
                format_double(res.outlier_percentage()) + "%)");
        } else if (*report) {
            const auto res = cmd_report(model, scores, out, cfg);
            log("report written to " + out);
            if (res.has_label_separation) log("separation (labels) " + format_double(res.separation_by_label));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}
