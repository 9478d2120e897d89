#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "somscreen/detector.hpp"
#include "somscreen/errors.hpp"

using namespace somscreen;

namespace {

DetectionModel small_model() {
    Lattice lattice(2, 3, kFeatureCount, Topology::hexagonal);
    for (std::size_t j = 0; j < lattice.size(); ++j)
        for (std::size_t k = 0; k < kFeatureCount; ++k) lattice.weight(j)[k] = double(j) + 0.1 * double(k);
    NormStats norm;
    norm.min.fill(0.0);
    norm.max.fill(1.0);
    return {std::move(lattice), norm, 0.5, default_feature_names()};
}

FeatureVector sample(std::string id, std::optional<std::string> label, double base) {
    FeatureVector f{std::move(id), std::move(label), {}};
    for (std::size_t k = 0; k < kFeatureCount; ++k) f.values[k] = base + 0.1 * double(k);
    return f;
}

}  // namespace

TEST_CASE("fit_threshold") {
    const std::vector<double> same = {0.7, 0.7, 0.7, 0.7};
    CHECK(fit_threshold(same) == doctest::Approx(0.7).epsilon(1e-15));
    const std::vector<double> two = {0.0, 0.2};
    CHECK(std::fabs(fit_threshold(two) - 0.3) <= 1e-12);
    CHECK(std::fabs(fit_threshold(two, GateMode::two_std) - 0.2) <= 1e-12);
    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(fit_threshold(one), InvalidArgument);
    CHECK_THROWS_AS(fit_threshold({}), InvalidArgument);
}

TEST_CASE("fit_threshold is translation and scale equivariant") {
    std::mt19937_64 gen(9);
    std::lognormal_distribution<double> qe(-3.0, 0.6);
    std::uniform_real_distribution<double> shift(-1.0, 1.0), scale(0.01, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> qes(2 + trial * 7);
        for (auto& q : qes) q = qe(gen);
        const double t = fit_threshold(qes);
        const double c = shift(gen), s = scale(gen);
        auto shifted = qes, scaled = qes;
        for (auto& q : shifted) q += c;
        for (auto& q : scaled) q *= s;
        CHECK(fit_threshold(shifted) == doctest::Approx(t + c).epsilon(1e-12));
        CHECK(fit_threshold(scaled) == doctest::Approx(t * s).epsilon(1e-12));
    }
}

TEST_CASE("classify uses a strict gate and is monotone") {
    CHECK(classify(0.3, 0.3) == Verdict::inlier);
    CHECK(classify(0.0, 0.3) == Verdict::inlier);
    CHECK(classify(0.3 * 1.01, 0.3) == Verdict::outlier);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0, 2);
    for (int i = 0; i < 1000; ++i) {
        double a = u(gen), b = u(gen);
        if (a > b) std::swap(a, b);
        if (classify(a, 1.0) == Verdict::outlier) CHECK(classify(b, 1.0) == Verdict::outlier);
    }
}

TEST_CASE("bins") {
    const auto bins = default_bins();
    REQUIRE(bins.size() == 6);
    CHECK(bins[0].name == "0.0-0.1");
    CHECK(bins[5].name == "30.0-100.0");
    CHECK(assign_bin(0.05, bins) == "0.0-0.1");
    CHECK(assign_bin(0.3, bins) == "other");
    CHECK(assign_bin(3.999, bins) == "3.0-4.0");
    CHECK(assign_bin(4.0, bins) == "other");
    CHECK(assign_bin(0.5, bins) == "0.5-0.6");
    CHECK(assign_bin(150.0, bins) == "other");

    std::vector<ErrorBin> overlapping = {{0, 1, "a"}, {0.5, 2, "b"}};
    CHECK_THROWS_AS(validate_bins(overlapping), InvalidArgument);
    std::vector<ErrorBin> inverted = {{1, 0, "a"}};
    CHECK_THROWS_AS(validate_bins(inverted), InvalidArgument);
    CHECK_NOTHROW(validate_bins(bins));
}

TEST_CASE("bin_errors puts every record in exactly one bin") {
    std::mt19937_64 gen(3);
    std::lognormal_distribution<double> qe(0.0, 2.0);
    std::vector<ScoreRecord> recs(2000);
    for (auto& r : recs) r.qe = qe(gen);
    const auto bins = default_bins();
    const auto counts = bin_errors(recs, bins);
    REQUIRE(counts.size() == bins.size() + 1);
    CHECK(counts.back().name == "other");
    std::size_t total = 0;
    for (const auto& c : counts) total += c.count;
    CHECK(total == recs.size());
    for (std::size_t i = 0; i < bins.size(); ++i) {
        std::size_t expect = 0;
        for (const auto& r : recs) expect += assign_bin(r.qe, bins) == bins[i].name;
        CHECK(counts[i].count == expect);
    }
}

TEST_CASE("score_dataset") {
    const auto model = small_model();
    const auto bins = default_bins();
    CHECK(score_dataset(model, {}, bins, true).empty());

    std::vector<FeatureVector> fs = {sample("a", "inlier", 4.0), sample("b", {}, 40.0), sample("c", "x", 0.0)};
    const auto recs = score_dataset(model, fs, bins, false);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].id == "a");
    CHECK(recs[0].qe == 0.0);
    CHECK(recs[0].verdict == Verdict::inlier);
    CHECK(recs[0].bmu_row == 1);
    CHECK(recs[0].bmu_col == 1);
    CHECK(recs[0].bin == "0.0-0.1");
    CHECK(recs[1].id == "b");
    CHECK(recs[1].verdict == Verdict::outlier);
    CHECK(recs[1].qe == doctest::Approx(35.0 * std::sqrt(6.0)));
    CHECK(recs[2].bmu_row == 0);
    CHECK(recs[2].bmu_col == 0);

    // normalization is applied when requested
    auto scaled = model;
    scaled.norm.max.fill(2.0);
    auto doubled = sample("d", {}, 0.0);
    for (std::size_t k = 0; k < kFeatureCount; ++k) doubled.values[k] = 2.0 * (2.0 + 0.1 * double(k));
    const auto r2 = score_dataset(scaled, std::span(&doubled, 1), bins, true);
    CHECK(r2[0].qe == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r2[0].bmu_row * 3 + r2[0].bmu_col == 2);

    auto bad = model;
    bad.threshold = 0.0;
    CHECK_THROWS_AS(score_dataset(bad, fs, bins, false), InvalidArgument);
}

TEST_CASE("hit maps") {
    const auto model = small_model();
    std::vector<ScoreRecord> one = {{"a", "inlier", 0.1, 1, 2, Verdict::inlier, "0.0-0.1"}};
    const auto maps = hit_map(model, one);
    REQUIRE(maps.size() == 1);
    CHECK(maps[0].group == "inlier");
    CHECK(maps[0].counts == std::vector<std::uint64_t>{0, 0, 0, 0, 0, 1});

    std::mt19937_64 gen(4);
    std::vector<ScoreRecord> many(500);
    const char* labels[] = {"inlier", "duplet", "noise"};
    for (std::size_t i = 0; i < many.size(); ++i) {
        many[i].bmu_row = gen() % 2;
        many[i].bmu_col = gen() % 3;
        if (i % 4) many[i].label = labels[gen() % 3];
    }
    const auto groups = hit_map(model, many);
    std::uint64_t total = 0;
    for (const auto& g : groups) total += g.total();
    CHECK(total == many.size());
    CHECK(groups.size() == 4);
    CHECK(groups.back().group == "unlabeled");

    const std::vector<std::string> inl = {"inlier"};
    const auto in = hit_map_for(model.lattice, many, "in", inl, true);
    const auto out = hit_map_for(model.lattice, many, "out", inl, false);
    std::size_t labelled = 0;
    for (const auto& r : many) labelled += r.label.has_value();
    CHECK(in.total() + out.total() == labelled);

    std::vector<ScoreRecord> outside = {{"z", {}, 0.1, 5, 0, Verdict::inlier, "x"}};
    CHECK_THROWS_AS(hit_map(model, outside), InvalidArgument);
}

TEST_CASE("separation_stat") {
    DistanceMap dmap{2, 3, {0.2, 0.5, 1.0, 0.4, 0.3, 0.9}};
    HitMap a{"a", 2, 3, {1, 2, 0, 0, 3, 1}};
    CHECK(separation_stat(dmap, a, a) == 0.0);

    HitMap lo{"lo", 2, 3, {5, 0, 0, 0, 0, 0}};
    HitMap hi{"hi", 2, 3, {0, 0, 7, 0, 0, 0}};
    CHECK(separation_stat(dmap, lo, hi) == doctest::Approx(1.0 - 0.2).epsilon(1e-15));

    // weighted medians: outliers {0.5 x2, 0.9 x1} -> 0.5; inliers {0.2, 0.3, 0.4, 0.5} -> 0.35
    HitMap in{"in", 2, 3, {1, 1, 0, 1, 1, 0}};
    HitMap out{"out", 2, 3, {0, 2, 0, 0, 0, 1}};
    CHECK(separation_stat(dmap, in, out) == doctest::Approx(0.5 - 0.35).epsilon(1e-15));

    HitMap empty{"e", 2, 3, {0, 0, 0, 0, 0, 0}};
    CHECK_THROWS_AS(separation_stat(dmap, empty, a), InvalidArgument);
    CHECK_THROWS_AS(separation_stat(dmap, a, empty), InvalidArgument);
    HitMap wrong{"w", 3, 2, {1, 0, 0, 0, 0, 0}};
    CHECK_THROWS_AS(separation_stat(dmap, wrong, a), InvalidArgument);
}

TEST_CASE("scores CSV round trip") {
    std::vector<ScoreRecord> recs = {{"a", "inlier", 0.0412, 3, 7, Verdict::inlier, "0.0-0.1"},
                                     {"b", std::nullopt, 12.5, 0, 0, Verdict::outlier, "10.0-20.0"},
                                     {"c", "noise", 1.0 / 3.0, 64, 21, Verdict::outlier, "other"}};
    std::stringstream buf;
    write_scores(buf, recs);
    CHECK(buf.str().rfind("id,label,qe,bmu_row,bmu_col,verdict,bin\n", 0) == 0);
    CHECK(read_scores(buf) == recs);

    std::stringstream bad("id,label,qe,bmu_row,bmu_col,verdict,bin\na,,0.1,0,0,maybe,other\n");
    CHECK_THROWS_AS(read_scores(bad), ParseError);
}

TEST_CASE("range filter comparison hook") {
    std::vector<FeatureVector> fs = {sample("a", {}, 1.0), sample("b", {}, 5.0), sample("c", {}, 2.0)};
    FeatureBounds bounds;
    bounds.lo.fill(-INFINITY);
    bounds.hi.fill(INFINITY);
    bounds.hi[0] = 3.0;
    const auto manual = range_filter(fs, bounds);
    CHECK(manual == std::vector<Verdict>{Verdict::inlier, Verdict::outlier, Verdict::inlier});
    const std::vector<Verdict> som = {Verdict::inlier, Verdict::outlier, Verdict::outlier};
    CHECK(verdict_agreement(manual, som) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(verdict_agreement(manual, std::span(som).first(2)), InvalidArgument);
}
