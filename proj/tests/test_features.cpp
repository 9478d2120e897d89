#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <sstream>

#include "somscreen/errors.hpp"
#include "somscreen/features.hpp"
#include "somscreen/features_io.hpp"
#include "somscreen/phantoms.hpp"

using namespace somscreen;

namespace {

PhasePatch blank() { return PhasePatch{}; }

void fill_square(PhasePatch& p, std::size_t r0, std::size_t c0, std::size_t side, double v) {
    for (std::size_t r = r0; r < r0 + side; ++r)
        for (std::size_t c = c0; c < c0 + side; ++c) p.at(r, c) = v;
}

// Between-class variance of splitting the patch at `k` computed from the raw
// pixels, with each pixel represented by its histogram-bin centre.
double otsu_objective(const PhasePatch& p, std::size_t k) {
    const double lo = *std::min_element(p.pixels.begin(), p.pixels.end());
    const double hi = *std::max_element(p.pixels.begin(), p.pixels.end());
    const double w = (hi - lo) / 256.0;
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (double v : p.pixels) {
        const std::size_t b = std::min<std::size_t>(255, std::size_t((v - lo) / w));
        const double centre = lo + (double(b) + 0.5) * w;
        if (b < k) {
            n0 += 1;
            s0 += centre;
        } else {
            n1 += 1;
            s1 += centre;
        }
    }
    if (n0 == 0 || n1 == 0) return 0.0;
    const double n = n0 + n1;
    return n0 * n1 * (s0 / n0 - s1 / n1) * (s0 / n0 - s1 / n1) / (n * n);
}

}  // namespace

TEST_CASE("segment hand cases") {
    auto p = blank();
    CHECK(segment(p, 0.5).pixel_count == 0);

    p.at(10, 20) = 1.0;
    auto m = segment(p, 0.5);
    CHECK(m.pixel_count == 1);
    CHECK(m.at(10, 20));

    SUBCASE("keeps the larger of two blobs") {
        auto q = blank();
        fill_square(q, 2, 2, 3, 1.0);    // 9
        q.at(2, 5) = q.at(2, 6) = q.at(2, 7) = 1.0;  // 12 with the square
        fill_square(q, 30, 30, 5, 1.0);  // 25
        for (std::size_t c = 30; c < 35; ++c) q.at(35, c) = 1.0;  // 30
        const auto s = segment(q, 0.5);
        CHECK(s.pixel_count == 30);
        CHECK(s.at(30, 30));
        CHECK_FALSE(s.at(2, 2));
    }
    SUBCASE("equal components resolve to the first in scan order") {
        auto q = blank();
        fill_square(q, 40, 1, 2, 1.0);
        fill_square(q, 5, 40, 2, 1.0);
        const auto s = segment(q, 0.5);
        CHECK(s.pixel_count == 4);
        CHECK(s.at(5, 40));
    }
    SUBCASE("diagonal pixels are one 8-connected component") {
        auto q = blank();
        for (std::size_t i = 0; i < 5; ++i) q.at(10 + i, 10 + i) = 1.0;
        CHECK(segment(q, 0.5).pixel_count == 5);
    }
    CHECK_THROWS_AS(segment(p, NAN), InvalidArgument);
}

TEST_CASE("segment is idempotent on its own output region") {
    PhantomSpec spec;
    for (auto kind : {PhantomKind::inlier, PhantomKind::noise, PhantomKind::border_cut}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            spec.kind = kind;
            spec.seed = seed;
            const auto p = generate(spec);
            const double t = otsu_threshold(p);
            const auto m = segment(p, t);
            auto masked = blank();
            const double below = t - 1.0;
            for (std::size_t i = 0; i < kPatchPixels; ++i) masked.pixels[i] = m.mask[i] ? p.pixels[i] : below;
            const auto again = segment(masked, t);
            CHECK(again.mask == m.mask);
        }
    }
}

TEST_CASE("otsu_threshold") {
    auto c = blank();
    for (auto& v : c.pixels) v = 2.0;
    CHECK(otsu_threshold(c) == 2.0);

    auto half = blank();
    for (std::size_t i = 0; i < kPatchPixels / 2; ++i) half.pixels[i] = 1.0;
    const double t = otsu_threshold(half);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
    CHECK(segment(half, t).pixel_count == kPatchPixels / 2);
}

TEST_CASE("otsu_threshold matches an exhaustive scan over all 256 splits") {
    PhantomSpec spec;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        spec.seed = seed;
        spec.kind = seed % 2 ? PhantomKind::inlier : PhantomKind::noise;
        const auto p = generate(spec);
        const double lo = *std::min_element(p.pixels.begin(), p.pixels.end());
        const double hi = *std::max_element(p.pixels.begin(), p.pixels.end());
        double best = -1.0;
        for (std::size_t k = 0; k < 256; ++k) best = std::max(best, otsu_objective(p, k));
        const double t = otsu_threshold(p);
        const auto k = static_cast<std::size_t>(std::llround((t - lo) / ((hi - lo) / 256.0)));
        CHECK(otsu_objective(p, k) == doctest::Approx(best).epsilon(1e-9));
        if (spec.kind == PhantomKind::inlier) {
            // the bump core (patch centre) is foreground
            const auto m = segment(p, t);
            CHECK(m.at(24, 24));
            CHECK(m.at(25, 25));
        }
    }
}

TEST_CASE("extract_features: single pixel") {
    auto p = blank();
    p.at(7, 9) = 2.0;
    const auto f = extract_features(p, segment(p, 1.0));
    CHECK(f.values[0] == 1.0);
    CHECK(f.values[1] == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
    CHECK(f.values[1] == doctest::Approx(12.566).epsilon(1e-4));
    CHECK(f.values[2] == doctest::Approx(1.128).epsilon(1e-3));
    CHECK(f.values[3] == 2.0);
    CHECK(f.values[4] == 0.0);
    CHECK(f.values[5] == 4.0);
}

TEST_CASE("extract_features: 3x3 square") {
    auto p = blank();
    fill_square(p, 20, 20, 3, 1.0);
    const auto f = extract_features(p, segment(p, 0.5));
    CHECK(f.values[0] == 9.0);
    // perimeter 8 (all but the centre)
    CHECK(f.values[1] == doctest::Approx(4.0 * std::numbers::pi * 9.0 / 64.0).epsilon(1e-12));
    CHECK(f.values[1] == doctest::Approx(1.767).epsilon(1e-3));
    CHECK(f.values[4] == 0.0);
    CHECK(f.values[5] == 9.0);
}

TEST_CASE("extract_features: patch-border pixels count as perimeter") {
    auto p = blank();
    fill_square(p, 0, 0, 3, 1.0);
    const auto f = extract_features(p, segment(p, 0.5));
    // all 9 pixels: 5 on the patch border, 3 exposed inside, centre (1,1) is interior
    CHECK(f.values[1] == doctest::Approx(4.0 * std::numbers::pi * 9.0 / 64.0).epsilon(1e-12));
    fill_square(p, 0, 0, 4, 1.0);
    const auto g = extract_features(p, segment(p, 0.5));
    // 4x4 in the corner: interior pixels (1,1),(1,2),(2,1),(2,2) -> perimeter 12
    CHECK(g.values[1] == doctest::Approx(4.0 * std::numbers::pi * 16.0 / 144.0).epsilon(1e-12));
}

TEST_CASE("extract_features: empty mask is an error") {
    const auto p = blank();
    CHECK_THROWS_AS(extract_features(p, segment(p, 0.5)), EmptySegmentation);
}

TEST_CASE("extract_features invariants on phantoms") {
    PhantomSpec spec;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        spec.seed = seed;
        spec.kind = static_cast<PhantomKind>(seed % 5);
        auto p = generate(spec);
        const auto m = segment(p, otsu_threshold(p));
        const auto f = extract_features(p, m);
        CHECK(f.values[2] * f.values[2] * std::numbers::pi / 4.0 == doctest::Approx(f.values[0]).epsilon(1e-9));
        for (double v : f.values) CHECK(std::isfinite(v));
    }
}

TEST_CASE("extract_features: uniform phase has zero variance, energy bounds the peak") {
    auto p = blank();
    fill_square(p, 10, 12, 6, 0.75);
    auto f = extract_features(p, segment(p, 0.5));
    CHECK(f.values[4] == 0.0);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto q = blank();
        for (std::size_t r = 15; r < 30; ++r)
            for (std::size_t c = 15; c < 30; ++c) q.at(r, c) = 0.5 + u(gen);
        const auto g = extract_features(q, segment(q, 0.25));
        CHECK(g.values[5] >= g.values[3] * g.values[3]);
    }
}

TEST_CASE("extract_features is translation invariant") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    auto p = blank();
    // an irregular shape in a 10x12 box
    for (std::size_t r = 0; r < 10; ++r)
        for (std::size_t c = 0; c < 12; ++c)
            if ((r * 7 + c * 3) % 5 != 0 || r == 5) p.at(5 + r, 6 + c) = u(gen);
    const auto base = extract_features(p, segment(p, 0.25));
    for (auto [dr, dc] : {std::pair{0, 10}, {20, 3}, {34, 32}}) {
        auto q = blank();
        for (std::size_t r = 0; r < 10; ++r)
            for (std::size_t c = 0; c < 12; ++c) q.at(5 + dr + r, 6 + dc + c) = p.at(5 + r, 6 + c);
        const auto moved = extract_features(q, segment(q, 0.25));
        for (std::size_t k = 0; k < kFeatureCount; ++k) CHECK(moved.values[k] == base.values[k]);
    }
}

TEST_CASE("fit_normalizer and apply_normalizer") {
    SUBCASE("single sample widens every feature") {
        FeatureVector v{"a", {}, {1, 2, 3, 4, 5, 6}};
        const auto fit = fit_normalizer(std::span(&v, 1));
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            CHECK(fit.widened[k]);
            CHECK(fit.stats.min[k] == v.values[k]);
            CHECK(fit.stats.max[k] == v.values[k] + 1.0);
        }
    }
    SUBCASE("two samples") {
        std::vector<FeatureVector> vs = {{"a", {}, {1, 0, 0, 0, 0, 0}}, {"b", {}, {3, 1, 1, 1, 1, 1}}};
        const auto fit = fit_normalizer(vs);
        CHECK(fit.stats.min[0] == 1.0);
        CHECK(fit.stats.max[0] == 3.0);
        CHECK_FALSE(fit.widened[0]);
        CHECK(apply_normalizer(fit.stats, vs[0]).values == FeatureValues{0, 0, 0, 0, 0, 0});
        CHECK(apply_normalizer(fit.stats, vs[1]).values == FeatureValues{1, 1, 1, 1, 1, 1});
        FeatureVector far = vs[1];
        far.values[0] = 2 * 3.0 - 1.0;
        CHECK(apply_normalizer(fit.stats, far).values[0] == 2.0);
    }
    SUBCASE("fitted samples land in [0, 1]") {
        std::mt19937_64 gen(77);
        std::normal_distribution<double> nd(5.0, 3.0);
        std::vector<FeatureVector> vs(200);
        for (auto& v : vs)
            for (auto& x : v.values) x = nd(gen) * 1e3;
        const auto fit = fit_normalizer(vs);
        for (const auto& v : vs)
            for (double x : apply_normalizer(fit.stats, v).values) {
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
            }
    }
    CHECK_THROWS_AS(fit_normalizer({}), InvalidArgument);
}

TEST_CASE("patch file round trip and errors") {
    PhantomSpec spec;
    spec.seed = 5;
    const auto p = generate(spec);
    std::stringstream buf;
    write_patch(buf, p);
    const auto q = read_patch(buf);
    CHECK(q.pixels == p.pixels);

    std::stringstream short_row("1 2 3\n");
    try {
        read_patch(short_row);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }
    std::string text;
    for (int r = 0; r < 50; ++r) {
        for (int c = 0; c < 50; ++c) text += (r == 17 && c == 3) ? "x " : "0 ";
        text += "\n";
    }
    std::stringstream bad(text);
    try {
        read_patch(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 18);
    }
}

TEST_CASE("feature CSV round trip is bit-exact") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::vector<FeatureVector> fs;
    for (int i = 0; i < 100; ++i) {
        FeatureVector f{"s" + std::to_string(i), i % 3 ? std::optional<std::string>("lbl" + std::to_string(i % 4)) : std::nullopt, {}};
        for (auto& v : f.values) v = u(gen) / (1 + i);
        fs.push_back(f);
    }
    fs[0].values = {0.1, 1e-310, -0.0, 5e-324, 1.7976931348623157e308, 1.0 / 3.0};
    std::stringstream buf;
    write_features(buf, fs);
    CHECK(buf.str().rfind("id,label,area,circularity,equivalent_diameter,optical_height_max,optical_height_variance,energy\n", 0) == 0);
    const auto back = read_features(buf);
    REQUIRE(back.size() == fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        CHECK(back[i].id == fs[i].id);
        CHECK(back[i].label == fs[i].label);
        for (std::size_t k = 0; k < kFeatureCount; ++k)
            CHECK(std::memcmp(&back[i].values[k], &fs[i].values[k], sizeof(double)) == 0);
    }
}

TEST_CASE("feature and manifest CSV errors carry line numbers") {
    std::stringstream bad_header("id,label,area\n");
    CHECK_THROWS_AS(read_features(bad_header), ParseError);

    std::stringstream bad_value(
        "id,label,area,circularity,equivalent_diameter,optical_height_max,optical_height_variance,energy\n"
        "a,,1,2,3,4,5,6\n"
        "b,,1,2,three,4,5,6\n");
    try {
        read_features(bad_value);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    std::stringstream manifest("path,id,label\np/a.txt,a,inlier\np/b.txt,b,\n");
    const auto entries = read_manifest(manifest);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].label == std::optional<std::string>("inlier"));
    CHECK_FALSE(entries[1].label.has_value());

    std::stringstream short_manifest("path,id,label\np/a.txt,a\n");
    CHECK_THROWS_AS(read_manifest(short_manifest), ParseError);

    std::stringstream out;
    CHECK_THROWS_AS(write_manifest(out, {{"a,b", "x", {}}}), InvalidArgument);
}
