#include "fer/features.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace fer;
using namespace fer::features;

TEST_CASE("ten_crop origins and contents") {
    const Image flat(256, 256, 1, 9);
    const auto set = ten_crop(flat);
    std::set<std::pair<std::pair<int, int>, bool>> seen;
    for (std::size_t i = 0; i < 10; ++i) {
        seen.insert({set.origins[i], set.flipped[i]});
        CHECK(set.crops[i] == Image(227, 227, 1, 9));
    }
    CHECK(seen.size() == 10);
    CHECK(set.origins[4] == std::pair{14, 14});

    Image dot(256, 256, 1, 0);
    dot.at(0, 0) = 255;
    const auto crops = ten_crop(dot);
    for (std::size_t i = 0; i < 10; ++i) {
        const bool has = std::find(crops.crops[i].pixels.begin(), crops.crops[i].pixels.end(), 255) !=
                         crops.crops[i].pixels.end();
        const bool expected = (!crops.flipped[i] && crops.origins[i] == std::pair{0, 0}) ||
                              (crops.flipped[i] && crops.origins[i] == std::pair{29, 0});
        CHECK(has == expected);
    }
    CHECK_THROWS_AS(ten_crop(Image(255, 256, 1)), InputError);
}

TEST_CASE("average_crops") {
    std::vector<std::vector<double>> same(10, {1.5, -2.0});
    CHECK(average_crops(same) == std::vector<double>{1.5, -2.0});

    std::vector<std::vector<double>> basis(10, std::vector<double>(10, 0.0));
    for (std::size_t i = 0; i < 10; ++i) basis[i][i] = 10.0;
    CHECK(average_crops(basis) == std::vector<double>(10, 1.0));

    Rng rng(4);
    std::vector<std::vector<double>> v(10, std::vector<double>(5));
    for (auto& row : v)
        for (auto& x : row) x = rng.normal();
    const auto a = average_crops(v);
    std::reverse(v.begin(), v.end());
    CHECK(average_crops(v) == a);
    v.pop_back();
    CHECK_THROWS_AS(average_crops(v), InputError);
}

TEST_CASE("l2_normalize") {
    const std::vector<double> v{3.0, 4.0};
    const auto u = l2_normalize(v);
    CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-15));
    const auto uu = l2_normalize(u);
    CHECK(std::abs(uu[0] - u[0]) < 1e-15);
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(l2_normalize(zero), NumericalError);
}

TEST_CASE("raw pixel features") {
    const auto white = raw_pixel_features(Image(32, 32, 1, 255));
    CHECK(white.values == std::vector<double>(1024, 1.0));
    Image checker(2, 2, 1);
    checker.pixels = {0, 255, 255, 0};
    CHECK(raw_pixel_features(checker, 2, 2).values == std::vector<double>{0, 1, 1, 0});
    CHECK(raw_pixel_features(checker, 5, 3).values.size() == 15);
}

TEST_CASE("lbp_code examples") {
    LbpConfig r1;
    r1.radius = 1.0;
    CHECK(lbp_code(Image(5, 5, 1, 70), 2, 2, r1) == 255);

    Image img(3, 3, 1, 0);
    img.at(1, 1) = 100;
    img.at(2, 1) = 200;  // east
    CHECK(lbp_code(img, 1, 1, r1) == 1);

    Rng rng(8);
    Image base = fer::testing::random_image(12, 12, rng);
    for (auto& p : base.pixels) p = static_cast<std::uint8_t>(p / 2);
    Image shifted = base;
    for (auto& p : shifted.pixels) p = static_cast<std::uint8_t>(p + 100);
    for (int y = 2; y < 10; ++y)
        for (int x = 2; x < 10; ++x) CHECK(lbp_code(base, x, y, {}) == lbp_code(shifted, x, y, {}));
}

TEST_CASE("uniform pattern table") {
    const auto& bins = uniform_bin_table();
    int uniform = 0;
    for (int c = 0; c < 256; ++c) uniform += is_uniform_pattern(static_cast<std::uint8_t>(c));
    CHECK(uniform == 58);
    CHECK(bins[0] == 0);
    CHECK(bins[255] == 57);
    CHECK(bins[0b01010101] == 58);
    const auto oracle = fer::testing::brute_bins();
    for (int c = 0; c < 256; ++c) CHECK(bins[static_cast<std::size_t>(c)] == oracle[static_cast<std::size_t>(c)]);
}

TEST_CASE("lbp histogram") {
    LbpConfig one{8, 2.0, 1, 1};
    const auto flat = lbp_grid_histogram(Image(10, 10, 1, 30), one);
    CHECK(flat.values[57] == 1.0);

    Image halves(12, 12, 1, 20);
    for (int y = 0; y < 12; ++y)
        for (int x = 6; x < 12; ++x) halves.at(x, y) = 200;
    LbpConfig split{8, 2.0, 1, 2};
    CHECK(lbp_grid_counts(halves, split) == fer::testing::brute_lbp_counts(halves, 2.0, 1, 2));

    Rng rng(5);
    const auto hist = lbp_grid_histogram(fer::testing::random_image(48, 40, rng));
    REQUIRE(hist.values.size() == 7 * 6 * 59);
    for (std::size_t cell = 0; cell < 42; ++cell) {
        double s = 0.0;
        for (std::size_t b = 0; b < 59; ++b) s += hist.values[cell * 59 + b];
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(lbp_grid_histogram(Image(8, 8, 1, 0)), InputError);
}

TEST_CASE("concat_parts") {
    std::vector<FeatureVector> parts;
    for (PatchId p : kCanonicalPatches) parts.push_back({std::vector<double>(52, 1.0), FeatureKind::deep, p});
    CHECK(concat_parts(parts).values.size() == 208);
    CHECK(concat_parts(std::span(parts).first(1)).values == parts[0].values);
    std::swap(parts[1], parts[2]);
    CHECK_THROWS_AS(concat_parts(parts), InputError);
}

TEST_CASE("assemble_features averages crops and normalizes deep vectors") {
    std::vector<io::FeatureRecord> recs;
    for (int crop = 0; crop < 10; ++crop) recs.push_back({"s1", PatchId::face, crop, {crop < 5 ? 2.0 : 4.0, 0.0}});
    recs.push_back({"s2", PatchId::face, io::kSingleCrop, {0.0, 5.0}});
    const auto table = assemble_features(recs, {"s1", "s2"}, {PatchId::face});
    const auto& m = table.per_patch.at(PatchId::face);
    CHECK(m(0, 0) == doctest::Approx(1.0));
    CHECK(m(1, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(assemble_features(recs, {"s1", "s3"}, {PatchId::face}), InputError);
    CHECK_THROWS_AS(assemble_features(recs, {"s1"}, {PatchId::mouth}), InputError);
}
