#include "fer/kernels.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace fer;
using namespace fer::kernels;

TEST_CASE("pairwise distances: serial and omp agree bit for bit") {
    Rng rng(1);
    const Matrix a = fer::testing::random_matrix(37, 9, rng);
    const Matrix b = fer::testing::random_matrix(23, 9, rng);
    const Matrix s = serial::pairwise_sq_distances(a, b);
    const Matrix o = omp::pairwise_sq_distances(a, b);
    CHECK(s == o);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            CHECK(s(i, j) == doctest::Approx((a.row(i) - b.row(j)).squaredNorm()).epsilon(1e-14));
    CHECK_THROWS_AS(serial::pairwise_sq_distances(a, fer::testing::random_matrix(2, 3, rng)), InputError);
}

TEST_CASE("knn: ordering, ties and exclusion") {
    Matrix pts(4, 1);
    pts << 0.0, 1.0, -1.0, 3.0;
    const Matrix d2 = serial::pairwise_sq_distances(pts, pts);
    const auto r = serial::knn(d2, 2, true);
    // point 0 has two neighbours at distance 1; the lower index wins the tie
    CHECK(r.neighbor(0, 0) == 1);
    CHECK(r.neighbor(0, 1) == 2);
    CHECK(r.neighbor(3, 0) == 1);
    CHECK(r.distance2(3, 1) == 9.0);
    const auto with_self = serial::knn(d2, 1, false);
    for (std::size_t i = 0; i < 4; ++i) CHECK(with_self.neighbor(i, 0) == i);
    CHECK_THROWS_AS(serial::knn(d2, 4, true), InputError);

    Rng rng(2);
    const Matrix x = fer::testing::random_matrix(60, 4, rng);
    const Matrix dx = omp::pairwise_sq_distances(x, x);
    const auto ks = serial::knn(dx, 7, true);
    const auto ko = omp::knn(dx, 7, true);
    CHECK(ks.index == ko.index);
    CHECK(ks.dist2 == ko.dist2);
}

TEST_CASE("lbp circle and code map") {
    const auto c1 = make_lbp_circle(1.0);
    CHECK(c1.reach == 1);
    CHECK(c1.dx[0] == 1.0);
    CHECK(c1.dy[0] == 0.0);
    CHECK(c1.dx[2] == 0.0);
    CHECK(c1.dy[2] == -1.0);  // north
    CHECK(make_lbp_circle(2.0).reach == 2);
    CHECK(make_lbp_circle(1.5).reach == 2);
    CHECK_THROWS_AS(make_lbp_circle(0.0), InputError);

    Rng rng(3);
    for (double radius : {1.0, 1.5, 2.0}) {
        const Image g = fer::testing::random_image(21, 17, rng);
        const auto circle = make_lbp_circle(radius);
        const auto s = serial::lbp_code_map(g, circle);
        const auto o = omp::lbp_code_map(g, circle);
        CHECK(s == o);
        const int r = circle.reach;
        REQUIRE(s.size() == static_cast<std::size_t>((21 - 2 * r) * (17 - 2 * r)));
        for (int y = r; y < 17 - r; ++y)
            for (int x = r; x < 21 - r; ++x)
                CHECK(s[static_cast<std::size_t>((y - r) * (21 - 2 * r) + (x - r))] ==
                      fer::testing::brute_lbp(g, x, y, radius));
    }
    CHECK(serial::lbp_code_map(Image(3, 3, 1), make_lbp_circle(2.0)).empty());
}
