#include "fer/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fer::kernels {

namespace {

double row_sq_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    const double* pa = a.data() + i * a.cols();
    const double* pb = b.data() + j * b.cols();
    double s = 0.0;
    for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const double diff = pa[d] - pb[d];
        s += diff * diff;
    }
    return s;
}

void check_shapes(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw InputError("pairwise distances: column count mismatch");
}

void knn_row(const Matrix& dist2, std::size_t i, std::size_t k, bool exclude_diagonal, std::vector<std::size_t>& order,
             KnnResult& out) {
    const auto m = static_cast<std::size_t>(dist2.cols());
    order.resize(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (exclude_diagonal && i < m) order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    const double* row = dist2.data() + i * m;
    auto less = [row](std::size_t p, std::size_t q) { return row[p] < row[q] || (row[p] == row[q] && p < q); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), less);
    for (std::size_t j = 0; j < k; ++j) {
        out.index[i * k + j] = order[j];
        out.dist2[i * k + j] = row[order[j]];
    }
}

void check_knn(const Matrix& dist2, std::size_t k, bool exclude_diagonal) {
    const auto m = static_cast<std::size_t>(dist2.cols());
    const std::size_t avail = exclude_diagonal ? m - 1 : m;
    if (k < 1 || k > avail) throw InputError("knn: k must be in [1, " + std::to_string(avail) + "]");
}

std::size_t interior(int extent, int reach) { return extent > 2 * reach ? static_cast<std::size_t>(extent - 2 * reach) : 0; }

}  // namespace

LbpCircle make_lbp_circle(double radius) {
    if (!(radius > 0.0)) throw InputError("LBP radius must be positive");
    LbpCircle c;
    for (int p = 0; p < 8; ++p) {
        const double a = 2.0 * std::numbers::pi * p / 8.0;
        double dx = radius * std::cos(a);
        double dy = -radius * std::sin(a);
        if (std::abs(dx - std::round(dx)) < 1e-9) dx = std::round(dx);
        if (std::abs(dy - std::round(dy)) < 1e-9) dy = std::round(dy);
        c.dx[static_cast<std::size_t>(p)] = dx;
        c.dy[static_cast<std::size_t>(p)] = dy;
    }
    c.reach = static_cast<int>(std::ceil(radius - 1e-9));
    return c;
}

std::uint8_t lbp_code_at(const Image& gray, int x, int y, const LbpCircle& circle) {
    const double center = gray.at(x, y);
    unsigned code = 0;
    for (std::size_t p = 0; p < 8; ++p) {
        const double sx = x + circle.dx[p];
        const double sy = y + circle.dy[p];
        const int x0 = static_cast<int>(std::floor(sx));
        const int y0 = static_cast<int>(std::floor(sy));
        const double fx = sx - x0;
        const double fy = sy - y0;
        const int x1 = fx > 0.0 ? x0 + 1 : x0;
        const int y1 = fy > 0.0 ? y0 + 1 : y0;
        const double a = gray.at(x0, y0) - center;
        const double b = gray.at(x1, y0) - center;
        const double c = gray.at(x0, y1) - center;
        const double d = gray.at(x1, y1) - center;
        const double top = a + fx * (b - a);
        const double bottom = c + fx * (d - c);
        const double v = top + fy * (bottom - top);
        if (v >= 0.0) code |= 1u << p;
    }
    return static_cast<std::uint8_t>(code);
}

namespace serial {

Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b) {
    check_shapes(a, b);
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = row_sq_distance(a, i, b, j);
    }
    return out;
}

KnnResult knn(const Matrix& dist2, std::size_t k, bool exclude_diagonal) {
    check_knn(dist2, k, exclude_diagonal);
    const auto n = static_cast<std::size_t>(dist2.rows());
    KnnResult out{k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) knn_row(dist2, i, k, exclude_diagonal, order, out);
    return out;
}

std::vector<std::uint8_t> lbp_code_map(const Image& gray, const LbpCircle& circle) {
    const int r = circle.reach;
    const std::size_t w = interior(gray.width, r);
    const std::size_t h = interior(gray.height, r);
    std::vector<std::uint8_t> codes(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            codes[y * w + x] = lbp_code_at(gray, static_cast<int>(x) + r, static_cast<int>(y) + r, circle);
        }
    }
    return codes;
}

}  // namespace serial

namespace omp {

Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b) {
    check_shapes(a, b);
    Matrix out(a.rows(), b.rows());
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.rows();
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) out(i, j) = row_sq_distance(a, i, b, j);
    }
    return out;
}

KnnResult knn(const Matrix& dist2, std::size_t k, bool exclude_diagonal) {
    check_knn(dist2, k, exclude_diagonal);
    const auto n = static_cast<std::ptrdiff_t>(dist2.rows());
    KnnResult out{k, std::vector<std::size_t>(static_cast<std::size_t>(n) * k),
                  std::vector<double>(static_cast<std::size_t>(n) * k)};
#pragma omp parallel
    {
        std::vector<std::size_t> order;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            knn_row(dist2, static_cast<std::size_t>(i), k, exclude_diagonal, order, out);
        }
    }
    return out;
}

std::vector<std::uint8_t> lbp_code_map(const Image& gray, const LbpCircle& circle) {
    const int r = circle.reach;
    const std::size_t w = interior(gray.width, r);
    const auto h = static_cast<std::ptrdiff_t>(interior(gray.height, r));
    std::vector<std::uint8_t> codes(w * static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            codes[static_cast<std::size_t>(y) * w + x] =
                lbp_code_at(gray, static_cast<int>(x) + r, static_cast<int>(y) + r, circle);
        }
    }
    return codes;
}

}  // namespace omp

}  // namespace fer::kernels
