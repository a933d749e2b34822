#pragma once

// Data-parallel inner loops. Every kernel has a straightforward serial
// reference in `serial::` and an OpenMP version in `omp::`; the two must
// agree bit-for-bit (each output element is computed by the same scalar
// code, only the loop distribution differs). Library code calls the
// unqualified dispatchers, which pick `omp::`.

#include "fer/common.hpp"
#include "fer/image.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace fer::kernels {

/// Neighbor lists: row i holds the k nearest column indices, nearest first,
/// ties broken by lower index.
struct KnnResult {
    std::size_t k = 0;
    std::vector<std::size_t> index;  // n * k
    std::vector<double> dist2;       // n * k, squared distances

    [[nodiscard]] std::size_t neighbor(std::size_t i, std::size_t j) const { return index[i * k + j]; }
    [[nodiscard]] double distance2(std::size_t i, std::size_t j) const { return dist2[i * k + j]; }
};

/// Sample offsets of the 8-neighbor LBP circle, p = 0..7 at angle 2*pi*p/8,
/// starting east and turning counter-clockwise on screen (north is -y).
/// Offsets within 1e-9 of an integer are snapped to it.
struct LbpCircle {
    std::array<double, 8> dx{};
    std::array<double, 8> dy{};
    int reach = 0;  ///< ceil(radius): margin of pixels that cannot be coded
};

LbpCircle make_lbp_circle(double radius);

/// LBP code of pixel (x, y). Interpolation runs on differences to the center
/// value, so uniform brightness shifts leave every bit unchanged and a flat
/// neighborhood yields exactly 0 (bit set).
std::uint8_t lbp_code_at(const Image& gray, int x, int y, const LbpCircle& circle);

namespace serial {
Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b);
KnnResult knn(const Matrix& dist2, std::size_t k, bool exclude_diagonal);
/// Codes for every codable pixel; row-major over the interior region
/// [reach, w-reach) x [reach, h-reach).
std::vector<std::uint8_t> lbp_code_map(const Image& gray, const LbpCircle& circle);
}  // namespace serial

namespace omp {
Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b);
KnnResult knn(const Matrix& dist2, std::size_t k, bool exclude_diagonal);
std::vector<std::uint8_t> lbp_code_map(const Image& gray, const LbpCircle& circle);
}  // namespace omp

inline Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b) { return omp::pairwise_sq_distances(a, b); }
inline KnnResult knn(const Matrix& dist2, std::size_t k, bool exclude_diagonal) {
    return omp::knn(dist2, k, exclude_diagonal);
}
inline std::vector<std::uint8_t> lbp_code_map(const Image& gray, const LbpCircle& circle) {
    return omp::lbp_code_map(gray, circle);
}

}  // namespace fer::kernels
