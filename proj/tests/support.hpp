#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include "fer/common.hpp"
#include "fer/image.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace fer::testing {

inline std::filesystem::path tmp_dir(const std::string& name) {
    const char* env = std::getenv("FER_TEST_TMP");
    std::filesystem::path base = env ? env : std::filesystem::temp_directory_path() / "fer_tests";
    auto dir = base / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(FER_FIXTURE_DIR) / rel; }

inline Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng) {
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
    return m;
}

inline Image random_image(int w, int h, Rng& rng) {
    Image img(w, h, 1);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.index(256));
    return img;
}

struct Labeled {
    Matrix x;
    std::vector<int> y;
};

/// Four unit-variance-scaled blobs at (+-1, +-1); label 1 iff x*y > 0.
inline Labeled xor_blobs(std::size_t n, double sd, Rng& rng) {
    Labeled d{Matrix(static_cast<Eigen::Index>(n), 2), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = (i % 2 == 0) ? 1.0 : -1.0;
        const double cy = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
        const auto r = static_cast<Eigen::Index>(i);
        d.x(r, 0) = cx + sd * rng.normal();
        d.x(r, 1) = cy + sd * rng.normal();
        d.y[i] = cx * cy > 0 ? 1 : 0;
    }
    return d;
}

/// Two 2D Gaussians with unit sd, means at x = -sep and x = +sep, so each
/// class mean lies `sep` sd from the separating line x = 0.
inline Labeled two_gaussians(std::size_t n, double sep, Rng& rng) {
    Labeled d{Matrix(static_cast<Eigen::Index>(n), 2), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 2);
        const auto r = static_cast<Eigen::Index>(i);
        d.x(r, 0) = (c == 0 ? -sep : sep) + rng.normal();
        d.x(r, 1) = rng.normal();
        d.y[i] = c;
    }
    return d;
}

/// k well-separated Gaussian classes in D dims.
inline Labeled gaussian_classes(std::size_t n, std::size_t dim, std::size_t classes, double spread, Rng& rng) {
    Matrix means(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = spread * rng.normal();
    Labeled d{Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim)), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<Eigen::Index>(i % classes);
        for (Eigen::Index k = 0; k < d.x.cols(); ++k)
            d.x(static_cast<Eigen::Index>(i), k) = means(c, k) + rng.normal();
        d.y[i] = static_cast<int>(c);
    }
    return d;
}

inline double accuracy(const std::vector<std::vector<double>>& probs, const std::vector<int>& y) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs[i].size(); ++j)
            if (probs[i][j] > probs[i][best]) best = j;
        ok += static_cast<int>(best) == y[i];
    }
    return 100.0 * static_cast<double>(ok) / static_cast<double>(y.size());
}

}  // namespace fer::testing
