#pragma once

// Independent reference implementations used to check the library.

#include "fer/common.hpp"
#include "fer/dimred.hpp"
#include "fer/image.hpp"
#include "fer/mlp.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace fer::testing {

/// Full spectrum of the pencil (D - W, D), ascending, D-normalized vectors.
struct DenseSpectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline DenseSpectrum dense_generalized_spectrum(const Matrix& w) {
    const Eigen::MatrixXd wd = w;
    const Eigen::VectorXd deg = wd.rowwise().sum();
    const Eigen::MatrixXd dm = deg.asDiagonal();
    const Eigen::MatrixXd lap = dm - wd;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, dm);
    return {es.eigenvalues(), es.eigenvectors()};
}

/// Largest |a - s*b| over columns, s = +-1 chosen per column.
inline double max_dev_up_to_sign(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double worst = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double s = a.col(c).dot(b.col(c)) >= 0.0 ? 1.0 : -1.0;
        worst = std::max(worst, (a.col(c) - s * b.col(c)).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Per-pixel LBP written from the definition: P=8 samples on a circle of
/// radius R, bilinear interpolation of the neighborhood, s(v) = [v >= g_c].
inline std::uint8_t brute_lbp(const Image& g, int x, int y, double radius) {
    unsigned code = 0;
    for (int p = 0; p < 8; ++p) {
        const double a = 2.0 * std::numbers::pi * p / 8.0;
        double sx = x + radius * std::cos(a);
        double sy = y - radius * std::sin(a);
        if (std::abs(sx - std::round(sx)) < 1e-9) sx = std::round(sx);
        if (std::abs(sy - std::round(sy)) < 1e-9) sy = std::round(sy);
        const int x0 = static_cast<int>(std::floor(sx));
        const int y0 = static_cast<int>(std::floor(sy));
        const double fx = sx - x0;
        const double fy = sy - y0;
        auto px = [&](int xx, int yy) {
            if (xx >= g.width || yy >= g.height) return 0.0;  // weight is zero there
            return static_cast<double>(g.at(xx, yy)) - static_cast<double>(g.at(x, y));
        };
        const double v = (1 - fx) * (1 - fy) * px(x0, y0) + fx * (1 - fy) * (fx > 0 ? px(x0 + 1, y0) : 0.0) +
                         (1 - fx) * fy * (fy > 0 ? px(x0, y0 + 1) : 0.0) +
                         fx * fy * (fx > 0 && fy > 0 ? px(x0 + 1, y0 + 1) : 0.0);
        if (v >= 0.0) code |= 1u << p;
    }
    return static_cast<std::uint8_t>(code);
}

inline int circular_transitions(unsigned code) {
    int t = 0;
    for (int b = 0; b < 8; ++b) t += ((code >> b) & 1u) != ((code >> ((b + 1) % 8)) & 1u);
    return t;
}

/// Uniform codes get consecutive bins in ascending code order, the rest bin 58.
inline std::array<int, 256> brute_bins() {
    std::array<int, 256> bins{};
    int next = 0;
    for (unsigned c = 0; c < 256; ++c) bins[c] = circular_transitions(c) <= 2 ? next++ : -1;
    for (auto& b : bins)
        if (b < 0) b = next;
    return bins;
}

/// Integer grid counts by exhaustive coding of every pixel whose circle fits.
inline std::vector<std::uint32_t> brute_lbp_counts(const Image& g, double radius, int rows, int cols) {
    const int reach = static_cast<int>(std::ceil(radius - 1e-9));
    const auto bins = brute_bins();
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(rows * cols * 59), 0);
    for (int y = reach; y < g.height - reach; ++y) {
        for (int x = reach; x < g.width - reach; ++x) {
            int r = 0;
            while (static_cast<long>(r + 1) * g.height / rows <= y) ++r;
            int c = 0;
            while (static_cast<long>(c + 1) * g.width / cols <= x) ++c;
            ++counts[static_cast<std::size_t>((r * cols + c) * 59 + bins[brute_lbp(g, x, y, radius)])];
        }
    }
    return counts;
}

/// Largest relative error between the analytic MLP gradient and central
/// differences with step h, over every weight and bias.
inline double mlp_gradient_check(const classify::MlpModel& model, const Matrix& x, std::span<const int> y, double h) {
    classify::MlpGradient g;
    classify::mlp_loss_and_gradient(model, x, y, &g);
    double worst = 0.0;
    auto probe = [&](auto member_ptr, auto grad_ptr) {
        auto& analytic = g.*grad_ptr;
        for (Eigen::Index i = 0; i < analytic.size(); ++i) {
            classify::MlpModel plus = model;
            classify::MlpModel minus = model;
            (plus.*member_ptr).data()[i] += h;
            (minus.*member_ptr).data()[i] -= h;
            const double num = (classify::mlp_loss_and_gradient(plus, x, y, nullptr) -
                                classify::mlp_loss_and_gradient(minus, x, y, nullptr)) /
                               (2.0 * h);
            const double a = analytic.data()[i];
            const double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-6});
            worst = std::max(worst, rel);
        }
    };
    probe(&classify::MlpModel::w1, &classify::MlpGradient::w1);
    probe(&classify::MlpModel::b1, &classify::MlpGradient::b1);
    probe(&classify::MlpModel::w2, &classify::MlpGradient::w2);
    probe(&classify::MlpModel::b2, &classify::MlpGradient::b2);
    return worst;
}

}  // namespace fer::testing
