#pragma once

#include "fer/common.hpp"

#include <optional>
#include <span>
#include <vector>

namespace fer::classify {

/// Additive multinomial logistic model. Each LogitBoost round adds one
/// simple (single-attribute) regression per class; since every term is
/// linear the ensemble is kept in collapsed form F_j(x) = b_j + sum_a c_ja x_a.
struct LinearLogisticModel {
    std::size_t classes = 0;
    std::size_t dim = 0;
    std::size_t iterations = 0;  ///< rounds applied in total, warm start included
    Matrix coef;                 ///< classes x (dim + 1); last column is the bias

    static LinearLogisticModel zero(std::size_t classes, std::size_t dim);

    void scores(std::span<const double> x, std::span<double> out) const;
    [[nodiscard]] std::vector<double> probabilities(std::span<const double> x) const;
};

/// Softmax in place, max-shifted.
void softmax(std::span<double> scores);

/// Mean multinomial negative log-likelihood over the given rows.
double negative_log_likelihood(const LinearLogisticModel& m, const Matrix& x, std::span<const int> labels,
                               std::span<const std::size_t> rows);

/// Incremental LogitBoost on a row subset. Each round, per class j:
/// working response z = (y* - p) / max(p(1-p), 1e-10), weight w = p(1-p),
/// weighted least-squares fit of z on the single best attribute, then
/// F_j += (J-1)/J (f_j - mean_m f_m). A round whose full step would raise
/// the training NLL is step-halved until it does not.
class LogitBoost {
public:
    LogitBoost(const Matrix& x, std::span<const int> labels, std::vector<std::size_t> rows, std::size_t classes,
               const LinearLogisticModel* warm_start = nullptr);

    /// One boosting round; returns false once no step can lower the NLL.
    bool step();

    [[nodiscard]] const LinearLogisticModel& model() const { return model_; }
    [[nodiscard]] double nll() const { return nll_; }

private:
    double nll_of(const Matrix& f) const;

    const Matrix& x_;
    std::span<const int> labels_;
    std::vector<std::size_t> rows_;
    LinearLogisticModel model_;
    Matrix f_;  ///< rows_.size() x classes, current scores
    Eigen::MatrixXd xs_;  ///< rows_ of x, column-major, column means removed
    Eigen::MatrixXd xs2_;
    Eigen::VectorXd col_mean_;
    double nll_ = 0.0;
    bool stalled_ = false;
};

/// `iters` LogitBoost rounds over all rows of `x`, from `warm_start` or zero.
LinearLogisticModel logitboost_fit(const Matrix& x, std::span<const int> labels, std::size_t classes,
                                   std::size_t iters, const LinearLogisticModel* warm_start = nullptr);

/// Index of the largest entry; ties to the lowest index.
std::size_t argmax(std::span<const double> v);

}  // namespace fer::classify
