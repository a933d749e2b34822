#include "fer/linear_logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fer::classify {

LinearLogisticModel LinearLogisticModel::zero(std::size_t classes, std::size_t dim) {
    LinearLogisticModel m;
    m.classes = classes;
    m.dim = dim;
    m.coef = Matrix::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim + 1));
    return m;
}

void LinearLogisticModel::scores(std::span<const double> x, std::span<double> out) const {
    for (std::size_t j = 0; j < classes; ++j) {
        const double* row = coef.data() + j * (dim + 1);
        double s = row[dim];
        for (std::size_t a = 0; a < dim; ++a) s += row[a] * x[a];
        out[j] = s;
    }
}

std::vector<double> LinearLogisticModel::probabilities(std::span<const double> x) const {
    if (x.size() != dim) {
        throw InputError("logistic model expects " + std::to_string(dim) + " attributes, got " + std::to_string(x.size()));
    }
    std::vector<double> p(classes);
    scores(x, p);
    softmax(p);
    return p;
}

void softmax(std::span<double> s) {
    const double mx = *std::max_element(s.begin(), s.end());
    double total = 0.0;
    for (double& v : s) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : s) v /= total;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

namespace {

double row_nll(std::span<const double> f, int label) {
    const double mx = *std::max_element(f.begin(), f.end());
    double total = 0.0;
    for (double v : f) total += std::exp(v - mx);
    return -(f[static_cast<std::size_t>(label)] - mx - std::log(total));
}

}  // namespace

double negative_log_likelihood(const LinearLogisticModel& m, const Matrix& x, std::span<const int> labels,
                               std::span<const std::size_t> rows) {
    std::vector<double> f(m.classes);
    double total = 0.0;
    for (std::size_t r : rows) {
        m.scores(std::span<const double>(x.data() + r * m.dim, m.dim), f);
        total += row_nll(f, labels[r]);
    }
    return rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
}

LogitBoost::LogitBoost(const Matrix& x, std::span<const int> labels, std::vector<std::size_t> rows,
                       std::size_t classes, const LinearLogisticModel* warm_start)
    : x_(x), labels_(labels), rows_(std::move(rows)) {
    if (classes < 2) throw InputError("LogitBoost needs at least 2 classes");
    const auto dim = static_cast<std::size_t>(x.cols());
    if (warm_start) {
        if (warm_start->classes != classes || warm_start->dim != dim) {
            throw InputError("LogitBoost warm start has the wrong shape");
        }
        model_ = *warm_start;
    } else {
        model_ = LinearLogisticModel::zero(classes, dim);
    }
    for (std::size_t r : rows_) {
        if (labels_[r] < 0 || static_cast<std::size_t>(labels_[r]) >= classes) {
            throw InputError("label " + std::to_string(labels_[r]) + " outside [0, " + std::to_string(classes) + ")");
        }
    }
    f_.resize(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(classes));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        model_.scores(std::span<const double>(x_.data() + rows_[i] * dim, dim),
                      std::span<double>(f_.data() + i * classes, classes));
    }
    nll_ = nll_of(f_);

    const auto n = static_cast<Eigen::Index>(rows_.size());
    const auto d = static_cast<Eigen::Index>(dim);
    xs_.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) xs_.row(i) = x_.row(static_cast<Eigen::Index>(rows_[static_cast<std::size_t>(i)]));
    col_mean_ = n > 0 ? Eigen::VectorXd(xs_.colwise().mean().transpose()) : Eigen::VectorXd::Zero(d);
    xs_.rowwise() -= col_mean_.transpose();
    xs2_ = xs_.array().square();
}

double LogitBoost::nll_of(const Matrix& f) const {
    const auto classes = static_cast<std::size_t>(f.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        total += row_nll(std::span<const double>(f.data() + i * classes, classes), labels_[rows_[i]]);
    }
    return rows_.empty() ? 0.0 : total / static_cast<double>(rows_.size());
}

bool LogitBoost::step() {
    const std::size_t n = rows_.size();
    const std::size_t classes = model_.classes;
    const std::size_t dim = model_.dim;
    if (stalled_ || n == 0) {
        ++model_.iterations;
        return false;
    }

    // Per-class simple regressions: f_j(x) = alpha_j + beta_j * x[attr_j].
    std::vector<double> alpha(classes, 0.0);
    std::vector<double> beta(classes, 0.0);
    std::vector<std::size_t> attr(classes, 0);
    Matrix prob = f_;
    for (std::size_t i = 0; i < n; ++i) softmax(std::span<double>(prob.data() + i * classes, classes));

    const auto N = static_cast<Eigen::Index>(n);
    const auto J = static_cast<Eigen::Index>(classes);
    Eigen::MatrixXd w(N, J);
    Eigen::MatrixXd wz(N, J);
    for (Eigen::Index i = 0; i < N; ++i) {
        const int label = labels_[rows_[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < J; ++j) {
            const double pj = prob(i, j);
            const double var = pj * (1.0 - pj);
            w(i, j) = var;
            wz(i, j) = var * ((label == static_cast<int>(j) ? 1.0 : 0.0) - pj) / std::max(var, 1e-10);
        }
    }
    // Weighted moments of every attribute for every class at once.
    const Eigen::MatrixXd sx = xs_.transpose() * w;
    const Eigen::MatrixXd sxx = xs2_.transpose() * w;
    const Eigen::MatrixXd sxz = xs_.transpose() * wz;

    for (Eigen::Index j = 0; j < J; ++j) {
        const double sw = w.col(j).sum();
        if (!(sw > 0.0)) continue;  // all probabilities saturated: f_j = 0
        const double swz = wz.col(j).sum();
        const double zbar = swz / sw;
        double szz = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            const double wi = w(i, j);
            if (wi > 0.0) {
                const double dz = wz(i, j) / wi - zbar;
                szz += wi * dz * dz;
            }
        }
        double best_sse = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < dim; ++a) {
            const auto ai = static_cast<Eigen::Index>(a);
            const double xbar = sx(ai, j) / sw;
            const double cxx = sxx(ai, j) - sx(ai, j) * xbar;
            const double cxz = sxz(ai, j) - sx(ai, j) * zbar;
            const double b = cxx > 1e-12 * sw ? cxz / cxx : 0.0;
            const double sse = szz - b * cxz;
            if (sse < best_sse) {
                best_sse = sse;
                attr[static_cast<std::size_t>(j)] = a;
                beta[static_cast<std::size_t>(j)] = b;
                alpha[static_cast<std::size_t>(j)] = zbar - b * (xbar + col_mean_(ai));
            }
        }
    }

    // Centered, damped update direction for the scores and coefficients.
    const double damp = static_cast<double>(classes - 1) / static_cast<double>(classes);
    Matrix delta(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(classes));
    std::vector<double> fx(classes);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t m = 0; m < classes; ++m) {
            fx[m] = alpha[m] + beta[m] * (xs_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(attr[m])) +
                                          col_mean_(static_cast<Eigen::Index>(attr[m])));
            mean += fx[m];
        }
        mean /= static_cast<double>(classes);
        for (std::size_t j = 0; j < classes; ++j) delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = damp * (fx[j] - mean);
    }

    double scale = 1.0;
    Matrix trial = f_ + delta;
    double trial_nll = nll_of(trial);
    int halvings = 0;
    while (!(trial_nll <= nll_) && halvings < 40) {
        scale *= 0.5;
        trial = f_ + scale * delta;
        trial_nll = nll_of(trial);
        ++halvings;
    }
    ++model_.iterations;
    if (!(trial_nll <= nll_) || !std::isfinite(trial_nll)) {
        stalled_ = true;
        return false;
    }
    f_ = std::move(trial);
    nll_ = trial_nll;

    const double inv_j = 1.0 / static_cast<double>(classes);
    for (std::size_t m = 0; m < classes; ++m) {
        for (std::size_t j = 0; j < classes; ++j) {
            const double c = scale * damp * ((j == m ? 1.0 : 0.0) - inv_j);
            model_.coef(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(attr[m])) += c * beta[m];
            model_.coef(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(dim)) += c * alpha[m];
        }
    }
    return true;
}

LinearLogisticModel logitboost_fit(const Matrix& x, std::span<const int> labels, std::size_t classes,
                                   std::size_t iters, const LinearLogisticModel* warm_start) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw InputError("logitboost_fit: row/label count mismatch");
    if (x.rows() == 0) throw InputError("logitboost_fit: empty data");
    std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    LogitBoost boost(x, labels, std::move(rows), classes, warm_start);
    for (std::size_t t = 0; t < iters; ++t) boost.step();
    return boost.model();
}

}  // namespace fer::classify
