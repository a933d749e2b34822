#include "fer/mlp.hpp"

#include "fer/linear_logistic.hpp"

#include <cmath>
#include <string>

namespace fer::classify {

namespace {

Matrix standardize(const MlpModel& m, const Matrix& x) {
    Matrix z = x;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        z.row(r) = ((x.row(r).transpose() - m.input_mean).array() / m.input_scale.array()).transpose();
    }
    return z;
}

}  // namespace

MlpModel mlp_init(std::size_t inputs, std::size_t hidden, std::size_t classes, double init_scale, std::uint64_t seed) {
    if (inputs == 0 || hidden == 0 || classes < 2) throw InputError("mlp: invalid layer sizes");
    if (!(init_scale > 0.0)) throw InputError("mlp: weight_init_scale must be positive");
    MlpModel m;
    m.inputs = inputs;
    m.hidden = hidden;
    m.classes = classes;
    m.input_mean = Vector::Zero(static_cast<Eigen::Index>(inputs));
    m.input_scale = Vector::Ones(static_cast<Eigen::Index>(inputs));
    Rng rng(seed);
    m.w1.resize(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(inputs));
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = rng.uniform(-init_scale, init_scale);
    m.b1 = Vector::Zero(static_cast<Eigen::Index>(hidden));
    m.w2.resize(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(hidden));
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = rng.uniform(-init_scale, init_scale);
    m.b2 = Vector::Zero(static_cast<Eigen::Index>(classes));
    return m;
}

double mlp_loss_and_gradient(const MlpModel& m, const Matrix& x, std::span<const int> labels, MlpGradient* grad) {
    const Eigen::Index n = x.rows();
    if (n == 0) throw InputError("mlp: empty data");
    const Matrix z = standardize(m, x);
    // hidden activations: n x H
    Matrix h = (z * m.w1.transpose()).rowwise() + m.b1.transpose();
    h = h.array().tanh();
    Matrix out = (h * m.w2.transpose()).rowwise() + m.b2.transpose();

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::span<double> row(out.data() + i * out.cols(), static_cast<std::size_t>(out.cols()));
        softmax(row);
        const auto y = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
        loss -= std::log(std::max(row[y], 1e-300));
        row[y] -= 1.0;  // out now holds dL/dlogits (times n)
    }
    loss /= static_cast<double>(n);
    if (!grad) return loss;

    out /= static_cast<double>(n);
    grad->w2 = out.transpose() * h;
    grad->b2 = out.colwise().sum().transpose();
    Matrix dh = (out * m.w2).array() * (1.0 - h.array().square());
    grad->w1 = dh.transpose() * z;
    grad->b1 = dh.colwise().sum().transpose();
    return loss;
}

MlpModel mlp_train(const Matrix& x, std::span<const int> labels, std::size_t classes, const MlpConfig& cfg,
                   std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0) throw InputError("mlp_train: empty data");
    if (labels.size() != n) throw InputError("mlp_train: row/label count mismatch");
    if (!x.allFinite()) throw InputError("mlp_train: non-finite input");
    if (!(cfg.learning_rate > 0.0) || cfg.hidden == 0) throw InputError("mlp_train: invalid configuration");
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= classes) throw InputError("mlp_train: label out of range");
    }

    MlpModel m = mlp_init(static_cast<std::size_t>(x.cols()), cfg.hidden, classes, cfg.weight_init_scale, seed);
    m.input_mean = x.colwise().mean().transpose();
    m.input_scale.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double sd = std::sqrt((x.col(c).array() - m.input_mean(c)).square().mean());
        m.input_scale(c) = sd > 1e-12 ? sd : 1.0;
    }

    MlpGradient g;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double loss = mlp_loss_and_gradient(m, x, labels, &g);
        if (!std::isfinite(loss)) {
            throw NumericalError("mlp_train: loss diverged at epoch " + std::to_string(epoch));
        }
        m.w1 -= cfg.learning_rate * g.w1;
        m.b1 -= cfg.learning_rate * g.b1;
        m.w2 -= cfg.learning_rate * g.w2;
        m.b2 -= cfg.learning_rate * g.b2;
    }
    if (!m.w1.allFinite() || !m.w2.allFinite()) throw NumericalError("mlp_train: weights diverged");
    return m;
}

std::vector<double> mlp_predict(const MlpModel& m, std::span<const double> x) {
    if (x.size() != m.inputs) {
        throw InputError("mlp_predict: expected " + std::to_string(m.inputs) + " attributes, got " +
                         std::to_string(x.size()));
    }
    Vector z(static_cast<Eigen::Index>(m.inputs));
    for (std::size_t a = 0; a < m.inputs; ++a) {
        const auto i = static_cast<Eigen::Index>(a);
        z(i) = (x[a] - m.input_mean(i)) / m.input_scale(i);
    }
    const Vector h = (m.w1 * z + m.b1).array().tanh();
    const Vector o = m.w2 * h + m.b2;
    std::vector<double> p(o.data(), o.data() + o.size());
    softmax(p);
    return p;
}

}  // namespace fer::classify
