#pragma once

#include "fer/common.hpp"

#include <span>
#include <vector>

namespace fer::classify {

struct MlpConfig {
    std::size_t hidden = 64;
    std::size_t epochs = 1000;
    double learning_rate = 0.5;
    double weight_init_scale = 0.1;
};

/// One tanh hidden layer and a softmax output. Inputs are z-scored with the
/// training means/scales stored in the model.
struct MlpModel {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    std::size_t classes = 0;
    Vector input_mean;
    Vector input_scale;
    Matrix w1;  ///< hidden x inputs
    Vector b1;
    Matrix w2;  ///< classes x hidden
    Vector b2;
};

struct MlpGradient {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

/// Mean cross-entropy over all rows of `x` (raw, unstandardized inputs) and
/// its exact gradient with respect to every weight and bias.
double mlp_loss_and_gradient(const MlpModel& model, const Matrix& x, std::span<const int> labels, MlpGradient* grad);

/// Weights uniform in +-weight_init_scale from the seeded RNG, biases zero.
MlpModel mlp_init(std::size_t inputs, std::size_t hidden, std::size_t classes, double init_scale, std::uint64_t seed);

/// Full-batch gradient descent for cfg.epochs epochs.
MlpModel mlp_train(const Matrix& x, std::span<const int> labels, std::size_t classes, const MlpConfig& cfg,
                   std::uint64_t seed);

std::vector<double> mlp_predict(const MlpModel& model, std::span<const double> x);

}  // namespace fer::classify
