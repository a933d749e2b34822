#pragma once

#include "fer/common.hpp"

#include <span>
#include <vector>

namespace fer::classify {

struct ForestConfig {
    std::size_t trees = 100;
    std::size_t mtry = 0;  ///< 0 = floor(sqrt(D))
    std::size_t min_leaf = 1;
};

struct ForestNode {
    int attribute = -1;  ///< -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  ///< leaf class frequencies (sums to 1)
};

struct DecisionTree {
    std::vector<ForestNode> nodes;  ///< preorder, root first

    [[nodiscard]] const std::vector<double>& predict(std::span<const double> x) const;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
    std::size_t mtry = 0;
    std::size_t min_leaf = 1;
    std::size_t classes = 0;
    std::size_t dim = 0;
};

enum class Execution { serial, parallel };

/// Bootstrap CART trees with Gini splits over `mtry` attributes drawn per
/// node. Tree i uses seed mix_seed(seed, i), so the parallel build matches
/// the serial one exactly.
ForestModel rf_train(const Matrix& x, std::span<const int> labels, std::size_t classes, const ForestConfig& cfg,
                     std::uint64_t seed, Execution exec = Execution::parallel);

/// Mean of the leaf class-frequency vectors.
std::vector<double> rf_predict(const ForestModel& model, std::span<const double> x);

}  // namespace fer::classify
