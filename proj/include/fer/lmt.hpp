#pragma once

#include "fer/common.hpp"
#include "fer/linear_logistic.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fer::classify {

struct LmtConfig {
    std::size_t min_split = 15;  ///< nodes with fewer samples become leaves
    std::size_t min_leaf = 2;
    std::size_t max_iters = 200;
    std::size_t cv_folds = 5;  ///< folds for the boosting-iteration and pruning CV
    std::size_t early_stop = 50;  ///< stop the iteration CV after this many rounds without improvement
    bool prune = true;
};

/// Tree node; every node, internal or leaf, carries its own logistic model.
struct LmtNode {
    LinearLogisticModel model;
    int attribute = -1;  ///< -1 for leaves
    double threshold = 0.0;  ///< x[attribute] <= threshold goes left
    int left = -1;
    int right = -1;
    std::size_t samples = 0;
    double train_error = 0.0;  ///< misclassified training samples of this node's model

    [[nodiscard]] bool is_leaf() const { return attribute < 0; }
};

/// Nodes in preorder; node 0 is the root.
struct LmtTree {
    std::vector<LmtNode> nodes;

    [[nodiscard]] std::size_t leaf_count() const;
    [[nodiscard]] const LmtNode& route(std::span<const double> x) const;
};

struct LmtModel {
    LmtTree tree;
    LmtConfig config;
    std::size_t classes = 0;
    std::size_t dim = 0;
    std::size_t boosting_iterations = 0;  ///< chosen by cross-validation at the root
    std::size_t unpruned_leaves = 0;
    std::uint64_t seed = 0;
};

/// Boosting-round count minimizing cross-validated misclassifications over
/// 1..max_iters; ties go to lower held-out NLL, then to fewer rounds.
std::size_t select_boosting_iterations(const Matrix& x, std::span<const int> labels, std::size_t classes,
                                       const LmtConfig& cfg, std::uint64_t seed);

/// Grows an unpruned tree: root model from `iterations` rounds, children
/// warm-started from their parent and refined by `iterations` more rounds on
/// their own rows; splits maximize information gain.
LmtTree grow_lmt_tree(const Matrix& x, std::span<const int> labels, std::size_t classes, std::size_t iterations,
                      const LmtConfig& cfg);

/// Distinct weakest-link alphas of the nested subtree sequence, ascending.
/// Pruning at the last one collapses the tree to its root.
std::vector<double> weakest_link_alphas(const LmtTree& tree);

/// Repeatedly cuts every internal node whose link strength
/// (R(t) - R(T_t)) / (|leaves(T_t)| - 1) is <= alpha.
LmtTree prune_to_alpha(const LmtTree& tree, double alpha);

using TreeGrower = std::function<LmtTree(const Matrix& x, std::span<const int> labels)>;

/// Cost-complexity pruning: the candidate alphas of `tree` are scored by
/// regrowing trees on cv_folds training splits and pruning each at the
/// geometric midpoint of the candidate's alpha interval; the alpha with the
/// fewest CV misclassifications wins, ties to the smaller tree.
LmtTree cart_prune(const LmtTree& tree, const Matrix& x, std::span<const int> labels, const LmtConfig& cfg,
                   std::uint64_t seed, const TreeGrower& grow);

LmtModel lmt_train(const Matrix& x, std::span<const int> labels, std::size_t classes, const LmtConfig& cfg,
                   std::uint64_t seed);

std::vector<double> lmt_predict(const LmtModel& model, std::span<const double> x);

std::size_t count_errors(const LmtTree& tree, const Matrix& x, std::span<const int> labels,
                         std::span<const std::size_t> rows);

}  // namespace fer::classify
