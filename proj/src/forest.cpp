#include "fer/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fer::classify {

namespace {

double gini(std::span<const double> counts, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += c * c;
    return 1.0 - s / (total * total);
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const int> labels, std::size_t classes, std::size_t mtry,
                std::size_t min_leaf, std::uint64_t seed)
        : x_(x), labels_(labels), classes_(classes), mtry_(mtry), min_leaf_(min_leaf), rng_(seed) {}

    DecisionTree build() {
        const auto n = static_cast<std::size_t>(x_.rows());
        std::vector<std::size_t> sample(n);
        for (std::size_t i = 0; i < n; ++i) sample[i] = rng_.index(n);
        std::sort(sample.begin(), sample.end());
        grow(sample);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t>& rows) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        std::vector<double> counts(classes_, 0.0);
        for (std::size_t r : rows) counts[static_cast<std::size_t>(labels_[r])] += 1.0;
        const auto total = static_cast<double>(rows.size());
        const double parent = gini(counts, total);

        int best_attr = -1;
        double best_thr = 0.0;
        double best_gain = 0.0;
        if (parent > 0.0 && rows.size() >= 2 * min_leaf_) {
            const auto dim = static_cast<std::size_t>(x_.cols());
            std::vector<std::size_t> attrs(dim);
            std::iota(attrs.begin(), attrs.end(), std::size_t{0});
            for (std::size_t i = 0; i < mtry_; ++i) std::swap(attrs[i], attrs[i + rng_.index(dim - i)]);
            attrs.resize(mtry_);
            std::sort(attrs.begin(), attrs.end());

            std::vector<std::size_t> order(rows);
            std::vector<double> left(classes_);
            std::vector<double> right(classes_);
            for (std::size_t a : attrs) {
                const auto col = static_cast<Eigen::Index>(a);
                std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
                    return x_(static_cast<Eigen::Index>(p), col) < x_(static_cast<Eigen::Index>(q), col);
                });
                std::fill(left.begin(), left.end(), 0.0);
                right = counts;
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    const auto lab = static_cast<std::size_t>(labels_[order[i]]);
                    left[lab] += 1.0;
                    right[lab] -= 1.0;
                    const double v = x_(static_cast<Eigen::Index>(order[i]), col);
                    const double next = x_(static_cast<Eigen::Index>(order[i + 1]), col);
                    if (!(next > v)) continue;
                    const auto nl = static_cast<double>(i + 1);
                    const double nr = total - nl;
                    if (i + 1 < min_leaf_ || order.size() - (i + 1) < min_leaf_) continue;
                    const double gain = parent - (nl * gini(left, nl) + nr * gini(right, nr)) / total;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_attr = static_cast<int>(a);
                        best_thr = 0.5 * (v + next);
                        if (!(best_thr < next)) best_thr = v;
                    }
                }
            }
        }

        if (best_attr < 0 || !(best_gain > 1e-12)) {
            for (double& c : counts) c /= total;
            tree_.nodes[static_cast<std::size_t>(id)].distribution = std::move(counts);
            return id;
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (std::size_t r : rows) {
            (x_(static_cast<Eigen::Index>(r), best_attr) <= best_thr ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(left_rows);
        const int r = grow(right_rows);
        ForestNode& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.attribute = best_attr;
        node.threshold = best_thr;
        node.left = l;
        node.right = r;
        return id;
    }

    const Matrix& x_;
    std::span<const int> labels_;
    std::size_t classes_;
    std::size_t mtry_;
    std::size_t min_leaf_;
    Rng rng_;
    DecisionTree tree_;
};

}  // namespace

const std::vector<double>& DecisionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].attribute >= 0) {
        const ForestNode& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.attribute)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].distribution;
}

ForestModel rf_train(const Matrix& x, std::span<const int> labels, std::size_t classes, const ForestConfig& cfg,
                     std::uint64_t seed, Execution exec) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto dim = static_cast<std::size_t>(x.cols());
    if (n == 0) throw InputError("rf_train: empty data");
    if (n < 2) throw InputError("rf_train: need at least two samples");
    if (labels.size() != n) throw InputError("rf_train: row/label count mismatch");
    if (dim == 0) throw InputError("rf_train: zero-dimensional data");
    if (cfg.trees < 1 || cfg.min_leaf < 1) throw InputError("rf_train: trees and min_leaf must be positive");
    if (!x.allFinite()) throw InputError("rf_train: non-finite input");
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= classes) throw InputError("rf_train: label out of range");
    }

    ForestModel model;
    model.classes = classes;
    model.dim = dim;
    model.min_leaf = cfg.min_leaf;
    model.mtry = cfg.mtry == 0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dim)))))
                               : std::min(cfg.mtry, dim);
    model.trees.resize(cfg.trees);
    model.tree_seeds.resize(cfg.trees);
    for (std::size_t t = 0; t < cfg.trees; ++t) model.tree_seeds[t] = mix_seed(seed, t);

    const auto count = static_cast<std::ptrdiff_t>(cfg.trees);
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t t = 0; t < count; ++t) {
            const auto i = static_cast<std::size_t>(t);
            model.trees[i] = TreeBuilder(x, labels, classes, model.mtry, cfg.min_leaf, model.tree_seeds[i]).build();
        }
    } else {
        for (std::ptrdiff_t t = 0; t < count; ++t) {
            const auto i = static_cast<std::size_t>(t);
            model.trees[i] = TreeBuilder(x, labels, classes, model.mtry, cfg.min_leaf, model.tree_seeds[i]).build();
        }
    }
    return model;
}

std::vector<double> rf_predict(const ForestModel& model, std::span<const double> x) {
    if (x.size() != model.dim) {
        throw InputError("rf_predict: expected " + std::to_string(model.dim) + " attributes, got " +
                         std::to_string(x.size()));
    }
    std::vector<double> out(model.classes, 0.0);
    for (const auto& tree : model.trees) {
        const auto& d = tree.predict(x);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += d[j];
    }
    for (double& v : out) v /= static_cast<double>(model.trees.size());
    return out;
}

}  // namespace fer::classify
