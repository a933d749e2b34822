#include "fer/lmt.hpp"

#include "fer/folds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fer::classify {

namespace {

Matrix take_rows(const Matrix& x, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

std::vector<int> take_labels(std::span<const int> labels, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(labels[r]);
    return out;
}

std::size_t predict_label(const LinearLogisticModel& m, const Matrix& x, std::size_t row, std::vector<double>& buf) {
    m.scores(std::span<const double>(x.data() + row * m.dim, m.dim), buf);
    return argmax(buf);
}

double entropy(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitChoice {
    int attribute = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

SplitChoice best_split(const Matrix& x, std::span<const int> labels, std::span<const std::size_t> rows,
                       std::size_t classes, std::size_t min_leaf) {
    const std::size_t n = rows.size();
    std::vector<std::size_t> total(classes, 0);
    for (std::size_t r : rows) ++total[static_cast<std::size_t>(labels[r])];
    const double parent_h = entropy(total, n);

    SplitChoice best;
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::vector<std::size_t> left(classes);
    std::vector<std::size_t> right(classes);
    for (Eigen::Index a = 0; a < x.cols(); ++a) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
            return x(static_cast<Eigen::Index>(p), a) < x(static_cast<Eigen::Index>(q), a);
        });
        std::fill(left.begin(), left.end(), 0);
        right = total;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto lab = static_cast<std::size_t>(labels[order[i]]);
            ++left[lab];
            --right[lab];
            const double v = x(static_cast<Eigen::Index>(order[i]), a);
            const double next = x(static_cast<Eigen::Index>(order[i + 1]), a);
            if (!(next > v)) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double child_h = (static_cast<double>(nl) * entropy(left, nl) + static_cast<double>(nr) * entropy(right, nr)) /
                                   static_cast<double>(n);
            const double gain = parent_h - child_h;
            if (gain > best.gain) {
                double thr = 0.5 * (v + next);
                if (!(thr < next)) thr = v;
                best = {static_cast<int>(a), thr, gain};
            }
        }
    }
    return best;
}

class Grower {
public:
    Grower(const Matrix& x, std::span<const int> labels, std::size_t classes, std::size_t iterations, const LmtConfig& cfg)
        : x_(x), labels_(labels), classes_(classes), iterations_(iterations), cfg_(cfg) {}

    LmtTree run() {
        std::vector<std::size_t> rows(static_cast<std::size_t>(x_.rows()));
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        build(rows, nullptr);
        return std::move(tree_);
    }

private:
    int build(const std::vector<std::size_t>& rows, const LinearLogisticModel* parent) {
        LogitBoost boost(x_, labels_, rows, classes_, parent);
        for (std::size_t t = 0; t < iterations_; ++t) boost.step();

        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        {
            LmtNode& node = tree_.nodes.back();
            node.model = boost.model();
            node.samples = rows.size();
            std::vector<double> buf(classes_);
            std::size_t errors = 0;
            for (std::size_t r : rows) {
                if (predict_label(node.model, x_, r, buf) != static_cast<std::size_t>(labels_[r])) ++errors;
            }
            node.train_error = static_cast<double>(errors);
        }

        if (rows.size() < cfg_.min_split) return id;
        const SplitChoice split = best_split(x_, labels_, rows, classes_, cfg_.min_leaf);
        if (split.attribute < 0 || !(split.gain > 1e-12)) return id;

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (std::size_t r : rows) {
            (x_(static_cast<Eigen::Index>(r), split.attribute) <= split.threshold ? left_rows : right_rows).push_back(r);
        }
        const LinearLogisticModel model = tree_.nodes[static_cast<std::size_t>(id)].model;
        const int l = build(left_rows, &model);
        const int r = build(right_rows, &model);
        LmtNode& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.attribute = split.attribute;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const Matrix& x_;
    std::span<const int> labels_;
    std::size_t classes_;
    std::size_t iterations_;
    const LmtConfig& cfg_;
    LmtTree tree_;
};

// Subtree statistics for weakest-link pruning.
struct LinkStats {
    std::vector<double> subtree_error;
    std::vector<std::size_t> leaves;
};

LinkStats link_stats(const std::vector<LmtNode>& nodes, const std::vector<char>& cut) {
    LinkStats s{std::vector<double>(nodes.size(), 0.0), std::vector<std::size_t>(nodes.size(), 0)};
    // preorder: children always follow their parent, so a reverse sweep is bottom-up
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const LmtNode& n = nodes[i];
        if (n.is_leaf() || cut[i]) {
            s.subtree_error[i] = n.train_error;
            s.leaves[i] = 1;
        } else {
            const auto l = static_cast<std::size_t>(n.left);
            const auto r = static_cast<std::size_t>(n.right);
            s.subtree_error[i] = s.subtree_error[l] + s.subtree_error[r];
            s.leaves[i] = s.leaves[l] + s.leaves[r];
        }
    }
    return s;
}

/// Nodes reachable from the root without passing through a cut node.
std::vector<char> live_internal(const std::vector<LmtNode>& nodes, const std::vector<char>& cut) {
    std::vector<char> live(nodes.size(), 0);
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        if (nodes[i].is_leaf() || cut[i]) continue;
        live[i] = 1;
        stack.push_back(static_cast<std::size_t>(nodes[i].left));
        stack.push_back(static_cast<std::size_t>(nodes[i].right));
    }
    return live;
}

double link_strength(const LmtNode& n, const LinkStats& s, std::size_t i) {
    return (n.train_error - s.subtree_error[i]) / static_cast<double>(s.leaves[i] - 1);
}

LmtTree compact(const std::vector<LmtNode>& nodes, const std::vector<char>& cut) {
    LmtTree out;
    std::function<int(std::size_t)> copy = [&](std::size_t i) -> int {
        const int id = static_cast<int>(out.nodes.size());
        out.nodes.push_back(nodes[i]);
        if (nodes[i].is_leaf() || cut[i]) {
            LmtNode& leaf = out.nodes.back();
            leaf.attribute = -1;
            leaf.left = leaf.right = -1;
            leaf.threshold = 0.0;
            return id;
        }
        const int l = copy(static_cast<std::size_t>(nodes[i].left));
        const int r = copy(static_cast<std::size_t>(nodes[i].right));
        out.nodes[static_cast<std::size_t>(id)].left = l;
        out.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    };
    if (!nodes.empty()) copy(0);
    return out;
}

constexpr double kAlphaSlack = 1e-9;

}  // namespace

std::size_t LmtTree::leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.is_leaf() ? 1 : 0;
    return n;
}

const LmtNode& LmtTree::route(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const LmtNode& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.attribute)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i];
}

std::size_t count_errors(const LmtTree& tree, const Matrix& x, std::span<const int> labels,
                         std::span<const std::size_t> rows) {
    std::size_t errors = 0;
    std::vector<double> buf;
    for (std::size_t r : rows) {
        const std::span<const double> row(x.data() + r * static_cast<std::size_t>(x.cols()), static_cast<std::size_t>(x.cols()));
        const LinearLogisticModel& m = tree.route(row).model;
        buf.resize(m.classes);
        m.scores(row, buf);
        if (argmax(buf) != static_cast<std::size_t>(labels[r])) ++errors;
    }
    return errors;
}

std::size_t select_boosting_iterations(const Matrix& x, std::span<const int> labels, std::size_t classes,
                                       const LmtConfig& cfg, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (cfg.max_iters == 0) return 0;
    const std::size_t folds = std::min(cfg.cv_folds, n);
    if (folds < 2) return cfg.max_iters;
    const auto assignment = stratified_assignment(std::vector<int>(labels.begin(), labels.end()), folds, seed);

    std::vector<LogitBoost> boosters;
    std::vector<std::vector<std::size_t>> tests(folds);
    boosters.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train;
        split_fold(assignment, f, train, tests[f]);
        boosters.emplace_back(x, labels, std::move(train), classes);
    }

    std::size_t best_t = 1;
    std::size_t best_err = std::numeric_limits<std::size_t>::max();
    double best_nll = std::numeric_limits<double>::infinity();
    std::vector<double> buf(classes);
    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        std::size_t err = 0;
        double nll = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            boosters[f].step();
            const auto& m = boosters[f].model();
            for (std::size_t r : tests[f]) {
                if (predict_label(m, x, r, buf) != static_cast<std::size_t>(labels[r])) ++err;
            }
            nll += negative_log_likelihood(m, x, labels, tests[f]) * static_cast<double>(tests[f].size());
        }
        if (err < best_err || (err == best_err && nll < best_nll)) {
            best_err = err;
            best_nll = nll;
            best_t = t;
        }
        if (t - best_t >= cfg.early_stop) break;
    }
    return best_t;
}

LmtTree grow_lmt_tree(const Matrix& x, std::span<const int> labels, std::size_t classes, std::size_t iterations,
                      const LmtConfig& cfg) {
    if (x.rows() == 0) throw InputError("cannot grow a tree on empty data");
    return Grower(x, labels, classes, iterations, cfg).run();
}

LmtTree prune_to_alpha(const LmtTree& tree, double alpha) {
    const auto& nodes = tree.nodes;
    std::vector<char> cut(nodes.size(), 0);
    while (true) {
        const LinkStats s = link_stats(nodes, cut);
        const auto live = live_internal(nodes, cut);
        double weakest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (live[i]) weakest = std::min(weakest, link_strength(nodes[i], s, i));
        }
        if (!(weakest <= alpha + kAlphaSlack)) break;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (live[i] && link_strength(nodes[i], s, i) <= weakest + kAlphaSlack) cut[i] = 1;
        }
    }
    return compact(nodes, cut);
}

std::vector<double> weakest_link_alphas(const LmtTree& tree) {
    std::vector<double> alphas;
    LmtTree current = tree;
    while (!current.nodes.empty() && !current.nodes.front().is_leaf()) {
        const std::vector<char> none(current.nodes.size(), 0);
        const LinkStats s = link_stats(current.nodes, none);
        double weakest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < current.nodes.size(); ++i) {
            if (!current.nodes[i].is_leaf()) weakest = std::min(weakest, link_strength(current.nodes[i], s, i));
        }
        if (!alphas.empty()) weakest = std::max(weakest, alphas.back());
        if (alphas.empty() || weakest > alphas.back() + kAlphaSlack) alphas.push_back(weakest);
        current = prune_to_alpha(current, weakest);
    }
    return alphas;
}

LmtTree cart_prune(const LmtTree& tree, const Matrix& x, std::span<const int> labels, const LmtConfig& cfg,
                   std::uint64_t seed, const TreeGrower& grow) {
    if (tree.nodes.size() <= 1) return tree;
    const std::vector<double> alphas = weakest_link_alphas(tree);

    // Candidate k covers [a_k, a_{k+1}); a_0 = 0 keeps all positive-strength links.
    std::vector<double> cand{0.0};
    for (double a : alphas) {
        if (a > cand.back() + kAlphaSlack) cand.push_back(a);
    }
    std::vector<double> rep(cand.size());
    for (std::size_t k = 0; k < cand.size(); ++k) {
        rep[k] = k + 1 < cand.size() ? std::sqrt(cand[k] * cand[k + 1]) : std::numeric_limits<double>::infinity();
    }

    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t folds = std::min(cfg.cv_folds, n);
    std::vector<std::size_t> cv_error(cand.size(), 0);
    if (folds >= 2) {
        const auto assignment = stratified_assignment(std::vector<int>(labels.begin(), labels.end()), folds, seed);
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
        for (std::size_t f = 0; f < folds; ++f) {
            split_fold(assignment, f, train, test);
            if (train.empty() || test.empty()) continue;
            const Matrix xt = take_rows(x, train);
            const std::vector<int> yt = take_labels(labels, train);
            const LmtTree fold_tree = grow(xt, yt);
            for (std::size_t k = 0; k < cand.size(); ++k) {
                const LmtTree pruned = std::isinf(rep[k]) ? compact(fold_tree.nodes, [&] {
                    std::vector<char> c(fold_tree.nodes.size(), 0);
                    c[0] = 1;
                    return c;
                }())
                                                          : prune_to_alpha(fold_tree, rep[k]);
                cv_error[k] += count_errors(pruned, x, labels, test);
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < cand.size(); ++k) {
        if (cv_error[k] <= cv_error[best]) best = k;
    }
    if (best + 1 == cand.size()) {
        std::vector<char> c(tree.nodes.size(), 0);
        c[0] = 1;
        return compact(tree.nodes, c);
    }
    return prune_to_alpha(tree, cand[best]);
}

LmtModel lmt_train(const Matrix& x, std::span<const int> labels, std::size_t classes, const LmtConfig& cfg,
                   std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0) throw InputError("lmt_train: empty data");
    if (n < 2) throw InputError("lmt_train: need at least two samples");
    if (labels.size() != n) throw InputError("lmt_train: row/label count mismatch");
    if (classes < 2) throw InputError("lmt_train: need at least two classes");
    if (!x.allFinite()) throw InputError("lmt_train: non-finite input");
    if (cfg.min_split < 1 || cfg.min_leaf < 1 || cfg.cv_folds < 2) throw InputError("lmt_train: invalid configuration");

    LmtModel model;
    model.config = cfg;
    model.classes = classes;
    model.dim = static_cast<std::size_t>(x.cols());
    model.seed = seed;
    model.boosting_iterations = select_boosting_iterations(x, labels, classes, cfg, mix_seed(seed, 0));
    model.tree = grow_lmt_tree(x, labels, classes, model.boosting_iterations, cfg);
    model.unpruned_leaves = model.tree.leaf_count();
    if (cfg.prune) {
        const std::size_t iters = model.boosting_iterations;
        model.tree = cart_prune(model.tree, x, labels, cfg, mix_seed(seed, 1),
                                [&](const Matrix& xs, std::span<const int> ys) {
                                    return grow_lmt_tree(xs, ys, classes, iters, cfg);
                                });
    }
    return model;
}

std::vector<double> lmt_predict(const LmtModel& model, std::span<const double> x) {
    if (x.size() != model.dim) {
        throw InputError("lmt_predict: expected " + std::to_string(model.dim) + " attributes, got " +
                         std::to_string(x.size()));
    }
    return model.tree.route(x).model.probabilities(x);
}

}  // namespace fer::classify
