#include "fer/dimred.hpp"

#include "fer/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace fer::dimred {

namespace {

double kernel_weight(const GraphKernel& k, double dist2) {
    return k.kind == KernelKind::binary ? 1.0 : std::exp(-dist2 / k.t);
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

void check_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite input");
}

}  // namespace

double NeighborGraph::weight(std::size_t i, std::size_t j) const {
    const auto& row = adjacency.at(i);
    const auto it = std::lower_bound(row.begin(), row.end(), j, [](const Edge& e, std::size_t v) { return e.to < v; });
    return (it != row.end() && it->to == j) ? it->weight : 0.0;
}

Matrix NeighborGraph::dense_weights() const {
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (const Edge& e : adjacency[i]) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.to)) = e.weight;
    }
    return w;
}

std::size_t NeighborGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& row : adjacency) total += row.size();
    return total / 2;
}

NeighborGraph knn_graph(const Matrix& points, std::size_t k, GraphKernel kernel) {
    check_finite(points, "knn_graph");
    const auto n = static_cast<std::size_t>(points.rows());
    if (k < 1 || k >= n) {
        throw InputError("knn_graph: need 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    const Matrix dist2 = kernels::pairwise_sq_distances(points, points);
    const auto nn = kernels::knn(dist2, k, true);

    if (kernel.kind == KernelKind::heat && !(kernel.t > 0.0)) {
        std::vector<double> d;
        d.reserve(n * k);
        for (double v : nn.dist2) {
            if (v > 0.0) d.push_back(std::sqrt(v));
        }
        if (d.empty()) throw InputError("knn_graph: all neighbor distances are zero");
        const double m = median(std::move(d));
        kernel.t = m * m;
    }

    std::vector<std::set<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t v = nn.neighbor(i, j);
            nbrs[i].insert(v);
            nbrs[v].insert(i);
        }
    }

    NeighborGraph g;
    g.n = n;
    g.knn_k = k;
    g.kernel = kernel;

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v : nbrs[i]) uf.unite(i, v);
    }
    // Join components through their closest cross-component pair.
    std::set<std::pair<std::size_t, std::size_t>> repairs;
    while (true) {
        std::size_t bi = n;
        std::size_t bj = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ri = uf.find(i);
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = dist2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (d < best && uf.find(j) != ri) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi == n) break;
        nbrs[bi].insert(bj);
        nbrs[bj].insert(bi);
        repairs.emplace(bi, bj);
        uf.unite(bi, bj);
        ++g.repair_edges;
    }

    // Repair edges are floored at the weakest regular edge so a distant
    // bridge cannot underflow to zero and leave the graph disconnected.
    double floor_weight = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v : nbrs[i]) {
            if (repairs.contains({std::min(i, v), std::max(i, v)})) continue;
            floor_weight = std::min(
                floor_weight, kernel_weight(kernel, dist2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v))));
        }
    }
    g.adjacency.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.adjacency[i].reserve(nbrs[i].size());
        for (std::size_t v : nbrs[i]) {
            double w = kernel_weight(kernel, dist2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)));
            if (repairs.contains({std::min(i, v), std::max(i, v)})) w = std::max(w, floor_weight);
            g.adjacency[i].push_back({v, w});
        }
    }
    return g;
}

std::size_t component_count(const NeighborGraph& g) {
    UnionFind uf(g.n);
    std::size_t comps = g.n;
    for (std::size_t i = 0; i < g.n; ++i) {
        for (const Edge& e : g.adjacency[i]) {
            if (uf.unite(i, e.to)) --comps;
        }
    }
    return comps;
}

Embedding eigenmap_fit(const NeighborGraph& graph, const Matrix& points, std::size_t d) {
    const std::size_t n = graph.n;
    if (static_cast<std::size_t>(points.rows()) != n) throw InputError("eigenmap_fit: point count does not match graph");
    if (d < 1 || d >= n) {
        throw InputError("eigenmap_fit: need 1 <= d < n (d=" + std::to_string(d) + ", n=" + std::to_string(n) + ")");
    }
    if (component_count(graph) != 1) throw InputError("eigenmap_fit: graph is not connected");

    const Matrix w = graph.dense_weights();
    const Vector deg = w.rowwise().sum();
    if ((deg.array() <= 0.0).any()) throw NumericalError("eigenmap_fit: isolated vertex with zero degree");
    const Vector inv_sqrt = deg.array().rsqrt();

    // I - D^{-1/2} W D^{-1/2}; same spectrum as the pencil (L, D).
    Eigen::MatrixXd sym = -(inv_sqrt.asDiagonal() * Eigen::MatrixXd(w) * inv_sqrt.asDiagonal());
    sym.diagonal().array() += 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("eigenmap_fit: eigensolver did not converge");

    Embedding emb;
    emb.training_points = points;
    emb.knn_k = graph.knn_k;
    emb.kernel = graph.kernel;
    emb.dim = d;
    emb.coords.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    emb.eigenvalues.resize(d);

    const Eigen::MatrixXd lap = Eigen::MatrixXd(deg.asDiagonal()) - Eigen::MatrixXd(w);
    for (std::size_t c = 0; c < d; ++c) {
        const auto col = static_cast<Eigen::Index>(c + 1);
        const double lambda = solver.eigenvalues()(col);
        if (!(lambda > 1e-10)) {
            throw NumericalError("eigenmap_fit: non-trivial eigenvalue " + std::to_string(lambda) +
                                 " is not positive; graph is numerically disconnected");
        }
        Vector v = inv_sqrt.asDiagonal() * solver.eigenvectors().col(col);
        const double scale = v.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::abs(v(i)) > 1e-9 * scale) {
                if (v(i) < 0.0) v = -v;
                break;
            }
        }
        const double residual = (lap * v - lambda * deg.cwiseProduct(v)).norm() / v.norm();
        if (!(residual < 1e-6)) {
            throw NumericalError("eigenmap_fit: eigenpair residual " + std::to_string(residual) + " too large");
        }
        emb.eigenvalues[c] = lambda;
        emb.coords.col(static_cast<Eigen::Index>(c)) = v;
    }
    return emb;
}

double mle_point_estimate(std::span<const double> t, std::size_t k) {
    if (k < 2 || k > t.size()) throw InputError("mle_point_estimate: need 2 <= k <= neighbor count");
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) s += std::log(t[k - 1] / t[j]);
    s /= static_cast<double>(k - 1);
    if (!(s > 0.0)) throw NumericalError("mle_point_estimate: neighbor distances are all equal");
    return 1.0 / s;
}

DimEstimate mle_intrinsic_dimension(const Matrix& points, std::size_t k1, std::size_t k2) {
    check_finite(points, "mle_intrinsic_dimension");
    const auto n = static_cast<std::size_t>(points.rows());
    if (k1 < 2 || k2 < k1) throw InputError("mle_intrinsic_dimension: need 2 <= k1 <= k2");
    if (k2 >= n) {
        throw InputError("mle_intrinsic_dimension: k2=" + std::to_string(k2) + " must be below n=" + std::to_string(n));
    }
    const Matrix dist2 = kernels::pairwise_sq_distances(points, points);

    DimEstimate est;
    est.k1 = k1;
    est.k2 = k2;
    est.per_point.assign(n, 0.0);
    const std::size_t nk = k2 - k1 + 1;
    std::vector<double> by_k(n * nk, 0.0);
    bool degenerate = false;
    bool flat = false;

#pragma omp parallel for schedule(static) reduction(|| : degenerate, flat)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        std::vector<double> d;
        d.reserve(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dist2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (j != i && v > 0.0) d.push_back(v);
        }
        if (d.size() < k2) {
            degenerate = true;
            continue;
        }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k2), d.end());
        d.resize(k2);
        for (double& v : d) v = std::sqrt(v);
        double acc = 0.0;
        for (std::size_t k = k1; k <= k2; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j + 1 < k; ++j) s += std::log(d[k - 1] / d[j]);
            s /= static_cast<double>(k - 1);
            if (!(s > 0.0)) {
                flat = true;
                break;
            }
            by_k[i * nk + (k - k1)] = 1.0 / s;
            acc += 1.0 / s;
        }
        est.per_point[i] = acc / static_cast<double>(nk);
    }
    if (degenerate) {
        throw InputError("mle_intrinsic_dimension: too few distinct neighbors (duplicate or identical points)");
    }
    if (flat) throw NumericalError("mle_intrinsic_dimension: a point has all neighbor distances equal");

    double total = 0.0;
    for (std::size_t kk = 0; kk < nk; ++kk) {
        double mean_k = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_k += by_k[i * nk + kk];
        total += mean_k / static_cast<double>(n);
    }
    est.d_hat = total / static_cast<double>(nk);
    est.d = static_cast<std::size_t>(std::max(1.0, std::round(est.d_hat)));
    return est;
}

Vector embed_out_of_sample(const Embedding& emb, std::span<const double> x) {
    const auto n = static_cast<std::size_t>(emb.training_points.rows());
    if (x.size() != emb.input_dim()) {
        throw InputError("embed_out_of_sample: expected dimension " + std::to_string(emb.input_dim()) + ", got " +
                         std::to_string(x.size()));
    }
    std::vector<double> dist2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = emb.training_points.data() + i * emb.input_dim();
        double s = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) {
            const double diff = row[c] - x[c];
            s += diff * diff;
        }
        dist2[i] = s;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t k = std::min(emb.knn_k, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist2[a] < dist2[b] || (dist2[a] == dist2[b] && a < b); });
    if (std::sqrt(dist2[order[0]]) <= 1e-12) return emb.coords.row(static_cast<Eigen::Index>(order[0])).transpose();

    Vector acc = Vector::Zero(emb.coords.cols());
    double wsum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double w = kernel_weight(emb.kernel, dist2[order[j]]);
        acc += w * emb.coords.row(static_cast<Eigen::Index>(order[j])).transpose();
        wsum += w;
    }
    if (!(wsum > 0.0)) throw NumericalError("embed_out_of_sample: all kernel weights underflow to zero");
    return acc / wsum;
}

Matrix embed_out_of_sample(const Embedding& emb, const Matrix& xs) {
    if (static_cast<std::size_t>(xs.cols()) != emb.input_dim()) {
        throw InputError("embed_out_of_sample: expected dimension " + std::to_string(emb.input_dim()) + ", got " +
                         std::to_string(xs.cols()));
    }
    Matrix out(xs.rows(), static_cast<Eigen::Index>(emb.dim));
    std::string error;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        try {
            out.row(i) = embed_out_of_sample(emb, std::span<const double>(xs.data() + i * xs.cols(),
                                                                          static_cast<std::size_t>(xs.cols())))
                             .transpose();
        } catch (const std::exception& e) {
#pragma omp critical
            if (error.empty()) error = e.what();
        }
    }
    if (!error.empty()) throw NumericalError(error);
    return out;
}

std::map<PatchId, PatchReduction> fit_reduction_pipeline(const std::map<PatchId, Matrix>& per_patch,
                                                         const ReductionOptions& opts) {
    std::map<PatchId, PatchReduction> out;
    std::optional<Eigen::Index> rows;
    for (const auto& [patch, points] : per_patch) {
        if (rows && *rows != points.rows()) throw InputError("fit_reduction_pipeline: patches cover different samples");
        rows = points.rows();
    }
    for (const auto& [patch, points] : per_patch) {
        PatchReduction r;
        r.estimate = mle_intrinsic_dimension(points, opts.mle_k1, opts.mle_k2);
        const std::size_t d = opts.dim_override.value_or(r.estimate.d);
        const NeighborGraph g = knn_graph(points, opts.knn_k, opts.kernel);
        r.embedding = eigenmap_fit(g, points, d);
        out.emplace(patch, std::move(r));
    }
    return out;
}

}  // namespace fer::dimred
