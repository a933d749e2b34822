#pragma once

#include "fer/common.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace fer::dimred {

enum class KernelKind : std::uint8_t { binary = 0, heat = 1 };

struct GraphKernel {
    KernelKind kind = KernelKind::heat;
    /// Heat-kernel width; <= 0 means "squared median kNN distance".
    double t = 0.0;
};

struct Edge {
    std::size_t to = 0;
    double weight = 0.0;
};

struct NeighborGraph {
    std::size_t n = 0;
    std::size_t knn_k = 0;
    GraphKernel kernel;  ///< t is resolved (positive) for heat kernels
    std::vector<std::vector<Edge>> adjacency;  ///< sorted by `to`, symmetric
    std::size_t repair_edges = 0;

    [[nodiscard]] double weight(std::size_t i, std::size_t j) const;
    [[nodiscard]] Matrix dense_weights() const;
    [[nodiscard]] std::size_t edge_count() const;
};

/// Symmetrized kNN graph (edge iff either endpoint is among the other's k
/// nearest). Disconnected components are joined through their closest
/// cross-component pair until the graph is connected; those bridge edges
/// weigh at least as much as the weakest kNN edge.
NeighborGraph knn_graph(const Matrix& points, std::size_t k, GraphKernel kernel = {});

/// Number of connected components.
std::size_t component_count(const NeighborGraph& g);

struct Embedding {
    Matrix training_points;        ///< n x D
    Matrix coords;                 ///< n x d
    std::vector<double> eigenvalues;  ///< d smallest non-trivial, ascending
    std::size_t knn_k = 0;
    GraphKernel kernel;            ///< resolved t
    std::size_t dim = 0;

    [[nodiscard]] std::size_t input_dim() const { return static_cast<std::size_t>(training_points.cols()); }
};

/// Solves L v = lambda D v (L = D - W) through the symmetric normalized
/// form, returning the d smallest non-trivial eigenvectors, D-normalized,
/// each signed so its first non-negligible component is positive.
Embedding eigenmap_fit(const NeighborGraph& graph, const Matrix& points, std::size_t d);

struct DimEstimate {
    double d_hat = 0.0;
    std::size_t d = 1;
    std::size_t k1 = 6;
    std::size_t k2 = 12;
    std::vector<double> per_point;  ///< mean over k of m_k(x_i)
};

/// Levina-Bickel maximum-likelihood intrinsic dimension averaged over
/// k in [k1, k2]. Zero distances (duplicate points) are skipped.
DimEstimate mle_intrinsic_dimension(const Matrix& points, std::size_t k1 = 6, std::size_t k2 = 12);

/// Per-point estimate m_k(x) from sorted neighbor distances T_1..T_k.
double mle_point_estimate(std::span<const double> sorted_distances, std::size_t k);

/// Stored coords for exact training matches; otherwise the kernel-weighted
/// mean of the coords of the knn_k nearest training points.
Vector embed_out_of_sample(const Embedding& emb, std::span<const double> x);
Matrix embed_out_of_sample(const Embedding& emb, const Matrix& xs);

struct ReductionOptions {
    std::size_t knn_k = 7;
    std::size_t mle_k1 = 6;
    std::size_t mle_k2 = 12;
    GraphKernel kernel;
    std::optional<std::size_t> dim_override;
};

struct PatchReduction {
    Embedding embedding;
    DimEstimate estimate;
};

/// One MLE estimate and one embedding per patch, fitted on the given rows.
std::map<PatchId, PatchReduction> fit_reduction_pipeline(const std::map<PatchId, Matrix>& per_patch,
                                                         const ReductionOptions& opts);

}  // namespace fer::dimred
