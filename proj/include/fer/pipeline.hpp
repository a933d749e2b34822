#pragma once

#include "fer/classify.hpp"
#include "fer/dimred.hpp"
#include "fer/features.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fer {

enum class ReduceMode : std::uint8_t { off = 0, eigenmaps = 1, random_projection = 2 };

std::string_view to_string(ReduceMode m);
ReduceMode parse_reduce_mode(std::string_view s);

struct PipelineOptions {
    std::vector<PatchId> patches{kCanonicalPatches.begin(), kCanonicalPatches.end()};
    ReduceMode reduce = ReduceMode::eigenmaps;
    dimred::ReductionOptions reduction;
    classify::ClassifierKind classifier = classify::ClassifierKind::lmt;
    classify::TrainConfig train;
};

/// Sorts patches into canonical order and rejects duplicates.
void normalize(PipelineOptions& opts);

/// Fitted per-patch reduction: an eigenmap, a random projection, or identity.
struct PatchTransform {
    PatchId patch = PatchId::face;
    ReduceMode mode = ReduceMode::off;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::optional<dimred::Embedding> embedding;
    Matrix projection;  ///< input_dim x output_dim, random_projection only
    std::optional<dimred::DimEstimate> estimate;
};

struct PipelineModel {
    PipelineOptions options;
    FeatureKind feature_kind = FeatureKind::deep;
    std::vector<std::string> label_names;
    std::vector<PatchTransform> transforms;  ///< canonical patch order
    classify::Classifier classifier;
};

/// Fits per-patch reductions on the training rows of `table` only, then
/// trains the classifier on the concatenated reduced vectors.
PipelineModel fit_pipeline(const features::FeatureTable& table, std::span<const std::size_t> train_rows,
                           std::span<const int> labels, const std::vector<std::string>& label_names,
                           const PipelineOptions& opts);

/// Reduced, concatenated feature matrix for the given rows.
Matrix transform_rows(const PipelineModel& model, const features::FeatureTable& table,
                      std::span<const std::size_t> rows);

/// Label distribution per requested row.
std::vector<std::vector<double>> predict_rows(const PipelineModel& model, const features::FeatureTable& table,
                                              std::span<const std::size_t> rows);

}  // namespace fer
