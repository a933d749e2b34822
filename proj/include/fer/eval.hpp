#pragma once

#include "fer/data_io.hpp"
#include "fer/features.hpp"
#include "fer/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fer::eval {

struct FoldPlan {
    std::size_t k = 10;
    std::vector<std::size_t> assignment;  ///< fold of each sample, manifest order
    std::uint64_t seed = 1;
    bool stratified = true;
    bool group_by_actor = false;
};

/// Stratified k-fold plan; with `actor_ids`, all samples of one actor share
/// a fold (samples without an actor are their own group).
FoldPlan stratified_folds(const std::vector<int>& labels, const std::vector<std::optional<std::string>>* actor_ids,
                          std::size_t k, std::uint64_t seed);

struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::size_t>> counts;  ///< row = true, column = predicted
    std::vector<std::vector<double>> row_percent;  ///< NaN rows for classes absent from the data

    [[nodiscard]] std::size_t total() const;
    [[nodiscard]] std::size_t correct() const;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                 const std::vector<std::string>& label_names);

struct ExperimentConfig {
    std::string manifest_name;
    std::string features_name;
    PipelineOptions pipeline;
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    bool group_by_actor = false;
    bool record_timings = false;
};

struct FoldResult {
    std::size_t fold = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t correct = 0;
    std::vector<std::size_t> reduced_dims;      ///< per patch, canonical order
    std::vector<std::uint64_t> embedding_hashes;  ///< per patch; empty without eigenmaps
    double seconds = 0.0;

    [[nodiscard]] double accuracy() const;
};

struct Report {
    ExperimentConfig config;
    std::size_t samples = 0;
    FoldPlan plan;
    std::vector<FoldResult> folds;
    ConfusionMatrix confusion;
    std::vector<std::string> sample_ids;
    std::vector<int> truth;
    std::vector<int> predicted;
    double overall_accuracy = 0.0;  ///< percent
    double total_seconds = 0.0;
};

/// Per fold: reductions fitted on the training rows only, test rows projected
/// out of sample, classifier trained on the training rows, test rows
/// predicted. Fold f trains with seed mix_seed(cfg.seed, f + 1). Manifests that
/// break the single-peak rule are rejected.
Report run_experiment(const io::DatasetManifest& manifest, const features::FeatureTable& table,
                      const ExperimentConfig& cfg);

/// Fits the pipeline used by fold `fold` of `plan` (exposed for leakage checks).
PipelineModel fit_fold(const io::DatasetManifest& manifest, const features::FeatureTable& table,
                       const ExperimentConfig& cfg, const FoldPlan& plan, std::size_t fold);

enum class ReportFormat { markdown, csv, json_lines };

ReportFormat parse_report_format(std::string_view s);

std::string render_report(const Report& report, ReportFormat format);
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path);

/// Reads the confusion matrix back from a csv report.
ConfusionMatrix parse_confusion_csv(std::string_view text);

/// Rows of the feature table in manifest order; errors name missing samples.
features::FeatureTable table_for_manifest(const io::DatasetManifest& manifest,
                                          const std::vector<io::FeatureRecord>& records,
                                          const std::vector<PatchId>& patches);

}  // namespace fer::eval
