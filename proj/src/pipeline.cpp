#include "fer/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace fer {

std::string_view to_string(ReduceMode m) {
    switch (m) {
        case ReduceMode::off: return "off";
        case ReduceMode::eigenmaps: return "on";
        case ReduceMode::random_projection: return "random";
    }
    return "?";
}

ReduceMode parse_reduce_mode(std::string_view s) {
    if (s == "off") return ReduceMode::off;
    if (s == "on" || s == "eigenmaps") return ReduceMode::eigenmaps;
    if (s == "random") return ReduceMode::random_projection;
    throw InputError("unknown reduce mode '" + std::string(s) + "' (expected on, off or random)");
}

void normalize(PipelineOptions& opts) {
    if (opts.patches.empty()) throw InputError("no patches selected");
    std::sort(opts.patches.begin(), opts.patches.end());
    if (std::adjacent_find(opts.patches.begin(), opts.patches.end()) != opts.patches.end()) {
        throw InputError("patch listed twice");
    }
}

namespace {

Matrix take_rows(const Matrix& x, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Matrix random_projection(std::size_t in, std::size_t out, std::uint64_t seed) {
    Rng rng(seed);
    Matrix p(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
    const double s = 1.0 / std::sqrt(static_cast<double>(out));
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = s * rng.normal();
    return p;
}

Matrix apply(const PatchTransform& t, const Matrix& x) {
    switch (t.mode) {
        case ReduceMode::off: return x;
        case ReduceMode::eigenmaps: return dimred::embed_out_of_sample(*t.embedding, x);
        case ReduceMode::random_projection: return x * t.projection;
    }
    return x;
}

}  // namespace

PipelineModel fit_pipeline(const features::FeatureTable& table, std::span<const std::size_t> train_rows,
                           std::span<const int> labels, const std::vector<std::string>& label_names,
                           const PipelineOptions& options) {
    PipelineOptions opts = options;
    normalize(opts);
    if (train_rows.size() != labels.size()) throw InputError("fit_pipeline: row/label count mismatch");
    if (label_names.size() < 2) throw InputError("fit_pipeline: need at least two labels");

    PipelineModel model;
    model.options = opts;
    model.feature_kind = table.kind;
    model.label_names = label_names;

    std::map<PatchId, Matrix> train_parts;
    for (PatchId p : opts.patches) {
        const auto it = table.per_patch.find(p);
        if (it == table.per_patch.end()) {
            throw InputError("feature table lacks patch '" + std::string(fer::to_string(p)) + "'");
        }
        train_parts.emplace(p, take_rows(it->second, train_rows));
    }

    if (opts.reduce == ReduceMode::eigenmaps) {
        auto fitted = dimred::fit_reduction_pipeline(train_parts, opts.reduction);
        for (PatchId p : opts.patches) {
            auto& r = fitted.at(p);
            PatchTransform t;
            t.patch = p;
            t.mode = ReduceMode::eigenmaps;
            t.input_dim = r.embedding.input_dim();
            t.output_dim = r.embedding.dim;
            t.estimate = r.estimate;
            t.embedding = std::move(r.embedding);
            model.transforms.push_back(std::move(t));
        }
    } else {
        for (PatchId p : opts.patches) {
            const Matrix& part = train_parts.at(p);
            PatchTransform t;
            t.patch = p;
            t.mode = opts.reduce;
            t.input_dim = static_cast<std::size_t>(part.cols());
            t.output_dim = t.input_dim;
            if (opts.reduce == ReduceMode::random_projection) {
                auto est = dimred::mle_intrinsic_dimension(part, opts.reduction.mle_k1, opts.reduction.mle_k2);
                t.output_dim = opts.reduction.dim_override.value_or(est.d);
                t.estimate = std::move(est);
                t.projection = random_projection(t.input_dim, t.output_dim,
                                                 mix_seed(opts.train.seed, 100 + static_cast<std::uint64_t>(p)));
            }
            model.transforms.push_back(std::move(t));
        }
    }

    const Matrix x = transform_rows(model, table, train_rows);
    model.classifier =
        classify::train_classifier(opts.classifier, x, labels, label_names.size(), opts.train);
    return model;
}

Matrix transform_rows(const PipelineModel& model, const features::FeatureTable& table,
                      std::span<const std::size_t> rows) {
    std::size_t total = 0;
    for (const auto& t : model.transforms) total += t.output_dim;
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(total));
    Eigen::Index col = 0;
    for (const auto& t : model.transforms) {
        const auto it = table.per_patch.find(t.patch);
        if (it == table.per_patch.end()) {
            throw InputError("feature table lacks patch '" + std::string(fer::to_string(t.patch)) + "'");
        }
        if (static_cast<std::size_t>(it->second.cols()) != t.input_dim) {
            throw InputError("patch '" + std::string(fer::to_string(t.patch)) + "' has dimension " +
                             std::to_string(it->second.cols()) + ", model expects " + std::to_string(t.input_dim));
        }
        const Matrix reduced = apply(t, take_rows(it->second, rows));
        out.middleCols(col, reduced.cols()) = reduced;
        col += reduced.cols();
    }
    return out;
}

std::vector<std::vector<double>> predict_rows(const PipelineModel& model, const features::FeatureTable& table,
                                              std::span<const std::size_t> rows) {
    const Matrix x = transform_rows(model, table, rows);
    std::vector<std::vector<double>> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[i] = classify::predict_proba(
            model.classifier, std::span<const double>(x.data() + i * static_cast<std::size_t>(x.cols()),
                                                      static_cast<std::size_t>(x.cols())));
    }
    return out;
}

}  // namespace fer
