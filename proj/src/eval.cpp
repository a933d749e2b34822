#include "fer/eval.hpp"

#include "fer/folds.hpp"
#include "fer/model_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>

namespace fer::eval {

using nlohmann::json;

FoldPlan stratified_folds(const std::vector<int>& labels, const std::vector<std::optional<std::string>>* actor_ids,
                          std::size_t k, std::uint64_t seed) {
    if (labels.empty()) throw InputError("no samples to split into folds");
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.group_by_actor = actor_ids != nullptr;
    plan.assignment = stratified_assignment(labels, k, seed, actor_ids);
    return plan;
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto& row : counts) {
        for (auto c : row) t += c;
    }
    return t;
}

std::size_t ConfusionMatrix::correct() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                 const std::vector<std::string>& label_names) {
    if (truth.size() != predicted.size()) throw InputError("confusion_matrix: label sequences differ in length");
    const std::size_t J = label_names.size();
    ConfusionMatrix cm;
    cm.labels = label_names;
    cm.counts.assign(J, std::vector<std::size_t>(J, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = predicted[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= J || static_cast<std::size_t>(p) >= J) {
            throw InputError("confusion_matrix: label index out of range at position " + std::to_string(i));
        }
        ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    cm.row_percent.assign(J, std::vector<double>(J, std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t i = 0; i < J; ++i) {
        std::size_t sum = 0;
        for (auto c : cm.counts[i]) sum += c;
        if (sum == 0) continue;
        for (std::size_t j = 0; j < J; ++j) {
            cm.row_percent[i][j] = 100.0 * static_cast<double>(cm.counts[i][j]) / static_cast<double>(sum);
        }
    }
    return cm;
}

double FoldResult::accuracy() const {
    return test_size ? 100.0 * static_cast<double>(correct) / static_cast<double>(test_size) : 0.0;
}

features::FeatureTable table_for_manifest(const io::DatasetManifest& manifest,
                                          const std::vector<io::FeatureRecord>& records,
                                          const std::vector<PatchId>& patches) {
    std::vector<std::string> ids;
    ids.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) ids.push_back(e.sample_id);
    return features::assemble_features(records, ids, patches);
}

namespace {

std::vector<int> labels_of(const io::DatasetManifest& m) {
    std::vector<int> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) out.push_back(e.label);
    return out;
}

std::vector<std::optional<std::string>> actors_of(const io::DatasetManifest& m) {
    std::vector<std::optional<std::string>> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) out.push_back(e.actor_id);
    return out;
}

void check_table(const io::DatasetManifest& manifest, const features::FeatureTable& table) {
    if (table.sample_ids.size() != manifest.entries.size()) {
        throw InputError("feature table has " + std::to_string(table.sample_ids.size()) + " samples, manifest has " +
                         std::to_string(manifest.entries.size()));
    }
    for (std::size_t i = 0; i < table.sample_ids.size(); ++i) {
        if (table.sample_ids[i] != manifest.entries[i].sample_id) {
            throw InputError("feature table row " + std::to_string(i) + " is '" + table.sample_ids[i] +
                             "', manifest has '" + manifest.entries[i].sample_id + "'");
        }
    }
}

PipelineOptions fold_options(const ExperimentConfig& cfg, std::size_t fold) {
    PipelineOptions o = cfg.pipeline;
    o.train.seed = mix_seed(cfg.seed, fold + 1);
    return o;
}

FoldPlan plan_for(const io::DatasetManifest& manifest, const ExperimentConfig& cfg) {
    const auto labels = labels_of(manifest);
    if (cfg.group_by_actor) {
        const auto actors = actors_of(manifest);
        return stratified_folds(labels, &actors, cfg.folds, cfg.seed);
    }
    return stratified_folds(labels, nullptr, cfg.folds, cfg.seed);
}

}  // namespace

PipelineModel fit_fold(const io::DatasetManifest& manifest, const features::FeatureTable& table,
                       const ExperimentConfig& cfg, const FoldPlan& plan, std::size_t fold) {
    check_table(manifest, table);
    std::vector<std::size_t> train, test;
    split_fold(plan.assignment, fold, train, test);
    std::vector<int> y;
    y.reserve(train.size());
    for (auto r : train) y.push_back(manifest.entries[r].label);
    return fit_pipeline(table, train, y, manifest.label_names, fold_options(cfg, fold));
}

Report run_experiment(const io::DatasetManifest& manifest, const features::FeatureTable& table,
                      const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    io::check_single_peak(manifest);
    check_table(manifest, table);
    for (PatchId p : cfg.pipeline.patches) {
        if (!table.per_patch.contains(p)) {
            throw InputError("feature table lacks patch '" + std::string(to_string(p)) + "'");
        }
    }

    Report rep;
    rep.config = cfg;
    normalize(rep.config.pipeline);
    rep.samples = manifest.entries.size();
    rep.plan = plan_for(manifest, cfg);

    const std::size_t n = manifest.entries.size();
    std::vector<int> predicted(n, -1);
    std::vector<FoldResult> results(cfg.folds);
    std::vector<std::exception_ptr> errors(cfg.folds);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t f = 0; f < cfg.folds; ++f) {
        try {
            const auto t0 = clock::now();
            std::vector<std::size_t> train, test;
            split_fold(rep.plan.assignment, f, train, test);
            const PipelineModel model = fit_fold(manifest, table, rep.config, rep.plan, f);
            const auto probs = predict_rows(model, table, test);
            FoldResult& r = results[f];
            r.fold = f;
            r.train_size = train.size();
            r.test_size = test.size();
            for (std::size_t i = 0; i < test.size(); ++i) {
                const int p = static_cast<int>(classify::argmax(probs[i]));
                predicted[test[i]] = p;
                if (p == manifest.entries[test[i]].label) ++r.correct;
            }
            for (const auto& t : model.transforms) {
                r.reduced_dims.push_back(t.output_dim);
                if (t.embedding) r.embedding_hashes.push_back(io::embedding_hash(*t.embedding));
            }
            r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        } catch (...) {
            errors[f] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    rep.folds = std::move(results);
    rep.truth = labels_of(manifest);
    rep.predicted = std::move(predicted);
    for (const auto& e : manifest.entries) rep.sample_ids.push_back(e.sample_id);
    rep.confusion = confusion_matrix(rep.truth, rep.predicted, manifest.label_names);
    rep.overall_accuracy = 100.0 * static_cast<double>(rep.confusion.correct()) / static_cast<double>(n);
    rep.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
    return rep;
}

ReportFormat parse_report_format(std::string_view s) {
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "csv") return ReportFormat::csv;
    if (s == "json-lines" || s == "jsonl") return ReportFormat::json_lines;
    throw InputError("unknown report format '" + std::string(s) + "' (expected markdown, csv or json-lines)");
}

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
    return out;
}

std::string dims_text(const std::vector<std::size_t>& dims) {
    std::vector<std::string> parts;
    for (auto d : dims) parts.push_back(std::to_string(d));
    return join(parts, ",");
}

/// Every setting that influenced the run, defaults included, as (key, value).
std::vector<std::pair<std::string, std::string>> config_echo(const Report& r) {
    const auto& c = r.config;
    const auto& p = c.pipeline;
    std::vector<std::string> patches;
    for (PatchId id : p.patches) patches.emplace_back(to_string(id));
    std::vector<std::pair<std::string, std::string>> kv = {
        {"manifest", c.manifest_name},
        {"features", c.features_name},
        {"samples", std::to_string(r.samples)},
        {"patches", join(patches, ",")},
        {"reduce", std::string(to_string(p.reduce))},
        {"dim", p.reduction.dim_override ? std::to_string(*p.reduction.dim_override) : "auto"},
        {"knn", std::to_string(p.reduction.knn_k)},
        {"k_range", std::to_string(p.reduction.mle_k1) + "," + std::to_string(p.reduction.mle_k2)},
        {"kernel", p.reduction.kernel.kind == dimred::KernelKind::heat
                       ? (p.reduction.kernel.t > 0 ? "heat t=" + fmt("%g", p.reduction.kernel.t) : "heat t=auto")
                       : "binary"},
        {"classifier", std::string(classify::to_string(p.classifier))},
    };
    switch (p.classifier) {
        case classify::ClassifierKind::lmt:
            kv.emplace_back("lmt_min_split", std::to_string(p.train.lmt.min_split));
            kv.emplace_back("lmt_min_leaf", std::to_string(p.train.lmt.min_leaf));
            kv.emplace_back("lmt_max_iters", std::to_string(p.train.lmt.max_iters));
            kv.emplace_back("lmt_cv_folds", std::to_string(p.train.lmt.cv_folds));
            kv.emplace_back("lmt_early_stop", std::to_string(p.train.lmt.early_stop));
            kv.emplace_back("lmt_prune", p.train.lmt.prune ? "on" : "off");
            break;
        case classify::ClassifierKind::rf:
            kv.emplace_back("rf_trees", std::to_string(p.train.rf.trees));
            kv.emplace_back("rf_mtry", p.train.rf.mtry ? std::to_string(p.train.rf.mtry) : "auto");
            kv.emplace_back("rf_min_leaf", std::to_string(p.train.rf.min_leaf));
            break;
        case classify::ClassifierKind::mlp:
            kv.emplace_back("mlp_hidden", std::to_string(p.train.mlp.hidden));
            kv.emplace_back("mlp_epochs", std::to_string(p.train.mlp.epochs));
            kv.emplace_back("mlp_learning_rate", fmt("%g", p.train.mlp.learning_rate));
            kv.emplace_back("mlp_init_scale", fmt("%g", p.train.mlp.weight_init_scale));
            break;
    }
    kv.emplace_back("folds", std::to_string(c.folds));
    kv.emplace_back("stratified", r.plan.stratified ? "on" : "off");
    kv.emplace_back("group_by_actor", c.group_by_actor ? "on" : "off");
    kv.emplace_back("seed", std::to_string(c.seed));
    return kv;
}

std::string percent_cell(double v) { return std::isnan(v) ? "-" : fmt("%.1f", v); }

std::string render_markdown(const Report& r) {
    std::ostringstream os;
    os << "# Expression recognition report\n\n";
    os << "| setting | value |\n|---|---|\n";
    for (const auto& [k, v] : config_echo(r)) os << "| " << k << " | " << v << " |\n";

    os << "\n## Accuracy\n\n";
    os << "Overall accuracy: " << fmt("%.1f", r.overall_accuracy) << "% (" << r.confusion.correct() << "/"
       << r.confusion.total() << ")\n\n";
    os << "| fold | train | test | accuracy | dims |";
    if (r.config.record_timings) os << " seconds |";
    os << "\n|---|---|---|---|---|";
    if (r.config.record_timings) os << "---|";
    os << "\n";
    for (const auto& f : r.folds) {
        os << "| " << f.fold << " | " << f.train_size << " | " << f.test_size << " | " << fmt("%.1f", f.accuracy())
           << " | " << dims_text(f.reduced_dims) << " |";
        if (r.config.record_timings) os << " " << fmt("%.3f", f.seconds) << " |";
        os << "\n";
    }
    if (r.config.record_timings) os << "\nTotal time: " << fmt("%.3f", r.total_seconds) << " s\n";

    const auto& cm = r.confusion;
    os << "\n## Confusion matrix (%)\n\n";
    os << "|    |";
    for (const auto& l : cm.labels) os << " " << l << " |";
    os << "\n|---|";
    for (std::size_t j = 0; j < cm.labels.size(); ++j) os << "---|";
    os << "\n";
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        os << "| " << cm.labels[i] << " |";
        for (std::size_t j = 0; j < cm.labels.size(); ++j) os << " " << percent_cell(cm.row_percent[i][j]) << " |";
        os << "\n";
    }
    os << "\n## Confusion counts\n\n";
    os << "|    |";
    for (const auto& l : cm.labels) os << " " << l << " |";
    os << "\n|---|";
    for (std::size_t j = 0; j < cm.labels.size(); ++j) os << "---|";
    os << "\n";
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        os << "| " << cm.labels[i] << " |";
        for (std::size_t j = 0; j < cm.labels.size(); ++j) os << " " << cm.counts[i][j] << " |";
        os << "\n";
    }
    return os.str();
}

std::string csv_number(double v) { return std::isnan(v) ? "" : fmt("%.17g", v); }

std::string render_csv(const Report& r) {
    std::ostringstream os;
    os << "section,key,value\n";
    for (const auto& [k, v] : config_echo(r)) {
        std::string cell = v;
        if (cell.find(',') != std::string::npos) cell = "\"" + cell + "\"";
        os << "config," << k << "," << cell << "\n";
    }
    os << "accuracy,overall," << csv_number(r.overall_accuracy) << "\n";
    for (const auto& f : r.folds) os << "accuracy,fold" << f.fold << "," << csv_number(f.accuracy()) << "\n";
    if (r.config.record_timings) os << "timing,total_seconds," << csv_number(r.total_seconds) << "\n";

    const auto& cm = r.confusion;
    os << "\ncounts";
    for (const auto& l : cm.labels) os << "," << l;
    os << "\n";
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        os << cm.labels[i];
        for (auto c : cm.counts[i]) os << "," << c;
        os << "\n";
    }
    os << "\nrow_percent";
    for (const auto& l : cm.labels) os << "," << l;
    os << "\n";
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        os << cm.labels[i];
        for (double v : cm.row_percent[i]) os << "," << csv_number(v);
        os << "\n";
    }
    return os.str();
}

std::string render_json_lines(const Report& r) {
    std::ostringstream os;
    json cfg = json::object();
    for (const auto& [k, v] : config_echo(r)) cfg[k] = v;
    os << json{{"type", "config"}, {"config", cfg}}.dump() << "\n";
    for (const auto& f : r.folds) {
        json j{{"type", "fold"},        {"fold", f.fold},         {"train", f.train_size},
               {"test", f.test_size},   {"correct", f.correct},   {"accuracy", f.accuracy()},
               {"dims", f.reduced_dims}};
        if (r.config.record_timings) j["seconds"] = f.seconds;
        os << j.dump() << "\n";
    }
    json rows = json::array();
    for (const auto& row : r.confusion.row_percent) {
        json jr = json::array();
        for (double v : row) jr.push_back(std::isnan(v) ? json(nullptr) : json(v));
        rows.push_back(jr);
    }
    os << json{{"type", "confusion"}, {"labels", r.confusion.labels}, {"counts", r.confusion.counts},
               {"row_percent", rows}}
              .dump()
       << "\n";
    json summary{{"type", "summary"},
                 {"accuracy", r.overall_accuracy},
                 {"correct", r.confusion.correct()},
                 {"total", r.confusion.total()}};
    if (r.config.record_timings) summary["seconds"] = r.total_seconds;
    os << summary.dump() << "\n";
    return os.str();
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::markdown: return render_markdown(report);
        case ReportFormat::csv: return render_csv(report);
        case ReportFormat::json_lines: return render_json_lines(report);
    }
    return {};
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path) {
    io::write_file(path, render_report(report, format));
}

ConfusionMatrix parse_confusion_csv(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream is{std::string(text)};
    for (std::string line; std::getline(is, line);) lines.push_back(line);

    ConfusionMatrix cm;
    auto find_block = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].rfind(name + ",", 0) == 0) return i;
        }
        throw InputError("csv report lacks a '" + name + "' block");
    };
    auto parse_block = [&](const std::string& name, auto&& cell) {
        const std::size_t at = find_block(name);
        auto header = split_csv_line(lines[at]);
        header.erase(header.begin());
        if (cm.labels.empty()) cm.labels = header;
        if (header != cm.labels) throw InputError("csv report blocks disagree on labels");
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (at + 1 + i >= lines.size()) throw InputError("csv report: truncated '" + name + "' block");
            const auto cells = split_csv_line(lines[at + 1 + i]);
            if (cells.size() != header.size() + 1 || cells[0] != header[i]) {
                throw InputError("csv report: malformed row " + std::to_string(at + 2 + i));
            }
            for (std::size_t j = 0; j < header.size(); ++j) cell(i, j, cells[j + 1]);
        }
    };
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::vector<double>> pct;
    parse_block("counts", [&](std::size_t i, std::size_t j, const std::string& s) {
        if (counts.size() <= i) counts.resize(i + 1, std::vector<std::size_t>(cm.labels.size()));
        counts[i][j] = std::stoull(s);
    });
    parse_block("row_percent", [&](std::size_t i, std::size_t j, const std::string& s) {
        if (pct.size() <= i) pct.resize(i + 1, std::vector<double>(cm.labels.size()));
        pct[i][j] = s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
    });
    cm.counts = std::move(counts);
    cm.row_percent = std::move(pct);
    return cm;
}

}  // namespace fer::eval
