#include "fer/cli.hpp"

#include "fer/data_io.hpp"
#include "fer/eval.hpp"
#include "fer/geometry.hpp"
#include "fer/model_io.hpp"
#include "fer/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

namespace fer::cli {

namespace {

struct PipelineArgs {
    std::string manifest;
    std::string features;
    std::string patches = "face,left_eye,right_eye,mouth";
    std::string classifier = "lmt";
    std::string reduce = "on";
    std::string dim = "auto";
    std::size_t knn = 7;
    std::string k_range = "6,12";
    std::string kernel = "heat";
    std::uint64_t seed = 1;
    std::size_t trees = 100;
    std::size_t hidden = 64;
    std::size_t epochs = 1000;
    double learning_rate = 0.5;
};

void add_pipeline_options(CLI::App* sub, PipelineArgs& a) {
    sub->add_option("--manifest", a.manifest, "dataset manifest csv")->required();
    sub->add_option("--features", a.features, "feature-record file")->required();
    sub->add_option("--patches", a.patches, "comma-separated patch list")->capture_default_str();
    sub->add_option("--classifier", a.classifier, "lmt | rf | mlp")->capture_default_str();
    sub->add_option("--reduce", a.reduce, "on | off | random")->capture_default_str();
    sub->add_option("--dim", a.dim, "auto | N (per patch)")->capture_default_str();
    sub->add_option("--knn", a.knn, "neighbors of the eigenmap graph")->capture_default_str();
    sub->add_option("--k-range", a.k_range, "k1,k2 of the dimension estimator")->capture_default_str();
    sub->add_option("--kernel", a.kernel, "heat | binary")->capture_default_str();
    sub->add_option("--seed", a.seed, "random seed")->capture_default_str();
    sub->add_option("--trees", a.trees, "random forest size")->capture_default_str();
    sub->add_option("--hidden", a.hidden, "mlp hidden units")->capture_default_str();
    sub->add_option("--epochs", a.epochs, "mlp epochs")->capture_default_str();
    sub->add_option("--learning-rate", a.learning_rate, "mlp learning rate")->capture_default_str();
}

std::size_t parse_count(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || v == 0 || s[0] == '-') {
        throw InputError("invalid " + what + " '" + s + "'");
    }
    return static_cast<std::size_t>(v);
}

std::pair<std::size_t, std::size_t> parse_k_range(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw InputError("--k-range expects k1,k2, got '" + s + "'");
    const auto k1 = parse_count(s.substr(0, comma), "k1");
    const auto k2 = parse_count(s.substr(comma + 1), "k2");
    if (k1 > k2) throw InputError("--k-range needs k1 <= k2");
    return {k1, k2};
}

PipelineOptions pipeline_options(const PipelineArgs& a) {
    PipelineOptions o;
    o.patches = parse_patch_list(a.patches);
    o.reduce = parse_reduce_mode(a.reduce);
    if (a.dim != "auto") o.reduction.dim_override = parse_count(a.dim, "--dim");
    if (a.knn == 0) throw InputError("--knn must be positive");
    o.reduction.knn_k = a.knn;
    std::tie(o.reduction.mle_k1, o.reduction.mle_k2) = parse_k_range(a.k_range);
    if (a.kernel == "heat") {
        o.reduction.kernel.kind = dimred::KernelKind::heat;
    } else if (a.kernel == "binary") {
        o.reduction.kernel.kind = dimred::KernelKind::binary;
    } else {
        throw InputError("unknown kernel '" + a.kernel + "' (expected heat or binary)");
    }
    o.classifier = classify::parse_classifier_kind(a.classifier);
    o.train.seed = a.seed;
    o.train.rf.trees = a.trees;
    o.train.mlp.hidden = a.hidden;
    o.train.mlp.epochs = a.epochs;
    o.train.mlp.learning_rate = a.learning_rate;
    normalize(o);
    return o;
}

bool parse_switch(const std::string& s, const std::string& flag) {
    if (s == "on") return true;
    if (s == "off") return false;
    throw InputError(flag + " expects on or off, got '" + s + "'");
}

std::vector<std::string> ids_in_file_order(const std::vector<io::FeatureRecord>& records) {
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (seen.insert(r.sample_id).second) ids.push_back(r.sample_id);
    }
    return ids;
}

std::vector<PatchId> patches_present(const std::vector<io::FeatureRecord>& records) {
    std::set<PatchId> present;
    for (const auto& r : records) present.insert(r.patch_id);
    return {present.begin(), present.end()};
}

// ---- subcommands

struct ExtractArgs {
    std::string manifest;
    std::string feature = "lbp";
    std::string patches = "face,left_eye,right_eye,mouth";
    std::string geometry;
    std::string out;
    int size = 64;
};

int do_extract(const ExtractArgs& a, std::ostream& out) {
    const auto manifest = io::load_manifest(a.manifest);
    const FeatureKind kind = parse_feature_kind(a.feature);
    if (kind == FeatureKind::deep) throw InputError("extract computes raw or lbp features; deep features are ingested");
    auto wanted = parse_patch_list(a.patches);
    std::sort(wanted.begin(), wanted.end());
    const auto geom = a.geometry.empty() ? geometry::PatchGeometryConfig{} : geometry::load_geometry_config(a.geometry);
    if (a.size < 8) throw InputError("--size must be at least 8");

    std::vector<io::FeatureRecord> records;
    for (const auto& e : manifest.entries) {
        if (!e.landmarks_path) throw InputError("sample '" + e.sample_id + "' has no landmarks file");
        const Image img = io::load_image(io::resolve_relative(a.manifest, e.image_path));
        const auto lm = io::load_landmarks(io::resolve_relative(a.manifest, *e.landmarks_path));
        const auto aligned = geometry::align_face(img, lm);
        const auto boxes =
            geometry::extract_patch_boxes(aligned.landmarks, geom, aligned.image.width, aligned.image.height);
        for (const auto& box : boxes) {
            if (!std::binary_search(wanted.begin(), wanted.end(), box.patch_id)) continue;
            const Image patch = to_gray(geometry::crop_and_resize(aligned.image, box, a.size, a.size));
            io::FeatureRecord r;
            r.sample_id = e.sample_id;
            r.patch_id = box.patch_id;
            r.crop_id = io::kSingleCrop;
            r.feature_kind = kind;
            r.values = kind == FeatureKind::raw ? features::raw_pixel_features(patch, 32, 32, box.patch_id).values
                                                : features::lbp_grid_histogram(patch, {}, box.patch_id).values;
            records.push_back(std::move(r));
        }
    }
    io::save_feature_records(records, a.out);
    out << "wrote " << records.size() << " records to " << a.out << "\n";
    return kExitOk;
}

int do_reduce_info(const std::string& features_path, const std::string& k_range, const std::string& patches,
                   std::ostream& out) {
    const auto records = io::load_feature_records(features_path);
    if (records.empty()) throw InputError("feature file '" + features_path + "' holds no records");
    const auto [k1, k2] = parse_k_range(k_range);
    auto ps = patches.empty() ? patches_present(records) : parse_patch_list(patches);
    std::sort(ps.begin(), ps.end());
    const auto table = features::assemble_features(records, ids_in_file_order(records), ps);
    out << "patch samples input_dim d_hat d\n";
    for (PatchId p : ps) {
        const Matrix& x = table.per_patch.at(p);
        const auto est = dimred::mle_intrinsic_dimension(x, k1, k2);
        char line[160];
        std::snprintf(line, sizeof line, "%s %ld %ld %.4f %zu\n", std::string(to_string(p)).c_str(),
                      static_cast<long>(x.rows()), static_cast<long>(x.cols()), est.d_hat, est.d);
        out << line;
    }
    return kExitOk;
}

struct EvaluateArgs {
    PipelineArgs pipe;
    std::size_t folds = 10;
    std::string group_by_actor = "off";
    std::string report;
    std::string format = "markdown";
    bool timings = false;
};

int do_evaluate(const EvaluateArgs& a, std::ostream& out) {
    eval::ExperimentConfig cfg;
    cfg.pipeline = pipeline_options(a.pipe);
    cfg.manifest_name = a.pipe.manifest;
    cfg.features_name = a.pipe.features;
    cfg.folds = a.folds;
    cfg.seed = a.pipe.seed;
    cfg.group_by_actor = parse_switch(a.group_by_actor, "--group-by-actor");
    cfg.record_timings = a.timings;
    const auto format = eval::parse_report_format(a.format);

    const auto manifest = io::load_manifest(a.pipe.manifest);
    const auto records = io::load_feature_records(a.pipe.features);
    const auto table = eval::table_for_manifest(manifest, records, cfg.pipeline.patches);
    const auto report = eval::run_experiment(manifest, table, cfg);
    if (a.report.empty()) {
        out << eval::render_report(report, format);
    } else {
        eval::emit_report(report, format, a.report);
        char line[96];
        std::snprintf(line, sizeof line, "accuracy %.1f%% over %zu samples\n", report.overall_accuracy,
                      report.samples);
        out << line;
    }
    return kExitOk;
}

int do_train(const PipelineArgs& a, const std::string& model_out, std::ostream& out) {
    const auto opts = pipeline_options(a);
    const auto manifest = io::load_manifest(a.manifest);
    io::check_single_peak(manifest);
    const auto records = io::load_feature_records(a.features);
    const auto table = eval::table_for_manifest(manifest, records, opts.patches);
    std::vector<std::size_t> rows(manifest.entries.size());
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
        labels[i] = manifest.entries[i].label;
    }
    const auto model = fit_pipeline(table, rows, labels, manifest.label_names, opts);
    io::save_model(model, model_out);
    out << "trained " << classify::to_string(opts.classifier) << " on " << rows.size() << " samples; model written to "
        << model_out << "\n";
    return kExitOk;
}

int do_predict(const std::string& model_path, const std::string& features_path, const std::string& out_path,
               std::ostream& out) {
    auto any = io::load_model(model_path);
    auto* model = std::get_if<PipelineModel>(&any);
    if (!model) throw InputError("'" + model_path + "' holds a " + std::string(io::model_kind(any)) +
                                 " model; predict needs a model written by train");
    const auto records = io::load_feature_records(features_path);
    if (records.empty()) throw InputError("feature file '" + features_path + "' holds no records");
    if (records.front().feature_kind != model->feature_kind) {
        throw InputError("features are " + std::string(to_string(records.front().feature_kind)) +
                         ", model was trained on " + std::string(to_string(model->feature_kind)));
    }
    const auto ids = ids_in_file_order(records);
    const auto table = features::assemble_features(records, ids, model->options.patches);
    std::vector<std::size_t> rows(ids.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto probs = predict_rows(*model, table, rows);

    std::ostringstream csv;
    csv << "sample_id,predicted";
    for (const auto& l : model->label_names) csv << ",p_" << l;
    csv << "\n";
    char num[32];
    for (std::size_t i = 0; i < ids.size(); ++i) {
        csv << ids[i] << "," << model->label_names[classify::argmax(probs[i])];
        for (double p : probs[i]) {
            std::snprintf(num, sizeof num, "%.17g", p);
            csv << "," << num;
        }
        csv << "\n";
    }
    io::write_file(out_path, csv.str());
    out << "wrote " << ids.size() << " predictions to " << out_path << "\n";
    return kExitOk;
}

int do_synth(const std::string& dir, const synth::SynthConfig& cfg, std::ostream& out) {
    const auto data = synth::make_synthetic(cfg);
    std::filesystem::create_directories(dir);
    const auto manifest_path = std::filesystem::path(dir) / "manifest.csv";
    const auto features_path = std::filesystem::path(dir) / "features.bin";
    io::save_manifest(data.manifest, manifest_path);
    io::save_feature_records(data.records, features_path);
    out << "wrote " << manifest_path.string() << " and " << features_path.string() << "\n";
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Facial expression recognition pipeline", "fer"};
    app.require_subcommand(1);

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "compute raw or lbp patch features from images");
    extract->add_option("--manifest", ex.manifest)->required();
    extract->add_option("--feature", ex.feature, "raw | lbp")->capture_default_str();
    extract->add_option("--patches", ex.patches, "")->capture_default_str();
    extract->add_option("--geometry-config", ex.geometry, "patch geometry json");
    extract->add_option("--size", ex.size, "patch side before feature extraction")->capture_default_str();
    extract->add_option("--out", ex.out)->required();

    std::string ri_features, ri_range = "6,12", ri_patches;
    auto* reduce_info = app.add_subcommand("reduce-info", "print the intrinsic dimension estimate per patch");
    reduce_info->add_option("--features", ri_features)->required();
    reduce_info->add_option("--k-range", ri_range, "")->capture_default_str();
    reduce_info->add_option("--patches", ri_patches, "default: all present");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "cross-validated accuracy and confusion matrix");
    add_pipeline_options(evaluate, ev.pipe);
    evaluate->add_option("--folds", ev.folds, "")->capture_default_str();
    evaluate->add_option("--group-by-actor", ev.group_by_actor, "on | off")->capture_default_str();
    evaluate->add_option("--report", ev.report, "report path (default: stdout)");
    evaluate->add_option("--format", ev.format, "markdown | csv | json-lines")->capture_default_str();
    evaluate->add_flag("--timings", ev.timings, "include wall-clock timings in the report");

    PipelineArgs tr;
    std::string model_out;
    auto* train = app.add_subcommand("train", "fit the pipeline on all samples");
    add_pipeline_options(train, tr);
    train->add_option("--model-out", model_out)->required();

    std::string pr_model, pr_features, pr_out;
    auto* predict = app.add_subcommand("predict", "label distributions from a trained model");
    predict->add_option("--model", pr_model)->required();
    predict->add_option("--features", pr_features)->required();
    predict->add_option("--out", pr_out)->required();

    std::string sy_dir;
    synth::SynthConfig sy;
    auto* synth_cmd = app.add_subcommand("synth", "write the synthetic benchmark dataset");
    synth_cmd->add_option("--out-dir", sy_dir)->required();
    synth_cmd->add_option("--seed", sy.seed, "")->capture_default_str();
    synth_cmd->add_option("--samples", sy.samples, "")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*extract) return do_extract(ex, out);
        if (*reduce_info) return do_reduce_info(ri_features, ri_range, ri_patches, out);
        if (*evaluate) return do_evaluate(ev, out);
        if (*train) return do_train(tr, model_out, out);
        if (*predict) return do_predict(pr_model, pr_features, pr_out, out);
        if (*synth_cmd) return do_synth(sy_dir, sy, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace fer::cli
