#include "fer/eval.hpp"
#include "fer/model_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace fer;
using namespace fer::eval;

namespace {

struct Dataset {
    io::DatasetManifest manifest;
    features::FeatureTable table;
};

Dataset make_dataset(const fer::testing::Labeled& d, std::vector<std::string> names, bool actors = false) {
    Dataset out;
    out.manifest.label_names = std::move(names);
    std::vector<io::FeatureRecord> recs;
    for (std::size_t i = 0; i < d.y.size(); ++i) {
        io::ManifestEntry e;
        e.sample_id = "s" + std::to_string(i);
        e.image_path = e.sample_id + ".pgm";
        e.label = d.y[i];
        if (actors) e.actor_id = "a" + std::to_string(i / out.manifest.label_names.size());
        out.manifest.entries.push_back(e);
        const auto r = static_cast<Eigen::Index>(i);
        recs.push_back({e.sample_id, PatchId::face, io::kSingleCrop,
                        std::vector<double>(d.x.row(r).data(), d.x.row(r).data() + d.x.cols()), FeatureKind::raw});
    }
    out.table = table_for_manifest(out.manifest, recs, {PatchId::face});
    return out;
}

ExperimentConfig reduce_off_config() {
    ExperimentConfig cfg;
    cfg.pipeline.patches = {PatchId::face};
    cfg.pipeline.reduce = ReduceMode::off;
    cfg.folds = 5;
    return cfg;
}

}  // namespace

TEST_CASE("stratified folds") {
    std::vector<int> labels;
    for (int c = 0; c < 10; ++c)
        for (int i = 0; i < 10; ++i) labels.push_back(c);
    const auto plan = stratified_folds(labels, nullptr, 10, 3);
    for (std::size_t f = 0; f < 10; ++f) {
        std::set<int> classes;
        std::size_t n = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (plan.assignment[i] == f) {
                classes.insert(labels[i]);
                ++n;
            }
        }
        CHECK(n == 10);
        CHECK(classes.size() == 10);
    }
    CHECK(stratified_folds(labels, nullptr, 10, 3).assignment == plan.assignment);

    const std::vector<int> seven(7, 0);
    const auto p7 = stratified_folds(seven, nullptr, 3, 1);
    std::vector<int> counts(3, 0);
    for (auto f : p7.assignment) ++counts[f];
    std::sort(counts.begin(), counts.end());
    CHECK(counts == std::vector<int>{2, 2, 3});
    CHECK_THROWS_AS(stratified_folds(seven, nullptr, 1, 1), InputError);
}

TEST_CASE("actor-grouped folds keep actors on one side") {
    std::vector<int> labels;
    std::vector<std::optional<std::string>> actors;
    Rng rng(4);
    for (int a = 0; a < 30; ++a) {
        for (int c = 0; c < 4; ++c) {
            labels.push_back(c);
            actors.push_back("a" + std::to_string(a));
        }
    }
    actors[5] = std::nullopt;
    const auto plan = stratified_folds(labels, &actors, 5, 9);
    CHECK(plan.group_by_actor);
    std::map<std::string, std::size_t> fold_of;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!actors[i]) continue;
        const auto [it, fresh] = fold_of.emplace(*actors[i], plan.assignment[i]);
        CHECK(it->second == plan.assignment[i]);
    }
}

TEST_CASE("confusion matrix") {
    const auto cm = confusion_matrix({0, 0, 1}, {0, 1, 1}, {"A", "B"});
    CHECK(cm.counts == std::vector<std::vector<std::size_t>>{{1, 1}, {0, 1}});
    CHECK(cm.row_percent[0] == std::vector<double>{50.0, 50.0});
    CHECK(cm.row_percent[1] == std::vector<double>{0.0, 100.0});
    CHECK(cm.total() == 3);
    CHECK(cm.correct() == 2);

    const auto perfect = confusion_matrix({0, 1, 2}, {0, 1, 2}, {"A", "B", "C"});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(perfect.row_percent[i][j] == (i == j ? 100.0 : 0.0));

    const auto gap = confusion_matrix({0, 2}, {0, 2}, {"A", "B", "C"});
    CHECK(std::isnan(gap.row_percent[1][0]));
    CHECK_THROWS_AS(confusion_matrix({0, 3}, {0, 0}, {"A", "B"}), InputError);
    CHECK_THROWS_AS(confusion_matrix({0}, {0, 0}, {"A", "B"}), InputError);
}

TEST_CASE("experiment on separable data, rendering and csv") {
    Rng rng(5);
    const auto d = fer::testing::gaussian_classes(300, 10, 3, 4.0, rng);
    const auto ds = make_dataset(d, {"An", "Hp", "Sd"});
    const auto report = run_experiment(ds.manifest, ds.table, reduce_off_config());
    CHECK(report.overall_accuracy >= 99.0);
    CHECK(report.confusion.total() == 300);
    CHECK(report.overall_accuracy == doctest::Approx(100.0 * report.confusion.correct() / 300.0));
    std::size_t tested = 0;
    for (const auto& f : report.folds) tested += f.test_size;
    CHECK(tested == 300);

    const auto md = render_report(report, ReportFormat::markdown);
    CHECK(md == render_report(report, ReportFormat::markdown));
    CHECK(md.find("| An | Hp | Sd |") != std::string::npos);
    CHECK(md.find("Overall accuracy:") != std::string::npos);

    const auto csv = render_report(report, ReportFormat::csv);
    const auto back = parse_confusion_csv(csv);
    CHECK(back.counts == report.confusion.counts);
    CHECK(back.row_percent == report.confusion.row_percent);
    CHECK(render_report(report, ReportFormat::json_lines).find("\"type\":\"summary\"") != std::string::npos);

    const auto dir = fer::testing::tmp_dir("eval");
    emit_report(report, ReportFormat::markdown, dir / "r.md");
    CHECK(io::read_file(dir / "r.md") == md);
    CHECK_THROWS_AS(emit_report(report, ReportFormat::markdown, dir / "missing" / "r.md"), InputError);
}

TEST_CASE("report layout for the six-class label set, empty rows as dashes") {
    Report r;
    r.confusion = confusion_matrix({0, 1, 3, 4, 5}, {0, 1, 3, 4, 5}, {"An", "Ds", "Fr", "Hp", "Sd", "Sp"});
    r.samples = 5;
    r.truth = {0, 1, 3, 4, 5};
    r.predicted = r.truth;
    r.overall_accuracy = 100.0;
    const auto md = render_report(r, ReportFormat::markdown);
    CHECK(md.find("| An | Ds | Fr | Hp | Sd | Sp |") != std::string::npos);
    CHECK(md.find("| Fr | - | - | - | - | - | - |") != std::string::npos);
    CHECK(md.find("100.0") != std::string::npos);
}

TEST_CASE("shuffled labels give chance accuracy") {
    Rng rng(6);
    auto d = fer::testing::gaussian_classes(300, 10, 3, 4.0, rng);
    rng.shuffle(d.y.begin(), d.y.end());
    const auto ds = make_dataset(d, {"A", "B", "C"});
    const auto report = run_experiment(ds.manifest, ds.table, reduce_off_config());
    CHECK(report.overall_accuracy >= 33.3 - 8.0);
    CHECK(report.overall_accuracy <= 33.3 + 8.0);
}

TEST_CASE("determinism and no test-fold leakage with reduction on") {
    Rng rng(7);
    const auto d = fer::testing::gaussian_classes(120, 6, 3, 3.0, rng);
    auto ds = make_dataset(d, {"A", "B", "C"}, true);
    ExperimentConfig cfg;
    cfg.pipeline.patches = {PatchId::face};
    cfg.pipeline.classifier = classify::ClassifierKind::rf;
    cfg.pipeline.train.rf.trees = 10;
    cfg.folds = 4;
    cfg.group_by_actor = true;
    const auto a = run_experiment(ds.manifest, ds.table, cfg);
    const auto b = run_experiment(ds.manifest, ds.table, cfg);
    CHECK(render_report(a, ReportFormat::markdown) == render_report(b, ReportFormat::markdown));
    CHECK(render_report(a, ReportFormat::csv) == render_report(b, ReportFormat::csv));
    CHECK(a.plan.group_by_actor);

    const auto fitted = fit_fold(ds.manifest, ds.table, cfg, a.plan, 0);
    const auto before = io::embedding_hash(*fitted.transforms[0].embedding);
    CHECK(before == a.folds[0].embedding_hashes[0]);
    auto& m = ds.table.per_patch.at(PatchId::face);
    for (std::size_t i = 0; i < a.plan.assignment.size(); ++i)
        if (a.plan.assignment[i] == 0) m.row(static_cast<Eigen::Index>(i)).array() += 5.0;
    const auto after = fit_fold(ds.manifest, ds.table, cfg, a.plan, 0);
    CHECK(io::embedding_hash(*after.transforms[0].embedding) == before);
}

TEST_CASE("report format names") {
    CHECK(parse_report_format("md") == ReportFormat::markdown);
    CHECK(parse_report_format("json-lines") == ReportFormat::json_lines);
    CHECK_THROWS_AS(parse_report_format("xml"), InputError);
}
