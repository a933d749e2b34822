#include "fer/model_io.hpp"

#include "fer/data_io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace fer::io {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "model payload assumes a little-endian host");

struct Sink {
    std::vector<double> payload;

    void put(double v) { payload.push_back(v); }
    void put(const Matrix& m) { payload.insert(payload.end(), m.data(), m.data() + m.size()); }
    void put(const Vector& v) { payload.insert(payload.end(), v.data(), v.data() + v.size()); }
    void put(const std::vector<double>& v) { payload.insert(payload.end(), v.begin(), v.end()); }
};

struct Source {
    std::span<const double> data;
    std::size_t pos = 0;

    double get() {
        if (pos >= data.size()) throw InputError("model payload too short");
        return data[pos++];
    }
    Matrix matrix(std::size_t r, std::size_t c) {
        Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get();
        return m;
    }
    Vector vector(std::size_t n) {
        Vector v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get();
        return v;
    }
    std::vector<double> values(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = get();
        return v;
    }
};

template <typename T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("model meta lacks '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(std::string("model meta field '") + key + "' has the wrong type");
    }
}

std::string seed_text(std::uint64_t s) { return std::to_string(s); }

std::uint64_t parse_seed(const std::string& s) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw InputError("bad seed");
        return v;
    } catch (const std::exception&) {
        throw InputError("model meta has a malformed seed '" + s + "'");
    }
}

// ---- embedding

json put_embedding(const dimred::Embedding& e, Sink& s) {
    json m;
    m["n"] = e.training_points.rows();
    m["input_dim"] = e.training_points.cols();
    m["dim"] = e.dim;
    m["knn_k"] = e.knn_k;
    m["kernel"] = e.kernel.kind == dimred::KernelKind::heat ? "heat" : "binary";
    m["eigenvalues"] = e.eigenvalues.size();
    s.put(e.kernel.t);
    s.put(e.training_points);
    s.put(e.coords);
    s.put(e.eigenvalues);
    return m;
}

dimred::Embedding get_embedding(const json& m, Source& s) {
    dimred::Embedding e;
    const auto n = field<std::size_t>(m, "n");
    const auto D = field<std::size_t>(m, "input_dim");
    e.dim = field<std::size_t>(m, "dim");
    e.knn_k = field<std::size_t>(m, "knn_k");
    const auto kernel = field<std::string>(m, "kernel");
    if (kernel == "heat") {
        e.kernel.kind = dimred::KernelKind::heat;
    } else if (kernel == "binary") {
        e.kernel.kind = dimred::KernelKind::binary;
    } else {
        throw InputError("model meta has unknown kernel '" + kernel + "'");
    }
    e.kernel.t = s.get();
    e.training_points = s.matrix(n, D);
    e.coords = s.matrix(n, e.dim);
    e.eigenvalues = s.values(field<std::size_t>(m, "eigenvalues"));
    return e;
}

// ---- linear logistic

json put_linear(const classify::LinearLogisticModel& l, Sink& s) {
    json m;
    m["classes"] = l.classes;
    m["dim"] = l.dim;
    m["iterations"] = l.iterations;
    s.put(l.coef);
    return m;
}

classify::LinearLogisticModel get_linear(const json& m, Source& s) {
    classify::LinearLogisticModel l;
    l.classes = field<std::size_t>(m, "classes");
    l.dim = field<std::size_t>(m, "dim");
    l.iterations = field<std::size_t>(m, "iterations");
    l.coef = s.matrix(l.classes, l.dim + 1);
    return l;
}

// ---- configs

json put_lmt_config(const classify::LmtConfig& c) {
    return json{{"min_split", c.min_split}, {"min_leaf", c.min_leaf}, {"max_iters", c.max_iters},
                {"cv_folds", c.cv_folds},   {"early_stop", c.early_stop}, {"prune", c.prune}};
}

classify::LmtConfig get_lmt_config(const json& m) {
    classify::LmtConfig c;
    c.min_split = field<std::size_t>(m, "min_split");
    c.min_leaf = field<std::size_t>(m, "min_leaf");
    c.max_iters = field<std::size_t>(m, "max_iters");
    c.cv_folds = field<std::size_t>(m, "cv_folds");
    c.early_stop = field<std::size_t>(m, "early_stop");
    c.prune = field<bool>(m, "prune");
    return c;
}

json put_rf_config(const classify::ForestConfig& c) {
    return json{{"trees", c.trees}, {"mtry", c.mtry}, {"min_leaf", c.min_leaf}};
}

classify::ForestConfig get_rf_config(const json& m) {
    classify::ForestConfig c;
    c.trees = field<std::size_t>(m, "trees");
    c.mtry = field<std::size_t>(m, "mtry");
    c.min_leaf = field<std::size_t>(m, "min_leaf");
    return c;
}

json put_mlp_config(const classify::MlpConfig& c, Sink& s) {
    s.put(c.learning_rate);
    s.put(c.weight_init_scale);
    return json{{"hidden", c.hidden}, {"epochs", c.epochs}};
}

classify::MlpConfig get_mlp_config(const json& m, Source& s) {
    classify::MlpConfig c;
    c.learning_rate = s.get();
    c.weight_init_scale = s.get();
    c.hidden = field<std::size_t>(m, "hidden");
    c.epochs = field<std::size_t>(m, "epochs");
    return c;
}

// ---- classifiers

json put_lmt(const classify::LmtModel& l, Sink& s) {
    json m;
    m["config"] = put_lmt_config(l.config);
    m["classes"] = l.classes;
    m["dim"] = l.dim;
    m["boosting_iterations"] = l.boosting_iterations;
    m["unpruned_leaves"] = l.unpruned_leaves;
    m["seed"] = seed_text(l.seed);
    json nodes = json::array();
    for (const auto& n : l.tree.nodes) {
        s.put(n.threshold);
        s.put(n.train_error);
        nodes.push_back(json{{"attribute", n.attribute},
                             {"left", n.left},
                             {"right", n.right},
                             {"samples", n.samples},
                             {"model", put_linear(n.model, s)}});
    }
    m["nodes"] = std::move(nodes);
    return m;
}

void check_tree_links(int attribute, int left, int right, std::size_t count, std::size_t dim) {
    if (attribute < 0) {
        if (left != -1 || right != -1) throw InputError("model tree: leaf with children");
        return;
    }
    if (static_cast<std::size_t>(attribute) >= dim) throw InputError("model tree: attribute out of range");
    if (left <= 0 || right <= 0 || static_cast<std::size_t>(left) >= count ||
        static_cast<std::size_t>(right) >= count) {
        throw InputError("model tree: child index out of range");
    }
}

classify::LmtModel get_lmt(const json& m, Source& s) {
    classify::LmtModel l;
    l.config = get_lmt_config(field<json>(m, "config"));
    l.classes = field<std::size_t>(m, "classes");
    l.dim = field<std::size_t>(m, "dim");
    l.boosting_iterations = field<std::size_t>(m, "boosting_iterations");
    l.unpruned_leaves = field<std::size_t>(m, "unpruned_leaves");
    l.seed = parse_seed(field<std::string>(m, "seed"));
    const json nodes = field<json>(m, "nodes");
    if (!nodes.is_array() || nodes.empty()) throw InputError("model tree has no nodes");
    for (const auto& jn : nodes) {
        classify::LmtNode n;
        n.threshold = s.get();
        n.train_error = s.get();
        n.attribute = field<int>(jn, "attribute");
        n.left = field<int>(jn, "left");
        n.right = field<int>(jn, "right");
        n.samples = field<std::size_t>(jn, "samples");
        n.model = get_linear(field<json>(jn, "model"), s);
        if (n.model.classes != l.classes || n.model.dim != l.dim) throw InputError("model tree: node shape mismatch");
        check_tree_links(n.attribute, n.left, n.right, nodes.size(), l.dim);
        l.tree.nodes.push_back(std::move(n));
    }
    return l;
}

json put_forest(const classify::ForestModel& f, Sink& s) {
    json m;
    m["mtry"] = f.mtry;
    m["min_leaf"] = f.min_leaf;
    m["classes"] = f.classes;
    m["dim"] = f.dim;
    json seeds = json::array();
    for (auto sd : f.tree_seeds) seeds.push_back(seed_text(sd));
    m["tree_seeds"] = std::move(seeds);
    json trees = json::array();
    for (const auto& t : f.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) {
            s.put(n.threshold);
            s.put(n.distribution);
            nodes.push_back(json::array({n.attribute, n.left, n.right, n.distribution.size()}));
        }
        trees.push_back(std::move(nodes));
    }
    m["trees"] = std::move(trees);
    return m;
}

classify::ForestModel get_forest(const json& m, Source& s) {
    classify::ForestModel f;
    f.mtry = field<std::size_t>(m, "mtry");
    f.min_leaf = field<std::size_t>(m, "min_leaf");
    f.classes = field<std::size_t>(m, "classes");
    f.dim = field<std::size_t>(m, "dim");
    for (const auto& sd : field<json>(m, "tree_seeds")) {
        if (!sd.is_string()) throw InputError("model meta: tree seed must be a string");
        f.tree_seeds.push_back(parse_seed(sd.get<std::string>()));
    }
    const json trees = field<json>(m, "trees");
    if (!trees.is_array() || trees.size() != f.tree_seeds.size()) throw InputError("model meta: tree count mismatch");
    for (const auto& jt : trees) {
        classify::DecisionTree t;
        if (!jt.is_array() || jt.empty()) throw InputError("model meta: empty tree");
        for (const auto& jn : jt) {
            if (!jn.is_array() || jn.size() != 4) throw InputError("model meta: malformed forest node");
            classify::ForestNode n;
            try {
                n.attribute = jn[0].get<int>();
                n.left = jn[1].get<int>();
                n.right = jn[2].get<int>();
            } catch (const json::exception&) {
                throw InputError("model meta: malformed forest node");
            }
            check_tree_links(n.attribute, n.left, n.right, jt.size(), f.dim);
            const auto len = jn[3].get<std::size_t>();
            if (n.attribute < 0 && len != f.classes) throw InputError("model meta: leaf distribution size mismatch");
            n.threshold = s.get();
            n.distribution = s.values(len);
            t.nodes.push_back(std::move(n));
        }
        f.trees.push_back(std::move(t));
    }
    return f;
}

json put_mlp(const classify::MlpModel& n, Sink& s) {
    s.put(n.input_mean);
    s.put(n.input_scale);
    s.put(n.w1);
    s.put(n.b1);
    s.put(n.w2);
    s.put(n.b2);
    return json{{"inputs", n.inputs}, {"hidden", n.hidden}, {"classes", n.classes}};
}

classify::MlpModel get_mlp(const json& m, Source& s) {
    classify::MlpModel n;
    n.inputs = field<std::size_t>(m, "inputs");
    n.hidden = field<std::size_t>(m, "hidden");
    n.classes = field<std::size_t>(m, "classes");
    n.input_mean = s.vector(n.inputs);
    n.input_scale = s.vector(n.inputs);
    n.w1 = s.matrix(n.hidden, n.inputs);
    n.b1 = s.vector(n.hidden);
    n.w2 = s.matrix(n.classes, n.hidden);
    n.b2 = s.vector(n.classes);
    return n;
}

json put_classifier(const classify::Classifier& c, Sink& s) {
    json m;
    m["kind"] = std::string(classify::to_string(classify::kind_of(c)));
    m["model"] = std::visit(
        [&](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, classify::LmtModel>) return put_lmt(v, s);
            else if constexpr (std::is_same_v<T, classify::ForestModel>) return put_forest(v, s);
            else return put_mlp(v, s);
        },
        c);
    return m;
}

classify::Classifier get_classifier(const json& m, Source& s) {
    const auto kind = classify::parse_classifier_kind(field<std::string>(m, "kind"));
    const json body = field<json>(m, "model");
    switch (kind) {
        case classify::ClassifierKind::lmt: return get_lmt(body, s);
        case classify::ClassifierKind::rf: return get_forest(body, s);
        case classify::ClassifierKind::mlp: return get_mlp(body, s);
    }
    throw InputError("unknown classifier kind");
}

// ---- pipeline

json put_estimate(const dimred::DimEstimate& e, Sink& s) {
    s.put(e.d_hat);
    s.put(e.per_point);
    return json{{"d", e.d}, {"k1", e.k1}, {"k2", e.k2}, {"points", e.per_point.size()}};
}

dimred::DimEstimate get_estimate(const json& m, Source& s) {
    dimred::DimEstimate e;
    e.d_hat = s.get();
    e.d = field<std::size_t>(m, "d");
    e.k1 = field<std::size_t>(m, "k1");
    e.k2 = field<std::size_t>(m, "k2");
    e.per_point = s.values(field<std::size_t>(m, "points"));
    return e;
}

json put_pipeline(const PipelineModel& p, Sink& s) {
    const auto& o = p.options;
    json m;
    json patches = json::array();
    for (PatchId id : o.patches) patches.push_back(std::string(to_string(id)));
    json red;
    red["knn_k"] = o.reduction.knn_k;
    red["mle_k1"] = o.reduction.mle_k1;
    red["mle_k2"] = o.reduction.mle_k2;
    red["kernel"] = o.reduction.kernel.kind == dimred::KernelKind::heat ? "heat" : "binary";
    red["dim_override"] = o.reduction.dim_override ? json(*o.reduction.dim_override) : json(nullptr);
    s.put(o.reduction.kernel.t);
    json train;
    train["seed"] = seed_text(o.train.seed);
    train["lmt"] = put_lmt_config(o.train.lmt);
    train["rf"] = put_rf_config(o.train.rf);
    train["mlp"] = put_mlp_config(o.train.mlp, s);
    m["options"] = json{{"patches", patches},
                        {"reduce", std::string(to_string(o.reduce))},
                        {"reduction", red},
                        {"classifier", std::string(classify::to_string(o.classifier))},
                        {"train", train}};
    m["feature_kind"] = std::string(to_string(p.feature_kind));
    m["labels"] = p.label_names;
    json transforms = json::array();
    for (const auto& t : p.transforms) {
        json jt;
        jt["patch"] = std::string(to_string(t.patch));
        jt["mode"] = std::string(to_string(t.mode));
        jt["input_dim"] = t.input_dim;
        jt["output_dim"] = t.output_dim;
        jt["embedding"] = t.embedding ? put_embedding(*t.embedding, s) : json(nullptr);
        if (t.mode == ReduceMode::random_projection) s.put(t.projection);
        jt["estimate"] = t.estimate ? put_estimate(*t.estimate, s) : json(nullptr);
        transforms.push_back(std::move(jt));
    }
    m["transforms"] = std::move(transforms);
    m["classifier"] = put_classifier(p.classifier, s);
    return m;
}

PipelineModel get_pipeline(const json& m, Source& s) {
    PipelineModel p;
    auto& o = p.options;
    const json jo = field<json>(m, "options");
    o.patches.clear();
    for (const auto& id : field<json>(jo, "patches")) o.patches.push_back(parse_patch_id(id.get<std::string>()));
    o.reduce = parse_reduce_mode(field<std::string>(jo, "reduce"));
    const json red = field<json>(jo, "reduction");
    o.reduction.knn_k = field<std::size_t>(red, "knn_k");
    o.reduction.mle_k1 = field<std::size_t>(red, "mle_k1");
    o.reduction.mle_k2 = field<std::size_t>(red, "mle_k2");
    o.reduction.kernel.kind =
        field<std::string>(red, "kernel") == "binary" ? dimred::KernelKind::binary : dimred::KernelKind::heat;
    const json ov = field<json>(red, "dim_override");
    if (!ov.is_null()) o.reduction.dim_override = ov.get<std::size_t>();
    o.reduction.kernel.t = s.get();
    o.classifier = classify::parse_classifier_kind(field<std::string>(jo, "classifier"));
    const json train = field<json>(jo, "train");
    o.train.seed = parse_seed(field<std::string>(train, "seed"));
    o.train.lmt = get_lmt_config(field<json>(train, "lmt"));
    o.train.rf = get_rf_config(field<json>(train, "rf"));
    o.train.mlp = get_mlp_config(field<json>(train, "mlp"), s);
    p.feature_kind = parse_feature_kind(field<std::string>(m, "feature_kind"));
    p.label_names = field<std::vector<std::string>>(m, "labels");
    for (const auto& jt : field<json>(m, "transforms")) {
        PatchTransform t;
        t.patch = parse_patch_id(field<std::string>(jt, "patch"));
        t.mode = parse_reduce_mode(field<std::string>(jt, "mode"));
        t.input_dim = field<std::size_t>(jt, "input_dim");
        t.output_dim = field<std::size_t>(jt, "output_dim");
        const json je = field<json>(jt, "embedding");
        if (!je.is_null()) t.embedding = get_embedding(je, s);
        if (t.mode == ReduceMode::eigenmaps && !t.embedding) throw InputError("model meta: eigenmap transform without embedding");
        if (t.mode == ReduceMode::random_projection) t.projection = s.matrix(t.input_dim, t.output_dim);
        const json est = field<json>(jt, "estimate");
        if (!est.is_null()) t.estimate = get_estimate(est, s);
        p.transforms.push_back(std::move(t));
    }
    p.classifier = get_classifier(field<json>(m, "classifier"), s);
    return p;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::uint64_t checksum(const std::string& meta_text, std::string_view payload_bytes) {
    return fnv1a64(payload_bytes, fnv1a64(meta_text));
}

}  // namespace

std::string_view model_kind(const AnyModel& model) {
    static constexpr std::string_view names[] = {"embedding", "lmt", "rf", "mlp", "pipeline"};
    return names[model.index()];
}

std::string encode_model(const AnyModel& model) {
    Sink sink;
    json meta = std::visit(
        [&](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, dimred::Embedding>) return put_embedding(v, sink);
            else if constexpr (std::is_same_v<T, classify::LmtModel>) return put_lmt(v, sink);
            else if constexpr (std::is_same_v<T, classify::ForestModel>) return put_forest(v, sink);
            else if constexpr (std::is_same_v<T, classify::MlpModel>) return put_mlp(v, sink);
            else return put_pipeline(v, sink);
        },
        model);
    const std::string meta_text = meta.dump();
    std::string payload(sink.payload.size() * sizeof(double), '\0');
    if (!payload.empty()) std::memcpy(payload.data(), sink.payload.data(), payload.size());

    json header;
    header["checksum"] = hex64(checksum(meta_text, payload));
    header["kind"] = std::string(model_kind(model));
    header["meta"] = std::move(meta);
    header["payload"] = sink.payload.size();
    header["version"] = kModelFormatVersion;
    return header.dump() + "\n" + payload;
}

AnyModel decode_model(std::string_view bytes) {
    const std::size_t nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw InputError("model file: missing header line");
    json header;
    try {
        header = json::parse(bytes.substr(0, nl));
    } catch (const json::exception& e) {
        throw InputError(std::string("model file: malformed header: ") + e.what());
    }
    if (!header.is_object()) throw InputError("model file: header is not an object");
    const int version = field<int>(header, "version");
    if (version != kModelFormatVersion) {
        throw InputError("model file: unsupported version " + std::to_string(version) + " (expected " +
                         std::to_string(kModelFormatVersion) + ")");
    }
    const auto count = field<std::size_t>(header, "payload");
    const std::string_view payload = bytes.substr(nl + 1);
    if (payload.size() != count * sizeof(double)) {
        throw InputError("model file: payload is " + std::to_string(payload.size()) + " bytes, header declares " +
                         std::to_string(count * sizeof(double)));
    }
    const json meta = field<json>(header, "meta");
    const auto stored = field<std::string>(header, "checksum");
    if (stored != hex64(checksum(meta.dump(), payload))) throw InputError("model file: checksum mismatch");

    std::vector<double> values(count);
    if (count) std::memcpy(values.data(), payload.data(), payload.size());
    Source src{values, 0};
    const auto kind = field<std::string>(header, "kind");
    AnyModel out;
    if (kind == "embedding") out = get_embedding(meta, src);
    else if (kind == "lmt") out = get_lmt(meta, src);
    else if (kind == "rf") out = get_forest(meta, src);
    else if (kind == "mlp") out = get_mlp(meta, src);
    else if (kind == "pipeline") out = get_pipeline(meta, src);
    else throw InputError("model file: unknown kind '" + kind + "'");
    if (src.pos != values.size()) throw InputError("model file: payload has unused values");
    return out;
}

void save_model(const AnyModel& model, const std::filesystem::path& path) { write_file(path, encode_model(model)); }

AnyModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

std::uint64_t embedding_hash(const dimred::Embedding& emb) { return fnv1a64(encode_model(emb)); }

}  // namespace fer::io
