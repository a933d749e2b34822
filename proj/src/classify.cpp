#include "fer/classify.hpp"

#include <string>

namespace fer::classify {

std::string_view to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::lmt: return "lmt";
        case ClassifierKind::rf: return "rf";
        case ClassifierKind::mlp: return "mlp";
    }
    return "?";
}

ClassifierKind parse_classifier_kind(std::string_view s) {
    for (auto k : {ClassifierKind::lmt, ClassifierKind::rf, ClassifierKind::mlp}) {
        if (to_string(k) == s) return k;
    }
    throw InputError("unknown classifier '" + std::string(s) + "'");
}

Classifier train_classifier(ClassifierKind kind, const Matrix& x, std::span<const int> labels, std::size_t classes,
                            const TrainConfig& cfg) {
    switch (kind) {
        case ClassifierKind::lmt: return lmt_train(x, labels, classes, cfg.lmt, cfg.seed);
        case ClassifierKind::rf: return rf_train(x, labels, classes, cfg.rf, cfg.seed);
        case ClassifierKind::mlp: return mlp_train(x, labels, classes, cfg.mlp, cfg.seed);
    }
    throw InputError("unknown classifier kind");
}

std::vector<double> predict_proba(const Classifier& model, std::span<const double> x) {
    return std::visit(
        [&](const auto& m) -> std::vector<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LmtModel>) {
                return lmt_predict(m, x);
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                return rf_predict(m, x);
            } else {
                return mlp_predict(m, x);
            }
        },
        model);
}

ClassifierKind kind_of(const Classifier& model) { return static_cast<ClassifierKind>(model.index()); }

}  // namespace fer::classify
