#pragma once

#include "fer/forest.hpp"
#include "fer/linear_logistic.hpp"
#include "fer/lmt.hpp"
#include "fer/mlp.hpp"

#include <string_view>
#include <variant>

namespace fer::classify {

enum class ClassifierKind : std::uint8_t { lmt = 0, rf = 1, mlp = 2 };

std::string_view to_string(ClassifierKind k);
ClassifierKind parse_classifier_kind(std::string_view s);

struct TrainConfig {
    std::uint64_t seed = 1;
    LmtConfig lmt;
    ForestConfig rf;
    MlpConfig mlp;
};

using Classifier = std::variant<LmtModel, ForestModel, MlpModel>;

Classifier train_classifier(ClassifierKind kind, const Matrix& x, std::span<const int> labels, std::size_t classes,
                            const TrainConfig& cfg);

std::vector<double> predict_proba(const Classifier& model, std::span<const double> x);

ClassifierKind kind_of(const Classifier& model);

}  // namespace fer::classify
