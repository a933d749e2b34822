#pragma once

#include "fer/classify.hpp"
#include "fer/dimred.hpp"
#include "fer/pipeline.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

namespace fer::io {

inline constexpr int kModelFormatVersion = 1;

using AnyModel = std::variant<dimred::Embedding, classify::LmtModel, classify::ForestModel, classify::MlpModel,
                              PipelineModel>;

/// Model file: one JSON header line
///   {"checksum":"<16 hex>","kind":...,"meta":{...},"payload":<count>,"version":1}
/// followed by `count` little-endian float64 values. The checksum is FNV-1a
/// over the compact meta text followed by the payload bytes.
std::string encode_model(const AnyModel& model);
AnyModel decode_model(std::string_view bytes);

void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

std::string_view model_kind(const AnyModel& model);

/// FNV-1a of the encoded embedding; used to detect test-fold leakage.
std::uint64_t embedding_hash(const dimred::Embedding& emb);

}  // namespace fer::io
