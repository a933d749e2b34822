#pragma once

#include "fer/common.hpp"
#include "fer/image.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fer::io {

struct ManifestEntry {
    std::string sample_id;
    std::string image_path;
    int label = 0;
    std::optional<std::string> actor_id;
    std::optional<std::string> landmarks_path;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> label_names;
    std::string source_name;

    /// Index of a label name; throws InputError for unknown names.
    [[nodiscard]] int label_index(std::string_view name) const;
};

/// Parses the manifest CSV: a `#labels: A,B,...` line, the fixed header
/// `sample_id,image_path,label,actor_id,landmarks_path`, then one row per sample.
DatasetManifest parse_manifest(std::string_view text, std::string source_name = "<memory>");
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Canonical serialization; parse_manifest(format_manifest(m)) == m.
std::string format_manifest(const DatasetManifest& m);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

/// Throws InputError if any (actor_id, label) pair occurs more than once.
/// Entries without an actor are exempt.
void check_single_peak(const DatasetManifest& m);

/// Resolves an entry-relative path against the manifest's directory.
std::filesystem::path resolve_relative(const std::filesystem::path& manifest_path, const std::string& p);

inline constexpr const char* kLeftEye = "left_eye_center";
inline constexpr const char* kRightEye = "right_eye_center";
inline constexpr const char* kMouth = "mouth_center";

struct LandmarkSet {
    std::map<std::string, Point2> points;
    bool mirrored = false;

    [[nodiscard]] const Point2& at(const std::string& name) const;
    [[nodiscard]] Point2 left_eye() const { return at(kLeftEye); }
    [[nodiscard]] Point2 right_eye() const { return at(kRightEye); }
    [[nodiscard]] Point2 mouth() const { return at(kMouth); }
};

/// Checks required names, finiteness and eye orientation.
void validate(const LandmarkSet& lm);

/// `name,x,y` per line; `#` comments; an optional `mirrored=true` line.
LandmarkSet parse_landmarks(std::string_view text);
LandmarkSet load_landmarks(const std::filesystem::path& path);
std::string format_landmarks(const LandmarkSet& lm);

/// Binary PGM (P5) or PPM (P6), maxval 255.
Image decode_pnm(std::string_view bytes);
Image load_image(const std::filesystem::path& path);
std::string encode_pnm(const Image& img);
void save_image(const Image& img, const std::filesystem::path& path);

inline constexpr int kSingleCrop = 255;

struct FeatureRecord {
    std::string sample_id;
    PatchId patch_id = PatchId::face;
    int crop_id = kSingleCrop;  // 0..9, or kSingleCrop
    std::vector<double> values;
    FeatureKind feature_kind = FeatureKind::deep;
};

/// Feature-record file: one JSON header line {"count","dim","feature_kind"}
/// followed by `count` rows of: u16 LE id length, id bytes, patch byte,
/// crop byte, `dim` little-endian float32 values.
std::vector<FeatureRecord> decode_feature_records(std::string_view bytes);
std::vector<FeatureRecord> load_feature_records(const std::filesystem::path& path);
std::string encode_feature_records(const std::vector<FeatureRecord>& records);
void save_feature_records(const std::vector<FeatureRecord>& records, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fer::io
