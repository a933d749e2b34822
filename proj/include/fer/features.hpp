#pragma once

#include "fer/common.hpp"
#include "fer/data_io.hpp"
#include "fer/image.hpp"

#include <array>
#include <map>
#include <span>
#include <vector>

namespace fer::features {

struct FeatureVector {
    std::vector<double> values;
    FeatureKind feature_kind = FeatureKind::deep;
    PatchId patch_id = PatchId::face;
};

inline constexpr int kTenCropInput = 256;
inline constexpr int kTenCropSize = 227;

/// Ten crops: four corners and center of the image, then the same five
/// windows taken from its horizontal mirror.
struct CropSet {
    std::array<Image, 10> crops;
    std::array<std::pair<int, int>, 10> origins;
    std::array<bool, 10> flipped{};
};

CropSet ten_crop(const Image& image);

/// Elementwise mean of exactly 10 equal-length vectors.
std::vector<double> average_crops(std::span<const std::vector<double>> crops);

/// v / ||v||; throws NumericalError for the zero vector.
std::vector<double> l2_normalize(std::span<const double> v);

/// Grayscale, resized to out_w x out_h, flattened row-major and scaled to [0, 1].
FeatureVector raw_pixel_features(const Image& patch, int out_w = 32, int out_h = 32, PatchId id = PatchId::face);

struct LbpConfig {
    int neighbors = 8;
    double radius = 2.0;
    int grid_rows = 7;
    int grid_cols = 6;
};

inline constexpr int kLbpBins = 59;

void validate(const LbpConfig& cfg);

std::uint8_t lbp_code(const Image& gray, int x, int y, const LbpConfig& cfg);

/// At most two circular 0/1 transitions.
bool is_uniform_pattern(std::uint8_t code);

/// Maps a code to its histogram bin: uniform patterns in ascending code
/// order take bins 0..57, every non-uniform code lands in bin 58.
const std::array<int, 256>& uniform_bin_table();

/// Integer per-cell bin counts, row-major over the grid, 59 per cell.
/// Cells partition the patch by pixel position; only pixels whose whole
/// sampling circle lies inside the patch are coded.
std::vector<std::uint32_t> lbp_grid_counts(const Image& patch, const LbpConfig& cfg);

/// lbp_grid_counts with every cell normalized to sum 1.
FeatureVector lbp_grid_histogram(const Image& patch, const LbpConfig& cfg = {}, PatchId id = PatchId::face);

/// Concatenates parts that must appear in canonical patch order.
FeatureVector concat_parts(std::span<const FeatureVector> parts);

/// As above, additionally requiring exactly `expected` patches.
FeatureVector concat_parts(std::span<const FeatureVector> parts, std::span<const PatchId> expected);

/// Per-patch sample matrices assembled from feature records.
struct FeatureTable {
    FeatureKind kind = FeatureKind::deep;
    std::vector<std::string> sample_ids;
    std::vector<PatchId> patches;
    std::map<PatchId, Matrix> per_patch;  ///< n x D_p, rows in sample_ids order
};

/// Collapses records to one vector per (sample, patch): ten crop records are
/// averaged; deep vectors are then L2-normalized. Errors name the missing
/// (sample, patch) pair.
FeatureTable assemble_features(const std::vector<io::FeatureRecord>& records,
                               const std::vector<std::string>& sample_ids, const std::vector<PatchId>& patches);

}  // namespace fer::features
