#include "fer/features.hpp"

#include "fer/geometry.hpp"
#include "fer/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace fer::features {

CropSet ten_crop(const Image& image) {
    validate(image);
    if (image.width != kTenCropInput || image.height != kTenCropInput) {
        throw InputError("ten_crop expects a 256x256 image, got " + std::to_string(image.width) + "x" +
                         std::to_string(image.height));
    }
    constexpr int far = kTenCropInput - kTenCropSize;  // 29
    constexpr int mid = far / 2;                       // 14
    constexpr std::array<std::pair<int, int>, 5> windows = {{{0, 0}, {far, 0}, {0, far}, {far, far}, {mid, mid}}};
    const Image mirrored = flip_horizontal(image);
    CropSet set;
    for (std::size_t i = 0; i < 10; ++i) {
        const auto [x, y] = windows[i % 5];
        const bool flip = i >= 5;
        set.crops[i] = crop_window(flip ? mirrored : image, x, y, kTenCropSize, kTenCropSize);
        set.origins[i] = {x, y};
        set.flipped[i] = flip;
    }
    return set;
}

std::vector<double> average_crops(std::span<const std::vector<double>> crops) {
    if (crops.size() != 10) throw InputError("average_crops expects 10 vectors, got " + std::to_string(crops.size()));
    const std::size_t dim = crops.front().size();
    for (const auto& c : crops) {
        if (c.size() != dim) throw InputError("average_crops: crop vectors differ in length");
    }
    // summing each coordinate in sorted order makes the mean independent of crop order
    std::vector<double> sum(dim, 0.0);
    std::array<double, 10> col{};
    for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t i = 0; i < 10; ++i) col[i] = crops[i][k];
        std::sort(col.begin(), col.end());
        for (double v : col) sum[k] += v;
        sum[k] /= 10.0;
    }
    return sum;
}

std::vector<double> l2_normalize(std::span<const double> v) {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("cannot L2-normalize a zero or non-finite vector");
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x /= norm;
    return out;
}

FeatureVector raw_pixel_features(const Image& patch, int out_w, int out_h, PatchId id) {
    const Image small = geometry::resize(to_gray(patch), out_w, out_h);
    FeatureVector fv;
    fv.feature_kind = FeatureKind::raw;
    fv.patch_id = id;
    fv.values.reserve(small.pixels.size());
    for (std::uint8_t p : small.pixels) fv.values.push_back(p / 255.0);
    return fv;
}

void validate(const LbpConfig& cfg) {
    if (cfg.neighbors != 8) throw InputError("LBP requires 8 neighbors for the 59-bin uniform mapping");
    if (!(cfg.radius > 0.0)) throw InputError("LBP radius must be positive");
    if (cfg.grid_rows < 1 || cfg.grid_cols < 1) throw InputError("LBP grid must be at least 1x1");
}

std::uint8_t lbp_code(const Image& gray, int x, int y, const LbpConfig& cfg) {
    validate(cfg);
    if (!gray.is_gray()) throw InputError("lbp_code expects a grayscale image");
    const auto circle = kernels::make_lbp_circle(cfg.radius);
    if (x - circle.reach < 0 || y - circle.reach < 0 || x + circle.reach >= gray.width ||
        y + circle.reach >= gray.height) {
        throw InputError("LBP sampling circle leaves the image at (" + std::to_string(x) + "," + std::to_string(y) +
                         ")");
    }
    return kernels::lbp_code_at(gray, x, y, circle);
}

bool is_uniform_pattern(std::uint8_t code) {
    const auto rotated = static_cast<std::uint8_t>((code >> 1) | (code << 7));
    return std::popcount(static_cast<unsigned>(code ^ rotated)) <= 2;
}

const std::array<int, 256>& uniform_bin_table() {
    static const std::array<int, 256> table = [] {
        std::array<int, 256> t{};
        int next = 0;
        for (int c = 0; c < 256; ++c) t[static_cast<std::size_t>(c)] = is_uniform_pattern(static_cast<std::uint8_t>(c)) ? next++ : -1;
        for (int& v : t) {
            if (v < 0) v = kLbpBins - 1;
        }
        return t;
    }();
    return table;
}

std::vector<std::uint32_t> lbp_grid_counts(const Image& patch, const LbpConfig& cfg) {
    validate(cfg);
    const Image gray = to_gray(patch);
    const auto circle = kernels::make_lbp_circle(cfg.radius);
    const auto codes = kernels::lbp_code_map(gray, circle);
    const int r = circle.reach;
    const int iw = std::max(0, gray.width - 2 * r);
    const int ih = std::max(0, gray.height - 2 * r);
    const auto& bins = uniform_bin_table();

    std::vector<std::uint32_t> counts(static_cast<std::size_t>(cfg.grid_rows * cfg.grid_cols * kLbpBins), 0);
    // cell boundaries over the full patch: [floor(i*h/rows), floor((i+1)*h/rows))
    std::vector<int> row_of(static_cast<std::size_t>(gray.height));
    std::vector<int> col_of(static_cast<std::size_t>(gray.width));
    for (int i = 0; i < cfg.grid_rows; ++i) {
        for (long y = static_cast<long>(i) * gray.height / cfg.grid_rows;
             y < static_cast<long>(i + 1) * gray.height / cfg.grid_rows; ++y)
            row_of[static_cast<std::size_t>(y)] = i;
    }
    for (int j = 0; j < cfg.grid_cols; ++j) {
        for (long x = static_cast<long>(j) * gray.width / cfg.grid_cols;
             x < static_cast<long>(j + 1) * gray.width / cfg.grid_cols; ++x)
            col_of[static_cast<std::size_t>(x)] = j;
    }
    for (int y = 0; y < ih; ++y) {
        for (int x = 0; x < iw; ++x) {
            const int cell = row_of[static_cast<std::size_t>(y + r)] * cfg.grid_cols + col_of[static_cast<std::size_t>(x + r)];
            const std::uint8_t code = codes[static_cast<std::size_t>(y) * static_cast<std::size_t>(iw) + static_cast<std::size_t>(x)];
            ++counts[static_cast<std::size_t>(cell * kLbpBins + bins[code])];
        }
    }
    for (int cell = 0; cell < cfg.grid_rows * cfg.grid_cols; ++cell) {
        std::uint32_t total = 0;
        for (int b = 0; b < kLbpBins; ++b) total += counts[static_cast<std::size_t>(cell * kLbpBins + b)];
        if (total == 0) {
            throw InputError("LBP grid cell " + std::to_string(cell) + " contains no codable pixel (patch " +
                             std::to_string(gray.width) + "x" + std::to_string(gray.height) + " too small)");
        }
    }
    return counts;
}

FeatureVector lbp_grid_histogram(const Image& patch, const LbpConfig& cfg, PatchId id) {
    const auto counts = lbp_grid_counts(patch, cfg);
    FeatureVector fv;
    fv.feature_kind = FeatureKind::lbp;
    fv.patch_id = id;
    fv.values.resize(counts.size());
    for (std::size_t cell = 0; cell < counts.size() / kLbpBins; ++cell) {
        double total = 0.0;
        for (std::size_t b = 0; b < kLbpBins; ++b) total += counts[cell * kLbpBins + b];
        for (std::size_t b = 0; b < kLbpBins; ++b) fv.values[cell * kLbpBins + b] = counts[cell * kLbpBins + b] / total;
    }
    return fv;
}

FeatureVector concat_parts(std::span<const FeatureVector> parts) {
    if (parts.empty()) throw InputError("concat_parts: no parts");
    FeatureVector out;
    out.feature_kind = parts.front().feature_kind;
    out.patch_id = parts.front().patch_id;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0 && static_cast<int>(parts[i].patch_id) <= static_cast<int>(parts[i - 1].patch_id)) {
            throw InputError("concat_parts: parts must follow the order face, left_eye, right_eye, mouth");
        }
        if (parts[i].feature_kind != out.feature_kind) throw InputError("concat_parts: mixed feature kinds");
        out.values.insert(out.values.end(), parts[i].values.begin(), parts[i].values.end());
    }
    return out;
}

FeatureVector concat_parts(std::span<const FeatureVector> parts, std::span<const PatchId> expected) {
    for (PatchId p : expected) {
        bool found = false;
        for (const auto& part : parts) found = found || part.patch_id == p;
        if (!found) throw InputError("concat_parts: missing patch '" + std::string(to_string(p)) + "'");
    }
    if (parts.size() != expected.size()) throw InputError("concat_parts: unexpected extra patches");
    return concat_parts(parts);
}

FeatureTable assemble_features(const std::vector<io::FeatureRecord>& records,
                               const std::vector<std::string>& sample_ids, const std::vector<PatchId>& patches) {
    if (records.empty()) throw InputError("no feature records");
    FeatureTable table;
    table.kind = records.front().feature_kind;
    table.sample_ids = sample_ids;
    table.patches = patches;

    std::map<std::pair<std::string, PatchId>, std::vector<const io::FeatureRecord*>> by_key;
    for (const auto& r : records) {
        if (r.feature_kind != table.kind) throw InputError("feature records mix kinds");
        by_key[{r.sample_id, r.patch_id}].push_back(&r);
    }

    for (PatchId p : patches) {
        Matrix m;
        for (std::size_t i = 0; i < sample_ids.size(); ++i) {
            const auto it = by_key.find({sample_ids[i], p});
            if (it == by_key.end()) {
                throw InputError("missing feature record for (" + sample_ids[i] + ", " + std::string(to_string(p)) +
                                 ")");
            }
            const auto& recs = it->second;
            std::vector<double> v;
            if (recs.size() == 1 && recs.front()->crop_id == io::kSingleCrop) {
                v = recs.front()->values;
            } else if (recs.size() == 10) {
                std::vector<std::vector<double>> crops(10);
                for (const auto* r : recs) {
                    if (r->crop_id == io::kSingleCrop) {
                        throw InputError("(" + sample_ids[i] + ", " + std::string(to_string(p)) +
                                         ") mixes single and crop records");
                    }
                    crops[static_cast<std::size_t>(r->crop_id)] = r->values;
                }
                v = average_crops(crops);
            } else {
                throw InputError("(" + sample_ids[i] + ", " + std::string(to_string(p)) + ") has " +
                                 std::to_string(recs.size()) + " records; expected 1 single or 10 crops");
            }
            if (table.kind == FeatureKind::deep) v = l2_normalize(v);
            if (i == 0) m.resize(static_cast<Eigen::Index>(sample_ids.size()), static_cast<Eigen::Index>(v.size()));
            if (static_cast<Eigen::Index>(v.size()) != m.cols()) {
                throw InputError("inconsistent feature dimension for patch " + std::string(to_string(p)));
            }
            m.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        table.per_patch.emplace(p, std::move(m));
    }
    return table;
}

}  // namespace fer::features
