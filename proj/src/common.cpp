#include "fer/common.hpp"

#include <cmath>
#include <numbers>

namespace fer {

std::string_view to_string(PatchId p) {
    switch (p) {
        case PatchId::face: return "face";
        case PatchId::left_eye: return "left_eye";
        case PatchId::right_eye: return "right_eye";
        case PatchId::mouth: return "mouth";
    }
    return "?";
}

std::string_view to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::raw: return "raw";
        case FeatureKind::lbp: return "lbp";
        case FeatureKind::deep: return "deep";
    }
    return "?";
}

PatchId parse_patch_id(std::string_view s) {
    for (PatchId p : kCanonicalPatches) {
        if (to_string(p) == s) return p;
    }
    throw InputError("unknown patch id '" + std::string(s) + "'");
}

FeatureKind parse_feature_kind(std::string_view s) {
    for (FeatureKind k : {FeatureKind::raw, FeatureKind::lbp, FeatureKind::deep}) {
        if (to_string(k) == s) return k;
    }
    throw InputError("unknown feature kind '" + std::string(s) + "'");
}

std::vector<PatchId> parse_patch_list(std::string_view csv) {
    std::vector<PatchId> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t end = csv.find(',', start);
        if (end == std::string_view::npos) end = csv.size();
        std::string_view item = csv.substr(start, end - start);
        if (!item.empty()) out.push_back(parse_patch_id(item));
        start = end + 1;
    }
    if (out.empty()) throw InputError("empty patch list");
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
    if (n <= 1) return 0;
    // Lemire-style rejection to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

double Rng::normal() {
    if (spare_normal_) {
        const double v = *spare_normal_;
        spare_normal_.reset();
        return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(a);
    return r * std::cos(a);
}

}  // namespace fer
