#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fer {

/// Row-major so each row is one sample and row access is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Malformed or inconsistent input (files, arguments, preconditions). CLI exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure (non-convergence, divergence, underflow). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PatchId : std::uint8_t { face = 0, left_eye = 1, right_eye = 2, mouth = 3 };

inline constexpr std::array<PatchId, 4> kCanonicalPatches = {
    PatchId::face, PatchId::left_eye, PatchId::right_eye, PatchId::mouth};

enum class FeatureKind : std::uint8_t { raw = 0, lbp = 1, deep = 2 };

std::string_view to_string(PatchId p);
std::string_view to_string(FeatureKind k);
PatchId parse_patch_id(std::string_view s);
FeatureKind parse_feature_kind(std::string_view s);

/// Parses "face,left_eye,..." into patch ids (input order kept).
std::vector<PatchId> parse_patch_list(std::string_view csv);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// splitmix64 finalizer; used to derive per-tree / per-fold seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Deterministic RNG with portable distributions (the std:: distributions
/// are implementation-defined, which would break byte-identical reports).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    double normal();

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = index(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::uint64_t state_;
    std::optional<double> spare_normal_;
};

}  // namespace fer
