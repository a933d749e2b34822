#pragma once

#include "fer/data_io.hpp"

#include <vector>

namespace fer::synth {

/// Per patch, the class means are drawn inside a random `latent_dim`
/// dimensional subspace of R^ambient_dim; samples add unit isotropic noise
/// in all ambient dimensions.
struct SynthConfig {
    std::size_t samples = 600;
    std::size_t latent_dim = 5;
    std::size_t ambient_dim = 128;
    double separation = 1.5;  ///< sd of the class-mean coordinates, in noise units
    std::uint64_t seed = 1;
};

inline const std::vector<std::string> kSynthLabels = {"An", "Ds", "Fr", "Hp", "Sd", "Sp"};

struct SynthDataset {
    io::DatasetManifest manifest;
    std::vector<io::FeatureRecord> records;  ///< one single-crop raw record per (sample, patch)
};

/// Sample i has label i mod 6 and actor i / 6, so the single-peak rule holds.
SynthDataset make_synthetic(const SynthConfig& cfg);

}  // namespace fer::synth
