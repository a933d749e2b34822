#include "fer/synth.hpp"

#include <cmath>
#include <cstdio>

namespace fer::synth {

namespace {

// Columns are an orthonormal basis of a random subspace.
Matrix random_basis(std::size_t ambient, std::size_t latent, Rng& rng) {
    Matrix b(static_cast<Eigen::Index>(ambient), static_cast<Eigen::Index>(latent));
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        for (Eigen::Index p = 0; p < c; ++p) b.col(c) -= b.col(p).dot(b.col(c)) * b.col(p);
        b.col(c).normalize();
    }
    return b;
}

}  // namespace

SynthDataset make_synthetic(const SynthConfig& cfg) {
    const std::size_t J = kSynthLabels.size();
    if (cfg.samples < J) throw InputError("synthetic dataset needs at least one sample per class");
    if (cfg.latent_dim < 2 || cfg.ambient_dim < cfg.latent_dim) throw InputError("synthetic: bad dimensions");
    if (!(cfg.separation > 0.0)) throw InputError("synthetic: separation must be positive");

    SynthDataset out;
    out.manifest.label_names = kSynthLabels;
    out.manifest.source_name = "synthetic";
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "s%04zu", i);
        char actor[32];
        std::snprintf(actor, sizeof actor, "a%03zu", i / J);
        io::ManifestEntry e;
        e.sample_id = id;
        e.image_path = std::string("images/") + id + ".pgm";
        e.label = static_cast<int>(i % J);
        e.actor_id = actor;
        out.manifest.entries.push_back(std::move(e));
    }

    Rng rng(cfg.seed);
    const auto D = static_cast<Eigen::Index>(cfg.ambient_dim);
    const auto d = static_cast<Eigen::Index>(cfg.latent_dim);
    for (PatchId p : kCanonicalPatches) {
        const Matrix basis = random_basis(cfg.ambient_dim, cfg.latent_dim, rng);
        std::vector<Vector> means;
        for (std::size_t c = 0; c < J; ++c) {
            Vector z(d);
            for (Eigen::Index k = 0; k < d; ++k) z(k) = cfg.separation * rng.normal();
            means.push_back(basis * z);
        }
        for (const auto& e : out.manifest.entries) {
            Vector x = means[static_cast<std::size_t>(e.label)];
            for (Eigen::Index k = 0; k < D; ++k) x(k) += rng.normal();
            io::FeatureRecord rec;
            rec.sample_id = e.sample_id;
            rec.patch_id = p;
            rec.crop_id = io::kSingleCrop;
            rec.feature_kind = FeatureKind::raw;
            // float32 storage; round here so in-memory and on-disk data agree
            rec.values.resize(cfg.ambient_dim);
            for (Eigen::Index k = 0; k < D; ++k) rec.values[static_cast<std::size_t>(k)] = static_cast<float>(x(k));
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace fer::synth
