#include "meib/synth_gen.hpp"

#include <cmath>

#include "meib/data_io.hpp"
#include "meib/errors.hpp"
#include "meib/rng.hpp"

namespace meib {

namespace {

/// Pool of extra features: n_positive rows around +1, the rest around -1,
/// handed out to samples via the permutation.
DenseMatrix extra_features(Rng& rng, int total, int n_positive, int dim) {
    DenseMatrix pool(total, dim);
    for (int r = 0; r < total; ++r) {
        const double mean = r < n_positive ? 1.0 : -1.0;
        for (int c = 0; c < dim; ++c) pool(r, c) = rng.gaussian(mean, 1.0);
    }
    return pool;
}

DenseMatrix permute_rows(const DenseMatrix& m, const std::vector<int>& perm) {
    return m.select_rows(perm);
}

} // namespace

double noise_level(const DenseMatrix& clean_view, double a) {
    if (clean_view.size() == 0) throw DimensionError("noise_level: empty matrix");
    return a * clean_view.max_abs();
}

SynthDataset generate(const SynthConfig& cfg) {
    if (cfg.samples_per_class < 3)
        throw ConfigError("generate: samples_per_class must be >= 3");
    if (cfg.latent_dim < 1 || cfg.extra_dim < 1)
        throw ConfigError("generate: dimensions must be >= 1");
    if (cfg.noise_factor < 0.0) throw ConfigError("generate: noise_factor must be >= 0");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw ConfigError("generate: train_fraction must lie in (0, 1)");

    const int s = cfg.samples_per_class;
    const int total = 2 * s;
    Rng rng(cfg.seed);

    // Shared latent: first s rows class 0 around +0.5, next s class 1 around -0.5.
    DenseMatrix z(total, cfg.latent_dim);
    for (int r = 0; r < total; ++r) {
        const double mean = r < s ? 0.5 : -0.5;
        for (int c = 0; c < cfg.latent_dim; ++c) z(r, c) = rng.gaussian(mean, 1.0);
    }

    // Group sizes 2s/3 and s/3 rounded to the nearest integer, exact whenever
    // s is divisible by 3.
    const int pos1 = static_cast<int>(std::lround(2.0 * s / 3.0));
    const int pos2 = static_cast<int>(std::lround(s / 3.0));
    DenseMatrix ext1 = extra_features(rng, total, pos1, cfg.extra_dim);
    DenseMatrix ext2 = extra_features(rng, total, pos2, cfg.extra_dim);
    ext1 = permute_rows(ext1, rng.permutation(total));
    ext2 = permute_rows(ext2, rng.permutation(total));

    auto concat_view = [&](const DenseMatrix& extra) { return hconcat({z, extra}); };

    DenseMatrix clean1 = concat_view(ext1);
    for (double& v : clean1.data()) v = std::tanh(std::tanh(v)) + 0.1;
    DenseMatrix clean2 = concat_view(ext2);
    for (double& v : clean2.data()) v = 1.0 / (1.0 + std::exp(-v)) - 0.5;

    auto add_noise = [&](DenseMatrix view) {
        if (cfg.noise_factor == 0.0) return view; // exact clean views, no draws
        const double t = noise_level(view, cfg.noise_factor);
        const double stddev = cfg.noise_is_variance ? std::sqrt(t) : t;
        for (double& v : view.data()) v += rng.gaussian(0.0, stddev);
        return view;
    };

    MultiViewBatch all;
    all.views.push_back(add_noise(std::move(clean1)));
    all.views.push_back(add_noise(std::move(clean2)));
    all.labels.assign(total, 0);
    for (int r = s; r < total; ++r) all.labels[r] = 1;

    SynthDataset dataset;
    dataset.provenance = cfg;
    auto [train, test] = stratified_split(all, cfg.train_fraction, rng.next_u64());
    dataset.train = std::move(train);
    dataset.test = std::move(test);
    return dataset;
}

} // namespace meib
