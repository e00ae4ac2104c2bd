#pragma once

#include <cstdint>

#include "meib/multiview.hpp"

namespace meib {

/// Settings for the two-view synthetic benchmark.
struct SynthConfig {
    int samples_per_class = 500;
    int latent_dim = 20;
    int extra_dim = 5;
    double noise_factor = 0.0; ///< a; noise level t = a * max|clean view|
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    /// N(0, t*I) read with t as the variance (false: t as the std deviation).
    bool noise_is_variance = true;
};

struct SynthDataset {
    MultiViewBatch train;
    MultiViewBatch test;
    SynthConfig provenance;
};

/**
 * Two-view synthetic classification data.
 *
 * Shared latent Z (2s x latent_dim): class 0 rows ~ N(+0.5*1, I), class 1
 * rows ~ N(-0.5*1, I). Per view, extra distractor features ext_i are drawn
 * in two groups (view 1: ~2s/3 rows from N(+1, I), rest from N(-1, I);
 * view 2: ~s/3 from N(+1, I), rest from N(-1, I)) and assigned to samples
 * through a seeded permutation so group membership does not align with the
 * class. Clean views are c1 = tanh(tanh([Z, ext_1])) + 0.1 and
 * c2 = sigmoid([Z, ext_2]) - 0.5; each view then gets elementwise Gaussian
 * noise with t_i = a * max|c_i|. Finally a stratified train/test split.
 *
 * Draw order (one generator seeded from cfg.seed): Z row-major, ext pool 1,
 * ext pool 2, permutation 1, permutation 2, noise 1, noise 2 (skipped when
 * a = 0), split seed. Identical configs produce bit-identical datasets.
 */
SynthDataset generate(const SynthConfig& cfg);

/// t = a * max entry of |clean_view|. Throws DimensionError on empty input.
double noise_level(const DenseMatrix& clean_view, double a);

} // namespace meib
