#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meib/kernel_entropy.hpp"
#include "meib/meib_model.hpp"
#include "meib/synth_gen.hpp"

namespace meib {

enum class ExperimentKind { noise_sweep, dim_sweep, sample_sweep, beta_grid, single_train };

ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

/**
 * One sweep specification. Serialized to/from a versioned JSON config file;
 * every field has a default so a config only names what it overrides.
 */
struct ExperimentConfig {
    int version = 1;
    ExperimentKind kind = ExperimentKind::noise_sweep;
    std::string name; ///< label written to results.csv; defaults to the kind

    /// Sweep axis: noise factors a, extra dimensions, or sample sizes.
    std::vector<double> sweep_values;
    /// beta values forming the Cartesian grid (beta_grid kind only).
    std::vector<double> beta_grid;
    /// MEIB betas per view for non-grid experiments.
    std::vector<double> betas = {5e-3, 5e-3};

    // Data generation.
    int samples_per_class = 500;
    int latent_dim = 20;
    int extra_dim = 5;
    double noise_factor = 1.0;
    double train_fraction = 0.8;

    // Model.
    std::vector<std::vector<int>> encoder_hidden = {{512, 512, 512}, {512}};
    int fusion_width = 256;
    int n_classes = 10;
    KernelConfig kernel;
    SigmaMode sigma_mode = SigmaMode::per_batch;

    // Training.
    int epochs = 100;
    int batch_size = 100;
    double learning_rate = 1e-3;
    std::string optimizer = "adam";
    int early_stop_patience = 20;

    // Sweep bookkeeping.
    int repeats = 5;
    std::uint64_t seed_base = 0;
    std::string output_dir = "results";
    int threads = 0; ///< 0 = hardware concurrency

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);

/// One trained cell of a sweep.
struct ResultRow {
    std::string experiment;
    std::string kind;
    double value1 = 0.0; ///< sweep value (a, extra_dim, s, or beta_1)
    double value2 = 0.0; ///< beta_2 for grids, 0 otherwise
    std::uint64_t seed = 0;
    std::string method; ///< MEIB or DNN
    double test_error = 0.0;
    std::vector<double> mi_views; ///< final per-view I(X_i;Z_i), bits
    double wall_ms = 0.0;
};

/// First-encoder-layer column norms recorded by the dimension sweep.
struct WeightNormRow {
    std::uint64_t seed = 0;
    std::string method;
    int view = 0;
    int dim_index = 0; ///< 0-based input dimension
    double norm = 0.0;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<WeightNormRow> weight_norms;
};

SweepResult run_noise_sweep(const ExperimentConfig& cfg);
SweepResult run_dim_sweep(const ExperimentConfig& cfg);
SweepResult run_sample_sweep(const ExperimentConfig& cfg);
SweepResult run_beta_grid(const ExperimentConfig& cfg);

/// Dispatch on cfg.kind.
SweepResult run_experiment(const ExperimentConfig& cfg);

/// Single training run: returns the trained model, its per-epoch history and
/// the test error. Used by the `train` subcommand and the sweep cells.
struct TrainRunResult {
    MeibModel model;
    std::vector<EpochStats> history;
    double test_error = 0.0;
    double wall_ms = 0.0;
};
TrainRunResult run_single_train(const ExperimentConfig& cfg, const SynthDataset& data,
                                const std::vector<double>& betas, std::uint64_t init_seed);

/**
 * Writes results.csv, summary.csv (mean/std per cell), plotdata_*.csv and a
 * config snapshot into `dir`; weight_norms.csv when the sweep recorded any.
 */
void emit_results(const SweepResult& result, const ExperimentConfig& cfg, const std::string& dir);

/// Deterministic per-cell seeds: data and initialization streams decoupled.
std::uint64_t cell_data_seed(std::uint64_t seed_base, int value_index, int repeat);
std::uint64_t cell_init_seed(std::uint64_t seed_base, int value_index, int repeat);

} // namespace meib
