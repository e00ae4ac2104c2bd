#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meib/kernel_entropy.hpp"
#include "meib/multiview.hpp"
#include "meib/nn.hpp"

namespace meib {

/// Layer widths for the standard architecture: k encoders, one fusion layer
/// over the concatenated latents, one linear classifier head.
struct MeibTopology {
    std::vector<int> view_dims;                  ///< input dimension per view
    std::vector<std::vector<int>> encoder_hidden; ///< per view; last width = latent dim
    int fusion_width = 256;
    int n_classes = 10;
};

/**
 * The multi-view entropy-bottleneck model: per-view encoders, a fusion
 * network over concatenated latents, a classifier, and per-view compression
 * weights beta_i. With all beta_i = 0 this is the plain cross-entropy DNN.
 */
struct MeibModel {
    std::vector<Mlp> encoders;
    Mlp fusion;
    Mlp classifier;
    std::vector<double> betas;
    KernelConfig kernel_cfg;

    int view_count() const { return static_cast<int>(encoders.size()); }
    int class_count() const { return classifier.out_dim(); }

    /// Every parameter tensor: encoders in view order, fusion, classifier.
    std::vector<DenseMatrix*> params();
    std::vector<const DenseMatrix*> params() const;

    void validate() const;
};

/// Encoders and heads with all hidden activations ReLU and a linear logits
/// layer, initialized deterministically from the seed.
MeibModel build_model(const MeibTopology& topology, const std::vector<double>& betas,
                      const KernelConfig& kernel_cfg, std::uint64_t seed);

struct JointForward {
    std::vector<ForwardTrace> encoder_traces;
    ForwardTrace fusion_trace;
    ForwardTrace classifier_trace;
    DenseMatrix fused_input; ///< concatenated latents feeding the fusion net

    const DenseMatrix& latent(int view) const { return encoder_traces[view].output; }
    const DenseMatrix& logits() const { return classifier_trace.output; }
};

/// z_i = encoder_i(x_i); z = fusion(concat(z_1..z_k)); logits = classifier(z).
JointForward forward_joint(const MeibModel& model, const MultiViewBatch& batch);

struct LossReport {
    double total = 0.0;              ///< ce + sum_i beta_i * mi_i
    double ce = 0.0;                 ///< nats
    std::vector<double> per_view_mi; ///< bits
    double accuracy = 0.0;
};

struct MeibGradients {
    std::vector<MlpGradients> encoders;
    MlpGradients fusion;
    MlpGradients classifier;

    /// Gradient tensors matching MeibModel::params() order.
    std::vector<const DenseMatrix*> params() const;
};

struct LossOptions {
    bool want_gradients = true;
    /// Per-view kernel widths to use instead of the per-batch heuristic
    /// (per-dataset sigma mode, and frozen-width gradient checks).
    std::vector<std::optional<double>> fixed_sigma_x;
    std::vector<std::optional<double>> fixed_sigma_z;
};

/**
 * Objective CE(Y, Yhat) + sum_i beta_i I(X_i; Z_i) with full gradients. The
 * CE path flows classifier -> fusion -> encoders; each MI path flows into
 * its own encoder only. Requires N >= 2. Any non-finite intermediate raises
 * NumericError naming the offending stage.
 */
std::pair<LossReport, MeibGradients> meib_loss(const MeibModel& model,
                                               const MultiViewBatch& batch,
                                               const LossOptions& options = {});

enum class SigmaMode { per_batch, per_dataset };

struct TrainConfig {
    int epochs = 100;
    int batch_size = 100;
    OptimizerState::Kind optimizer = OptimizerState::Kind::adam;
    double learning_rate = 1e-3;
    int early_stop_patience = 20; ///< stop after this many epochs without a new best train loss
    std::uint64_t shuffle_seed = 0;
    SigmaMode sigma_mode = SigmaMode::per_batch;
    bool verbose = false;
};

struct EpochStats {
    int epoch = 0;
    double total = 0.0;
    double ce = 0.0;
    double accuracy = 0.0;
    std::vector<double> per_view_mi; ///< mean over the epoch's batches
};

/// Mini-batch training; deterministic under a fixed seed and data.
std::vector<EpochStats> train(MeibModel& model, const MultiViewBatch& train_data,
                              const TrainConfig& config);

/// Classification error = 1 - accuracy; argmax ties break to the lowest index.
double evaluate(const MeibModel& model, const MultiViewBatch& data);

/// Per view: the l2 norm of each column of the first encoder layer's weight
/// matrix, i.e. one norm per input dimension.
std::vector<std::vector<double>> input_weight_norms(const MeibModel& model);

/// Versioned binary checkpoint: JSON header (topology, betas, kernel
/// config) followed by parameter arrays in declaration order.
void save_checkpoint(const MeibModel& model, const std::string& path);
MeibModel load_checkpoint(const std::string& path);

} // namespace meib
