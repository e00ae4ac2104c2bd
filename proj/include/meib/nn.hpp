#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meib/matrix.hpp"

namespace meib {

enum class Activation { identity, relu, tanh, sigmoid };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

struct LayerSpec {
    int in_dim = 0;
    int out_dim = 0;
    Activation activation = Activation::identity;
};

/**
 * Dense feed-forward network. Weight matrices are out_dim x in_dim (column j
 * carries the weights attached to input dimension j); biases are 1 x out_dim.
 */
struct Mlp {
    std::vector<LayerSpec> specs;
    std::vector<DenseMatrix> weights;
    std::vector<DenseMatrix> biases;

    int layer_count() const { return static_cast<int>(specs.size()); }
    int in_dim() const { return specs.front().in_dim; }
    int out_dim() const { return specs.back().out_dim; }

    /// Parameter tensors in declaration order: W0, b0, W1, b1, ...
    std::vector<DenseMatrix*> params();
    std::vector<const DenseMatrix*> params() const;
};

/**
 * He-uniform fan-in initialization for relu layers, Xavier-uniform
 * otherwise; biases zero. Deterministic per seed (weights drawn row-major,
 * layer by layer).
 */
Mlp init_params(const std::vector<LayerSpec>& specs, std::uint64_t seed);

/// Per-layer inputs and pre-activations retained for backprop.
struct ForwardTrace {
    std::vector<DenseMatrix> inputs;   ///< inputs[l] feeds layer l
    std::vector<DenseMatrix> preacts;  ///< x W^T + b before the nonlinearity
    DenseMatrix output;                ///< activation of the last layer
};

ForwardTrace forward(const Mlp& mlp, const DenseMatrix& x);

struct MlpGradients {
    std::vector<DenseMatrix> d_weights;
    std::vector<DenseMatrix> d_biases;
    DenseMatrix d_input;

    /// Gradient tensors in the same order as Mlp::params().
    std::vector<const DenseMatrix*> params() const;
};

/// Reverse pass: gradients for every parameter plus the input gradient.
MlpGradients backward(const Mlp& mlp, const ForwardTrace& trace, const DenseMatrix& upstream);

struct SoftmaxCeResult {
    double loss = 0.0;     ///< mean over the batch, nats
    DenseMatrix d_logits;  ///< (softmax - onehot)/N
};

/// Log-sum-exp stabilized softmax cross-entropy. Labels must lie in [0, C).
SoftmaxCeResult softmax_cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels);

struct OptimizerState {
    enum class Kind { sgd, adam };

    Kind kind = Kind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    std::vector<DenseMatrix> m; ///< first moments, lazily shaped on first step
    std::vector<DenseMatrix> v; ///< second moments
    long step = 0;

    static OptimizerState sgd(double lr);
    static OptimizerState adam(double lr);
};

/// One update over matched parameter/gradient lists.
void optimizer_step(OptimizerState& state, const std::vector<DenseMatrix*>& params,
                    const std::vector<const DenseMatrix*>& grads);

} // namespace meib
