#include "meib/nn.hpp"

#include <algorithm>
#include <cmath>

#include "meib/errors.hpp"
#include "meib/rng.hpp"

namespace meib {

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    throw ConfigError("unknown activation enum value");
}

namespace {

double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

/// Derivative from the pre-activation value.
double activation_derivative(Activation a, double preact) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::relu: return preact > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            const double t = std::tanh(preact);
            return 1.0 - t * t;
        }
        case Activation::sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-preact));
            return s * (1.0 - s);
        }
    }
    return 1.0;
}

void check_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw ConfigError("Mlp: needs at least one layer");
    for (std::size_t l = 0; l < specs.size(); ++l) {
        if (specs[l].in_dim < 1 || specs[l].out_dim < 1)
            throw ConfigError("Mlp: layer dimensions must be >= 1");
        if (l > 0 && specs[l].in_dim != specs[l - 1].out_dim)
            throw ConfigError("Mlp: chained layer dimensions inconsistent");
    }
}

} // namespace

std::vector<DenseMatrix*> Mlp::params() {
    std::vector<DenseMatrix*> p;
    for (int l = 0; l < layer_count(); ++l) {
        p.push_back(&weights[l]);
        p.push_back(&biases[l]);
    }
    return p;
}

std::vector<const DenseMatrix*> Mlp::params() const {
    std::vector<const DenseMatrix*> p;
    for (int l = 0; l < layer_count(); ++l) {
        p.push_back(&weights[l]);
        p.push_back(&biases[l]);
    }
    return p;
}

std::vector<const DenseMatrix*> MlpGradients::params() const {
    std::vector<const DenseMatrix*> p;
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
        p.push_back(&d_weights[l]);
        p.push_back(&d_biases[l]);
    }
    return p;
}

Mlp init_params(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    check_specs(specs);
    Rng rng(seed);
    Mlp mlp;
    mlp.specs = specs;
    for (const LayerSpec& spec : specs) {
        const double fan_in = spec.in_dim;
        const double fan_out = spec.out_dim;
        const double limit = spec.activation == Activation::relu
                                 ? std::sqrt(6.0 / fan_in)
                                 : std::sqrt(6.0 / (fan_in + fan_out));
        DenseMatrix w(spec.out_dim, spec.in_dim);
        for (double& v : w.data()) v = rng.uniform(-limit, limit);
        mlp.weights.push_back(std::move(w));
        mlp.biases.emplace_back(1, spec.out_dim, 0.0);
    }
    return mlp;
}

ForwardTrace forward(const Mlp& mlp, const DenseMatrix& x) {
    if (x.cols() != mlp.in_dim())
        throw DimensionError("forward: input has " + std::to_string(x.cols()) +
                             " columns, network expects " + std::to_string(mlp.in_dim()));
    ForwardTrace trace;
    trace.inputs.push_back(x);
    for (int l = 0; l < mlp.layer_count(); ++l) {
        const LayerSpec& spec = mlp.specs[l];
        DenseMatrix pre = matmul_nt(trace.inputs.back(), mlp.weights[l]);
        for (int i = 0; i < pre.rows(); ++i)
            for (int j = 0; j < pre.cols(); ++j) pre(i, j) += mlp.biases[l](0, j);
        DenseMatrix act(pre.rows(), pre.cols());
        for (std::size_t k = 0; k < pre.data().size(); ++k)
            act.data()[k] = apply_activation(spec.activation, pre.data()[k]);
        trace.preacts.push_back(std::move(pre));
        if (l + 1 < mlp.layer_count())
            trace.inputs.push_back(std::move(act));
        else
            trace.output = std::move(act);
    }
    return trace;
}

MlpGradients backward(const Mlp& mlp, const ForwardTrace& trace, const DenseMatrix& upstream) {
    const int layers = mlp.layer_count();
    if (static_cast<int>(trace.preacts.size()) != layers ||
        static_cast<int>(trace.inputs.size()) != layers)
        throw DimensionError("backward: trace does not match network depth");
    if (!upstream.same_shape(trace.output))
        throw DimensionError("backward: upstream gradient shape mismatch");

    MlpGradients grads;
    grads.d_weights.resize(layers);
    grads.d_biases.resize(layers);

    DenseMatrix delta = upstream;
    for (int l = layers - 1; l >= 0; --l) {
        const LayerSpec& spec = mlp.specs[l];
        const DenseMatrix& pre = trace.preacts[l];
        for (std::size_t k = 0; k < delta.data().size(); ++k)
            delta.data()[k] *= activation_derivative(spec.activation, pre.data()[k]);

        grads.d_weights[l] = matmul_tn(delta, trace.inputs[l]);
        DenseMatrix db(1, spec.out_dim, 0.0);
        for (int i = 0; i < delta.rows(); ++i)
            for (int j = 0; j < delta.cols(); ++j) db(0, j) += delta(i, j);
        grads.d_biases[l] = std::move(db);

        delta = matmul(delta, mlp.weights[l]); // gradient w.r.t. layer input
    }
    grads.d_input = std::move(delta);
    return grads;
}

SoftmaxCeResult softmax_cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels) {
    const int n = logits.rows();
    const int c = logits.cols();
    if (static_cast<int>(labels.size()) != n)
        throw DimensionError("softmax_cross_entropy: label count mismatch");
    for (int label : labels)
        if (label < 0 || label >= c)
            throw ConfigError("softmax_cross_entropy: label " + std::to_string(label) +
                              " outside [0, " + std::to_string(c) + ")");
    if (n == 0) throw DimensionError("softmax_cross_entropy: empty batch");

    SoftmaxCeResult result;
    result.d_logits = DenseMatrix(n, c);
    double loss = 0.0;
    const double inv_n = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        double row_max = logits(i, 0);
        for (int j = 1; j < c; ++j) row_max = std::max(row_max, logits(i, j));
        double sum_exp = 0.0;
        for (int j = 0; j < c; ++j) sum_exp += std::exp(logits(i, j) - row_max);
        const double lse = row_max + std::log(sum_exp);
        loss += lse - logits(i, labels[i]);
        for (int j = 0; j < c; ++j) {
            const double p = std::exp(logits(i, j) - lse);
            result.d_logits(i, j) = (p - (j == labels[i] ? 1.0 : 0.0)) * inv_n;
        }
    }
    result.loss = loss * inv_n;
    return result;
}

OptimizerState OptimizerState::sgd(double lr) {
    OptimizerState s;
    s.kind = Kind::sgd;
    s.learning_rate = lr;
    return s;
}

OptimizerState OptimizerState::adam(double lr) {
    OptimizerState s;
    s.kind = Kind::adam;
    s.learning_rate = lr;
    return s;
}

void optimizer_step(OptimizerState& state, const std::vector<DenseMatrix*>& params,
                    const std::vector<const DenseMatrix*>& grads) {
    if (params.size() != grads.size())
        throw DimensionError("optimizer_step: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i]->same_shape(*grads[i]))
            throw DimensionError("optimizer_step: shape mismatch at tensor " + std::to_string(i));

    if (state.kind == OptimizerState::Kind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i]->data();
            const auto& g = grads[i]->data();
            for (std::size_t k = 0; k < p.size(); ++k) p[k] -= state.learning_rate * g[k];
        }
        ++state.step;
        return;
    }

    if (state.m.empty()) {
        for (const DenseMatrix* p : params) {
            state.m.emplace_back(p->rows(), p->cols(), 0.0);
            state.v.emplace_back(p->rows(), p->cols(), 0.0);
        }
    }
    if (state.m.size() != params.size())
        throw DimensionError("optimizer_step: moment buffers do not match parameter list");

    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i]->data();
        const auto& g = grads[i]->data();
        auto& m = state.m[i].data();
        auto& v = state.v[i].data();
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            p[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

} // namespace meib
