#include "meib/meib_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "meib/errors.hpp"
#include "meib/rng.hpp"

namespace meib {

namespace {

std::vector<LayerSpec> relu_stack(int in_dim, const std::vector<int>& widths) {
    if (widths.empty()) throw ConfigError("encoder needs at least one layer");
    std::vector<LayerSpec> specs;
    int d = in_dim;
    for (int w : widths) {
        specs.push_back({d, w, Activation::relu});
        d = w;
    }
    return specs;
}

void check_finite(const DenseMatrix& m, const std::string& stage) {
    if (!m.is_finite())
        throw NumericError("meib_loss: non-finite values at stage '" + stage + "'");
}

int argmax_row(const DenseMatrix& m, int row) {
    int best = 0;
    for (int j = 1; j < m.cols(); ++j)
        if (m(row, j) > m(row, best)) best = j; // ties keep the lowest index
    return best;
}

} // namespace

std::vector<DenseMatrix*> MeibModel::params() {
    std::vector<DenseMatrix*> all;
    for (Mlp& enc : encoders)
        for (DenseMatrix* p : enc.params()) all.push_back(p);
    for (DenseMatrix* p : fusion.params()) all.push_back(p);
    for (DenseMatrix* p : classifier.params()) all.push_back(p);
    return all;
}

std::vector<const DenseMatrix*> MeibModel::params() const {
    std::vector<const DenseMatrix*> all;
    for (const Mlp& enc : encoders)
        for (const DenseMatrix* p : enc.params()) all.push_back(p);
    for (const DenseMatrix* p : fusion.params()) all.push_back(p);
    for (const DenseMatrix* p : classifier.params()) all.push_back(p);
    return all;
}

void MeibModel::validate() const {
    if (encoders.empty()) throw ConfigError("MeibModel: no encoders");
    if (betas.size() != encoders.size())
        throw ConfigError("MeibModel: beta count must equal view count");
    for (double b : betas)
        if (b < 0.0) throw ConfigError("MeibModel: betas must be >= 0");
    int latent_total = 0;
    for (const Mlp& enc : encoders) latent_total += enc.out_dim();
    if (fusion.in_dim() != latent_total)
        throw ConfigError("MeibModel: fusion input dim does not match concatenated latents");
    if (classifier.in_dim() != fusion.out_dim())
        throw ConfigError("MeibModel: classifier input dim does not match fusion output");
}

MeibModel build_model(const MeibTopology& topology, const std::vector<double>& betas,
                      const KernelConfig& kernel_cfg, std::uint64_t seed) {
    if (topology.view_dims.size() != topology.encoder_hidden.size())
        throw ConfigError("build_model: view_dims and encoder_hidden sizes disagree");
    if (betas.size() != topology.view_dims.size())
        throw ConfigError("build_model: one beta per view required");

    Rng seeder(seed);
    MeibModel model;
    model.betas = betas;
    model.kernel_cfg = kernel_cfg;

    int latent_total = 0;
    for (std::size_t i = 0; i < topology.view_dims.size(); ++i) {
        auto specs = relu_stack(topology.view_dims[i], topology.encoder_hidden[i]);
        model.encoders.push_back(init_params(specs, seeder.next_u64()));
        latent_total += specs.back().out_dim;
    }
    model.fusion = init_params({{latent_total, topology.fusion_width, Activation::relu}},
                               seeder.next_u64());
    model.classifier = init_params({{topology.fusion_width, topology.n_classes,
                                     Activation::identity}},
                                   seeder.next_u64());
    model.validate();
    return model;
}

JointForward forward_joint(const MeibModel& model, const MultiViewBatch& batch) {
    batch.validate();
    if (batch.view_count() != model.view_count())
        throw DimensionError("forward_joint: batch has " + std::to_string(batch.view_count()) +
                             " views, model expects " + std::to_string(model.view_count()));
    JointForward fwd;
    std::vector<DenseMatrix> latents;
    for (int i = 0; i < model.view_count(); ++i) {
        fwd.encoder_traces.push_back(forward(model.encoders[i], batch.views[i]));
        latents.push_back(fwd.encoder_traces.back().output);
    }
    fwd.fused_input = hconcat(latents);
    fwd.fusion_trace = forward(model.fusion, fwd.fused_input);
    fwd.classifier_trace = forward(model.classifier, fwd.fusion_trace.output);
    return fwd;
}

std::vector<const DenseMatrix*> MeibGradients::params() const {
    std::vector<const DenseMatrix*> all;
    for (const MlpGradients& enc : encoders)
        for (const DenseMatrix* p : enc.params()) all.push_back(p);
    for (const DenseMatrix* p : fusion.params()) all.push_back(p);
    for (const DenseMatrix* p : classifier.params()) all.push_back(p);
    return all;
}

std::pair<LossReport, MeibGradients> meib_loss(const MeibModel& model,
                                               const MultiViewBatch& batch,
                                               const LossOptions& options) {
    model.validate();
    batch.validate();
    const int n = batch.sample_count();
    if (n < 2) throw ConfigError("meib_loss: mutual information needs at least 2 samples");

    JointForward fwd = forward_joint(model, batch);
    check_finite(fwd.logits(), "logits");

    const SoftmaxCeResult ce = softmax_cross_entropy(fwd.logits(), batch.labels);
    if (!std::isfinite(ce.loss)) throw NumericError("meib_loss: non-finite cross-entropy");

    LossReport report;
    report.ce = ce.loss;
    int correct = 0;
    for (int i = 0; i < n; ++i)
        if (argmax_row(fwd.logits(), i) == batch.labels[i]) ++correct;
    report.accuracy = static_cast<double>(correct) / n;

    auto fixed_sigma = [](const std::vector<std::optional<double>>& v, int i) {
        return i < static_cast<int>(v.size()) ? v[i] : std::nullopt;
    };

    std::vector<MiValueGrad> mi(model.view_count());
    double regularizer = 0.0;
    for (int i = 0; i < model.view_count(); ++i) {
        const bool needs_grad = options.want_gradients && model.betas[i] != 0.0;
        mi[i] = mi_value_and_gradient(batch.views[i], fwd.latent(i), model.kernel_cfg,
                                      fixed_sigma(options.fixed_sigma_x, i),
                                      fixed_sigma(options.fixed_sigma_z, i), needs_grad);
        report.per_view_mi.push_back(mi[i].mi);
        regularizer += model.betas[i] * mi[i].mi;
    }
    report.total = report.ce + regularizer;
    if (!std::isfinite(report.total)) throw NumericError("meib_loss: non-finite total loss");

    MeibGradients grads;
    if (options.want_gradients) {
        grads.classifier = backward(model.classifier, fwd.classifier_trace, ce.d_logits);
        grads.fusion = backward(model.fusion, fwd.fusion_trace, grads.classifier.d_input);
        check_finite(grads.fusion.d_input, "fusion input gradient");

        int offset = 0;
        grads.encoders.resize(model.view_count());
        for (int i = 0; i < model.view_count(); ++i) {
            const int latent_dim = model.encoders[i].out_dim();
            DenseMatrix upstream(n, latent_dim);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < latent_dim; ++c)
                    upstream(r, c) = grads.fusion.d_input(r, offset + c);
            if (model.betas[i] != 0.0) {
                const double beta = model.betas[i];
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < latent_dim; ++c)
                        upstream(r, c) += beta * mi[i].d_z(r, c);
            }
            grads.encoders[i] = backward(model.encoders[i], fwd.encoder_traces[i], upstream);
            check_finite(grads.encoders[i].d_weights[0],
                         "encoder " + std::to_string(i) + " gradient");
            offset += latent_dim;
        }
    }
    return {std::move(report), std::move(grads)};
}

std::vector<EpochStats> train(MeibModel& model, const MultiViewBatch& train_data,
                              const TrainConfig& config) {
    model.validate();
    train_data.validate();
    const int n = train_data.sample_count();
    if (n < 2) throw ConfigError("train: dataset needs at least 2 samples");
    if (config.batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
    if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");

    LossOptions options;
    if (config.sigma_mode == SigmaMode::per_dataset) {
        // Kernel widths for the raw views computed once on the whole training
        // set; widths for the latents stay per-batch (z moves every step).
        for (const DenseMatrix& view : train_data.views)
            options.fixed_sigma_x.push_back(
                estimate_sigma(view, model.kernel_cfg.k_nn, model.kernel_cfg.sigma_floor));
    }

    OptimizerState opt = config.optimizer == OptimizerState::Kind::sgd
                             ? OptimizerState::sgd(config.learning_rate)
                             : OptimizerState::adam(config.learning_rate);

    Rng shuffle_rng(config.shuffle_seed);
    std::vector<EpochStats> history;
    double best_loss = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<int> order = shuffle_rng.permutation(n);

        EpochStats stats;
        stats.epoch = epoch;
        stats.per_view_mi.assign(model.view_count(), 0.0);
        int seen = 0;

        for (int start = 0; start < n; start += config.batch_size) {
            const int size = std::min(config.batch_size, n - start);
            if (size < 2) break; // a single trailing sample cannot form an MI batch
            std::vector<int> idx(order.begin() + start, order.begin() + start + size);
            MultiViewBatch batch = train_data.subset(idx);

            auto [report, grads] = meib_loss(model, batch, options);
            optimizer_step(opt, model.params(), grads.params());

            stats.total += report.total * size;
            stats.ce += report.ce * size;
            stats.accuracy += report.accuracy * size;
            for (int i = 0; i < model.view_count(); ++i)
                stats.per_view_mi[i] += report.per_view_mi[i] * size;
            seen += size;
        }
        if (seen == 0) throw ConfigError("train: no usable batches");
        stats.total /= seen;
        stats.ce /= seen;
        stats.accuracy /= seen;
        for (double& v : stats.per_view_mi) v /= seen;
        history.push_back(stats);

        if (config.verbose) {
            std::fprintf(stderr, "epoch %3d  loss %.6f  ce %.6f  acc %.4f\n", epoch,
                         stats.total, stats.ce, stats.accuracy);
        }

        if (stats.total < best_loss) {
            best_loss = stats.total;
            epochs_since_best = 0;
        } else if (++epochs_since_best >= config.early_stop_patience) {
            break;
        }
    }
    return history;
}

double evaluate(const MeibModel& model, const MultiViewBatch& data) {
    data.validate();
    JointForward fwd = forward_joint(model, data);
    const int n = data.sample_count();
    int correct = 0;
    for (int i = 0; i < n; ++i)
        if (argmax_row(fwd.logits(), i) == data.labels[i]) ++correct;
    return 1.0 - static_cast<double>(correct) / n;
}

std::vector<std::vector<double>> input_weight_norms(const MeibModel& model) {
    std::vector<std::vector<double>> norms;
    for (const Mlp& enc : model.encoders) {
        const DenseMatrix& w = enc.weights.front(); // out x in
        std::vector<double> col_norms(w.cols(), 0.0);
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) col_norms[c] += w(r, c) * w(r, c);
        for (double& v : col_norms) v = std::sqrt(v);
        norms.push_back(std::move(col_norms));
    }
    return norms;
}

// ---------------------------------------------------------------------------
// Checkpoint format, version 1: 8-byte magic "MEIBCKPT", u32 version, u64
// JSON header length, JSON header, then every parameter tensor's doubles in
// declaration order (native little-endian).
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'M', 'E', 'I', 'B', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json mlp_spec_json(const Mlp& mlp) {
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& spec : mlp.specs)
        layers.push_back({{"in", spec.in_dim},
                          {"out", spec.out_dim},
                          {"activation", to_string(spec.activation)}});
    return layers;
}

std::vector<LayerSpec> mlp_spec_from_json(const nlohmann::json& layers) {
    std::vector<LayerSpec> specs;
    for (const auto& layer : layers)
        specs.push_back({layer.at("in").get<int>(), layer.at("out").get<int>(),
                         activation_from_string(layer.at("activation").get<std::string>())});
    return specs;
}

} // namespace

void save_checkpoint(const MeibModel& model, const std::string& path) {
    model.validate();
    nlohmann::json header;
    header["format_version"] = kCheckpointVersion;
    header["betas"] = model.betas;
    header["kernel"] = {{"alpha", model.kernel_cfg.alpha},
                        {"k_nn", model.kernel_cfg.k_nn},
                        {"sigma_floor", model.kernel_cfg.sigma_floor}};
    nlohmann::json encoders = nlohmann::json::array();
    for (const Mlp& enc : model.encoders) encoders.push_back(mlp_spec_json(enc));
    header["encoders"] = encoders;
    header["fusion"] = mlp_spec_json(model.fusion);
    header["classifier"] = mlp_spec_json(model.classifier);

    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kCheckpointVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t header_len = header_str.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

    for (const DenseMatrix* p : model.params())
        out.write(reinterpret_cast<const char*>(p->data().data()),
                  static_cast<std::streamsize>(p->data().size() * sizeof(double)));
    if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

MeibModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("load_checkpoint: not a MEIB checkpoint: " + path);
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (version != kCheckpointVersion)
        throw IoError("load_checkpoint: unsupported version " + std::to_string(version));
    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw IoError("load_checkpoint: truncated header in " + path);

    nlohmann::json header = nlohmann::json::parse(header_str);

    MeibModel model;
    model.betas = header.at("betas").get<std::vector<double>>();
    model.kernel_cfg.alpha = header.at("kernel").at("alpha").get<double>();
    model.kernel_cfg.k_nn = header.at("kernel").at("k_nn").get<int>();
    model.kernel_cfg.sigma_floor = header.at("kernel").at("sigma_floor").get<double>();
    for (const auto& enc : header.at("encoders"))
        model.encoders.push_back(init_params(mlp_spec_from_json(enc), 0));
    model.fusion = init_params(mlp_spec_from_json(header.at("fusion")), 0);
    model.classifier = init_params(mlp_spec_from_json(header.at("classifier")), 0);

    for (DenseMatrix* p : model.params()) {
        in.read(reinterpret_cast<char*>(p->data().data()),
                static_cast<std::streamsize>(p->data().size() * sizeof(double)));
    }
    if (!in) throw IoError("load_checkpoint: truncated parameters in " + path);
    char extra;
    if (in.read(&extra, 1)) throw IoError("load_checkpoint: trailing bytes in " + path);
    model.validate();
    return model;
}

} // namespace meib
