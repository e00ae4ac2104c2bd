#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meib/data_io.hpp"
#include "meib/errors.hpp"
#include "meib/harness.hpp"
#include "meib/meib_model.hpp"
#include "meib/synth_gen.hpp"

namespace {

using namespace meib;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> repeats;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config (see README)");
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "seed base (overrides config)");
    cmd->add_option("--repeats", opts.repeats, "repeat count (overrides config)");
    cmd->add_option("--threads", opts.threads, "worker threads, 0 = all cores");
}

ExperimentConfig resolve_config(const CommonOptions& opts, ExperimentKind kind) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = load_experiment_config(opts.config_path);
    cfg.kind = kind;
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.seed) cfg.seed_base = *opts.seed;
    if (opts.repeats) cfg.repeats = *opts.repeats;
    if (opts.threads) cfg.threads = *opts.threads;
    cfg.validate();
    return cfg;
}

void print_summary(const SweepResult& result) {
    struct Key {
        double v1, v2;
        std::string method;
        bool operator<(const Key& o) const {
            if (v1 != o.v1) return v1 < o.v1;
            if (v2 != o.v2) return v2 < o.v2;
            return method < o.method;
        }
    };
    std::map<Key, std::pair<double, int>> acc;
    for (const ResultRow& row : result.rows) {
        auto& [sum, n] = acc[{row.value1, row.value2, row.method}];
        sum += row.test_error;
        ++n;
    }
    for (const auto& [key, agg] : acc)
        std::printf("  value=(%g, %g)  %-5s  mean error %.4f  (n=%d)\n", key.v1, key.v2,
                    key.method.c_str(), agg.first / agg.second, agg.second);
}

int run_sweep(const CommonOptions& opts, ExperimentKind kind) {
    ExperimentConfig cfg = resolve_config(opts, kind);
    SweepResult result = run_experiment(cfg);
    emit_results(result, cfg, cfg.output_dir);
    std::printf("%s: %zu result rows -> %s\n", to_string(kind).c_str(), result.rows.size(),
                cfg.output_dir.c_str());
    print_summary(result);
    return 0;
}

int run_train(const CommonOptions& opts, bool verbose) {
    ExperimentConfig cfg = resolve_config(opts, ExperimentKind::single_train);
    SynthConfig data_cfg;
    data_cfg.samples_per_class = cfg.samples_per_class;
    data_cfg.latent_dim = cfg.latent_dim;
    data_cfg.extra_dim = cfg.extra_dim;
    data_cfg.noise_factor = cfg.noise_factor;
    data_cfg.train_fraction = cfg.train_fraction;
    data_cfg.seed = cell_data_seed(cfg.seed_base, 0, 0);
    SynthDataset data = generate(data_cfg);

    if (verbose)
        std::printf("training on %d samples (%d test), views %dd/%dd\n",
                    data.train.sample_count(), data.test.sample_count(),
                    data.train.views[0].cols(), data.train.views[1].cols());

    TrainRunResult run =
        run_single_train(cfg, data, cfg.betas, cell_init_seed(cfg.seed_base, 0, 0));

    std::filesystem::create_directories(cfg.output_dir);
    const std::string ckpt = cfg.output_dir + "/model.ckpt";
    save_checkpoint(run.model, ckpt);
    save_experiment_config(cfg, cfg.output_dir + "/config.json");

    std::ofstream hist(cfg.output_dir + "/history.csv");
    hist << "epoch,total,ce,accuracy";
    for (std::size_t v = 0; v < cfg.betas.size(); ++v) hist << ",mi_view" << v + 1;
    hist << "\n";
    for (const EpochStats& e : run.history) {
        hist << e.epoch << ',' << format_double(e.total) << ',' << format_double(e.ce) << ','
             << format_double(e.accuracy);
        for (double mi : e.per_view_mi) hist << ',' << format_double(mi);
        hist << "\n";
    }

    std::printf("trained %zu epochs, wall %.0f ms\n", run.history.size(), run.wall_ms);
    std::printf("test error: %.4f\n", run.test_error);
    std::printf("checkpoint: %s\n", ckpt.c_str());
    return 0;
}

int run_eval(const std::string& model_path, const std::vector<std::string>& view_paths,
             const std::string& label_column, const CommonOptions& opts) {
    MeibModel model = load_checkpoint(model_path);
    MultiViewBatch batch;
    if (!view_paths.empty()) {
        CsvViewSpec spec;
        spec.paths = view_paths;
        spec.label_column = label_column;
        batch = load_multiview_csv(spec);
    } else {
        ExperimentConfig cfg = resolve_config(opts, ExperimentKind::single_train);
        SynthConfig data_cfg;
        data_cfg.samples_per_class = cfg.samples_per_class;
        data_cfg.latent_dim = cfg.latent_dim;
        data_cfg.extra_dim = cfg.extra_dim;
        data_cfg.noise_factor = cfg.noise_factor;
        data_cfg.train_fraction = cfg.train_fraction;
        data_cfg.seed = cell_data_seed(cfg.seed_base, 0, 0);
        batch = generate(data_cfg).test;
    }
    std::printf("test error: %.6f on %d samples\n", evaluate(model, batch),
                batch.sample_count());
    return 0;
}

int run_gen_data(const CommonOptions& opts) {
    ExperimentConfig cfg = resolve_config(opts, ExperimentKind::single_train);
    SynthConfig data_cfg;
    data_cfg.samples_per_class = cfg.samples_per_class;
    data_cfg.latent_dim = cfg.latent_dim;
    data_cfg.extra_dim = cfg.extra_dim;
    data_cfg.noise_factor = cfg.noise_factor;
    data_cfg.train_fraction = cfg.train_fraction;
    data_cfg.seed = cfg.seed_base;
    SynthDataset data = generate(data_cfg);

    std::filesystem::create_directories(cfg.output_dir);
    export_multiview_csv(data.train,
                         {cfg.output_dir + "/train_view1.csv", cfg.output_dir + "/train_view2.csv"});
    export_multiview_csv(data.test,
                         {cfg.output_dir + "/test_view1.csv", cfg.output_dir + "/test_view2.csv"});
    save_experiment_config(cfg, cfg.output_dir + "/config.json");
    std::printf("wrote %d train / %d test samples to %s\n", data.train.sample_count(),
                data.test.sample_count(), cfg.output_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MEIB: multi-view entropy information bottleneck experiments"};
    app.require_subcommand(1);

    CommonOptions noise_opts, dim_opts, sample_opts, grid_opts, train_opts, eval_opts, gen_opts;

    auto* noise = app.add_subcommand("noise-sweep", "classification error vs noise level");
    add_common(noise, noise_opts);
    auto* dim = app.add_subcommand("dim-sweep", "error vs redundant dimensions + weight norms");
    add_common(dim, dim_opts);
    auto* sample = app.add_subcommand("sample-sweep", "error vs per-class sample size");
    add_common(sample, sample_opts);
    auto* grid = app.add_subcommand("beta-grid", "error over the (beta1, beta2) grid");
    add_common(grid, grid_opts);

    bool train_verbose = false;
    auto* train_cmd = app.add_subcommand("train", "single training run, saves a checkpoint");
    add_common(train_cmd, train_opts);
    train_cmd->add_flag("--verbose", train_verbose, "per-epoch progress");

    std::string eval_model, eval_label_column = "label";
    std::vector<std::string> eval_views;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(eval_cmd, eval_opts);
    eval_cmd->add_option("--model", eval_model, "checkpoint file")->required();
    eval_cmd->add_option("--view", eval_views, "CSV file per view (else synthetic test split)");
    eval_cmd->add_option("--label-column", eval_label_column, "label column name");

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset as CSV");
    add_common(gen, gen_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (noise->parsed()) return run_sweep(noise_opts, ExperimentKind::noise_sweep);
        if (dim->parsed()) return run_sweep(dim_opts, ExperimentKind::dim_sweep);
        if (sample->parsed()) return run_sweep(sample_opts, ExperimentKind::sample_sweep);
        if (grid->parsed()) return run_sweep(grid_opts, ExperimentKind::beta_grid);
        if (train_cmd->parsed()) return run_train(train_opts, train_verbose);
        if (eval_cmd->parsed()) return run_eval(eval_model, eval_views, eval_label_column, eval_opts);
        if (gen->parsed()) return run_gen_data(gen_opts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
