#include "meib/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <json.hpp>

#include "meib/data_io.hpp"
#include "meib/errors.hpp"

namespace meib {

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "noise_sweep") return ExperimentKind::noise_sweep;
    if (name == "dim_sweep") return ExperimentKind::dim_sweep;
    if (name == "sample_sweep") return ExperimentKind::sample_sweep;
    if (name == "beta_grid") return ExperimentKind::beta_grid;
    if (name == "single_train") return ExperimentKind::single_train;
    throw ConfigError("unknown experiment kind: " + name);
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::noise_sweep: return "noise_sweep";
        case ExperimentKind::dim_sweep: return "dim_sweep";
        case ExperimentKind::sample_sweep: return "sample_sweep";
        case ExperimentKind::beta_grid: return "beta_grid";
        case ExperimentKind::single_train: return "single_train";
    }
    throw ConfigError("unknown experiment kind enum value");
}

void ExperimentConfig::validate() const {
    if (version != 1) throw ConfigError("config: unsupported version " + std::to_string(version));
    if (repeats < 1) throw ConfigError("config: repeats must be >= 1");
    if (encoder_hidden.empty()) throw ConfigError("config: encoder_hidden must name every view");
    if (betas.size() != encoder_hidden.size())
        throw ConfigError("config: one beta per view required");
    for (double b : betas)
        if (b < 0.0) throw ConfigError("config: betas must be >= 0");
    if (samples_per_class < 3) throw ConfigError("config: samples_per_class must be >= 3");
    if (epochs < 1 || batch_size < 2) throw ConfigError("config: bad training settings");
    if (optimizer != "adam" && optimizer != "sgd")
        throw ConfigError("config: optimizer must be adam or sgd");
    if (!(kernel.alpha > 0.0) || kernel.alpha == 1.0)
        throw ConfigError("config: kernel alpha must be > 0 and != 1");
}

// ---------------------------------------------------------------------------
// JSON config (schema version 1). Unknown keys are rejected so typos fail
// loudly instead of silently running defaults.
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kKnownKeys = {
    "version",       "kind",          "name",          "sweep_values",
    "beta_grid",     "betas",         "samples_per_class", "latent_dim",
    "extra_dim",     "noise_factor",  "train_fraction",    "encoder_hidden",
    "fusion_width",  "n_classes",     "kernel",        "sigma_mode",
    "epochs",        "batch_size",    "learning_rate", "optimizer",
    "early_stop_patience", "repeats", "seed_base",     "output_dir",
    "threads"};

const std::set<std::string> kKernelKeys = {"alpha", "k_nn", "sigma_floor"};

} // namespace

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["version"] = cfg.version;
    j["kind"] = to_string(cfg.kind);
    j["name"] = cfg.name;
    j["sweep_values"] = cfg.sweep_values;
    j["beta_grid"] = cfg.beta_grid;
    j["betas"] = cfg.betas;
    j["samples_per_class"] = cfg.samples_per_class;
    j["latent_dim"] = cfg.latent_dim;
    j["extra_dim"] = cfg.extra_dim;
    j["noise_factor"] = cfg.noise_factor;
    j["train_fraction"] = cfg.train_fraction;
    j["encoder_hidden"] = cfg.encoder_hidden;
    j["fusion_width"] = cfg.fusion_width;
    j["n_classes"] = cfg.n_classes;
    j["kernel"] = {{"alpha", cfg.kernel.alpha},
                   {"k_nn", cfg.kernel.k_nn},
                   {"sigma_floor", cfg.kernel.sigma_floor}};
    j["sigma_mode"] = cfg.sigma_mode == SigmaMode::per_batch ? "per_batch" : "per_dataset";
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["learning_rate"] = cfg.learning_rate;
    j["optimizer"] = cfg.optimizer;
    j["early_stop_patience"] = cfg.early_stop_patience;
    j["repeats"] = cfg.repeats;
    j["seed_base"] = cfg.seed_base;
    j["output_dir"] = cfg.output_dir;
    j["threads"] = cfg.threads;
    return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!kKnownKeys.count(key)) throw ConfigError("config: unknown key '" + key + "'");

    ExperimentConfig cfg;
    try {
        if (j.contains("version")) cfg.version = j["version"].get<int>();
        if (j.contains("kind")) cfg.kind = experiment_kind_from_string(j["kind"].get<std::string>());
        if (j.contains("name")) cfg.name = j["name"].get<std::string>();
        if (j.contains("sweep_values")) cfg.sweep_values = j["sweep_values"].get<std::vector<double>>();
        if (j.contains("beta_grid")) cfg.beta_grid = j["beta_grid"].get<std::vector<double>>();
        if (j.contains("betas")) cfg.betas = j["betas"].get<std::vector<double>>();
        if (j.contains("samples_per_class")) cfg.samples_per_class = j["samples_per_class"].get<int>();
        if (j.contains("latent_dim")) cfg.latent_dim = j["latent_dim"].get<int>();
        if (j.contains("extra_dim")) cfg.extra_dim = j["extra_dim"].get<int>();
        if (j.contains("noise_factor")) cfg.noise_factor = j["noise_factor"].get<double>();
        if (j.contains("train_fraction")) cfg.train_fraction = j["train_fraction"].get<double>();
        if (j.contains("encoder_hidden"))
            cfg.encoder_hidden = j["encoder_hidden"].get<std::vector<std::vector<int>>>();
        if (j.contains("fusion_width")) cfg.fusion_width = j["fusion_width"].get<int>();
        if (j.contains("n_classes")) cfg.n_classes = j["n_classes"].get<int>();
        if (j.contains("kernel")) {
            const auto& k = j["kernel"];
            for (const auto& [key, value] : k.items())
                if (!kKernelKeys.count(key))
                    throw ConfigError("config: unknown kernel key '" + key + "'");
            if (k.contains("alpha")) cfg.kernel.alpha = k["alpha"].get<double>();
            if (k.contains("k_nn")) cfg.kernel.k_nn = k["k_nn"].get<int>();
            if (k.contains("sigma_floor")) cfg.kernel.sigma_floor = k["sigma_floor"].get<double>();
        }
        if (j.contains("sigma_mode")) {
            const std::string mode = j["sigma_mode"].get<std::string>();
            if (mode == "per_batch") cfg.sigma_mode = SigmaMode::per_batch;
            else if (mode == "per_dataset") cfg.sigma_mode = SigmaMode::per_dataset;
            else throw ConfigError("config: sigma_mode must be per_batch or per_dataset");
        }
        if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
        if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
        if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
        if (j.contains("optimizer")) cfg.optimizer = j["optimizer"].get<std::string>();
        if (j.contains("early_stop_patience"))
            cfg.early_stop_patience = j["early_stop_patience"].get<int>();
        if (j.contains("repeats")) cfg.repeats = j["repeats"].get<int>();
        if (j.contains("seed_base")) cfg.seed_base = j["seed_base"].get<std::uint64_t>();
        if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: bad field type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return experiment_config_from_json(text);
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("config: cannot write " + path);
    out << experiment_config_to_json(cfg) << "\n";
}

// ---------------------------------------------------------------------------
// Cell execution
// ---------------------------------------------------------------------------

std::uint64_t cell_data_seed(std::uint64_t seed_base, int value_index, int repeat) {
    return seed_base + 100003ull * static_cast<std::uint64_t>(value_index) +
           static_cast<std::uint64_t>(repeat);
}

std::uint64_t cell_init_seed(std::uint64_t seed_base, int value_index, int repeat) {
    // Decoupled from the data stream so data can be held fixed while models vary.
    return cell_data_seed(seed_base, value_index, repeat) ^ 0x9E3779B97F4A7C15ull;
}

TrainRunResult run_single_train(const ExperimentConfig& cfg, const SynthDataset& data,
                                const std::vector<double>& betas, std::uint64_t init_seed) {
    MeibTopology topology;
    for (const DenseMatrix& view : data.train.views) topology.view_dims.push_back(view.cols());
    topology.encoder_hidden = cfg.encoder_hidden;
    topology.fusion_width = cfg.fusion_width;
    topology.n_classes = cfg.n_classes;

    TrainRunResult result;
    result.model = build_model(topology, betas, cfg.kernel, init_seed);

    TrainConfig train_cfg;
    train_cfg.epochs = cfg.epochs;
    train_cfg.batch_size = cfg.batch_size;
    train_cfg.optimizer = cfg.optimizer == "sgd" ? OptimizerState::Kind::sgd
                                                 : OptimizerState::Kind::adam;
    train_cfg.learning_rate = cfg.learning_rate;
    train_cfg.early_stop_patience = cfg.early_stop_patience;
    train_cfg.shuffle_seed = init_seed ^ 0xD2B74407B1CE6E93ull;
    train_cfg.sigma_mode = cfg.sigma_mode;

    const auto start = std::chrono::steady_clock::now();
    result.history = train(result.model, data.train, train_cfg);
    const auto stop = std::chrono::steady_clock::now();
    result.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    result.test_error = evaluate(result.model, data.test);
    return result;
}

namespace {

struct Cell {
    int value_index = 0;
    int repeat = 0;
    double value1 = 0.0;
    double value2 = 0.0;
    std::string method;
    std::vector<double> betas;
    SynthConfig data_cfg;
    bool record_weight_norms = false;
};

SynthConfig base_data_config(const ExperimentConfig& cfg) {
    SynthConfig data;
    data.samples_per_class = cfg.samples_per_class;
    data.latent_dim = cfg.latent_dim;
    data.extra_dim = cfg.extra_dim;
    data.noise_factor = cfg.noise_factor;
    data.train_fraction = cfg.train_fraction;
    return data;
}

/// Runs every cell (possibly in parallel), preserving cell order in the
/// output so thread count never changes the emitted bytes. Failed cells are
/// reported on stderr and omitted, never fabricated.
SweepResult run_cells(const ExperimentConfig& cfg, const std::vector<Cell>& cells) {
    const std::string experiment = cfg.name.empty() ? to_string(cfg.kind) : cfg.name;
    const std::string kind = to_string(cfg.kind);

    struct Slot {
        bool ok = false;
        ResultRow row;
        std::vector<WeightNormRow> norms;
    };
    std::vector<Slot> slots(cells.size());

    auto run_one = [&](std::size_t index) {
        const Cell& cell = cells[index];
        Slot& slot = slots[index];
        try {
            SynthDataset data = generate(cell.data_cfg);
            const std::uint64_t init_seed =
                cell_init_seed(cfg.seed_base, cell.value_index, cell.repeat);
            TrainRunResult run = run_single_train(cfg, data, cell.betas, init_seed);

            slot.row.experiment = experiment;
            slot.row.kind = kind;
            slot.row.value1 = cell.value1;
            slot.row.value2 = cell.value2;
            slot.row.seed = cell.data_cfg.seed;
            slot.row.method = cell.method;
            slot.row.test_error = run.test_error;
            slot.row.mi_views = run.history.back().per_view_mi;
            slot.row.wall_ms = run.wall_ms;

            if (cell.record_weight_norms) {
                const auto norms = input_weight_norms(run.model);
                for (std::size_t v = 0; v < norms.size(); ++v)
                    for (std::size_t d = 0; d < norms[v].size(); ++d)
                        slot.norms.push_back({cell.data_cfg.seed, cell.method,
                                              static_cast<int>(v), static_cast<int>(d),
                                              norms[v][d]});
            }
            slot.ok = true;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "cell (%s value=%g seed=%llu %s) failed: %s\n", kind.c_str(),
                         cell.value1, static_cast<unsigned long long>(cell.data_cfg.seed),
                         cell.method.c_str(), e.what());
        }
    };

    int n_threads = cfg.threads > 0 ? cfg.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(cells.size())));

    if (n_threads == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& w : workers) w.join();
    }

    SweepResult result;
    for (Slot& slot : slots) {
        if (!slot.ok) continue;
        result.rows.push_back(std::move(slot.row));
        for (auto& n : slot.norms) result.weight_norms.push_back(n);
    }
    return result;
}

std::vector<double> zeros_like(const std::vector<double>& betas) {
    return std::vector<double>(betas.size(), 0.0);
}

/// Standard sweep shape: per value and repeat, one MEIB cell and one DNN
/// (all betas zero) cell sharing data and initialization seeds.
std::vector<Cell> two_method_cells(const ExperimentConfig& cfg, const std::vector<double>& values,
                                   void (*apply_value)(SynthConfig&, double),
                                   bool norms_at_max_value = false) {
    const double max_value = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    std::vector<Cell> cells;
    for (int vi = 0; vi < static_cast<int>(values.size()); ++vi) {
        for (int r = 0; r < cfg.repeats; ++r) {
            Cell cell;
            cell.value_index = vi;
            cell.repeat = r;
            cell.value1 = values[vi];
            cell.data_cfg = base_data_config(cfg);
            apply_value(cell.data_cfg, values[vi]);
            cell.data_cfg.seed = cell_data_seed(cfg.seed_base, vi, r);
            cell.record_weight_norms = norms_at_max_value && values[vi] == max_value;

            Cell meib = cell;
            meib.method = "MEIB";
            meib.betas = cfg.betas;
            cells.push_back(std::move(meib));

            Cell dnn = cell;
            dnn.method = "DNN";
            dnn.betas = zeros_like(cfg.betas);
            cells.push_back(std::move(dnn));
        }
    }
    return cells;
}

} // namespace

SweepResult run_noise_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> values = cfg.sweep_values;
    if (values.empty()) values = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
    return run_cells(cfg, two_method_cells(cfg, values, [](SynthConfig& d, double a) {
                         d.noise_factor = a;
                     }));
}

SweepResult run_dim_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> values = cfg.sweep_values;
    if (values.empty()) values = {5, 15, 25, 35, 45, 55};
    return run_cells(cfg,
                     two_method_cells(
                         cfg, values,
                         [](SynthConfig& d, double dim) { d.extra_dim = static_cast<int>(dim); },
                         /*norms_at_max_value=*/true));
}

SweepResult run_sample_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> values = cfg.sweep_values;
    if (values.empty()) values = {50, 100, 200, 500, 1000};
    return run_cells(cfg, two_method_cells(cfg, values, [](SynthConfig& d, double s) {
                         d.samples_per_class = static_cast<int>(s);
                     }));
}

SweepResult run_beta_grid(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> grid = cfg.beta_grid;
    if (grid.empty()) grid = {0.0, 1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2};
    if (cfg.betas.size() != 2)
        throw ConfigError("beta_grid: the grid is over (beta_1, beta_2); two views required");

    // The dataset is identical across grid cells: seeds depend only on the
    // repeat, so a cell differs from another by its betas alone.
    std::vector<Cell> cells;
    for (int b1 = 0; b1 < static_cast<int>(grid.size()); ++b1)
        for (int b2 = 0; b2 < static_cast<int>(grid.size()); ++b2)
            for (int r = 0; r < cfg.repeats; ++r) {
                Cell cell;
                cell.value_index = 0;
                cell.repeat = r;
                cell.value1 = grid[b1];
                cell.value2 = grid[b2];
                cell.method = "MEIB";
                cell.betas = {grid[b1], grid[b2]};
                cell.data_cfg = base_data_config(cfg);
                cell.data_cfg.seed = cell_data_seed(cfg.seed_base, 0, r);
                cells.push_back(std::move(cell));
            }
    for (int r = 0; r < cfg.repeats; ++r) {
        Cell dnn;
        dnn.value_index = 0;
        dnn.repeat = r;
        dnn.method = "DNN";
        dnn.betas = {0.0, 0.0};
        dnn.data_cfg = base_data_config(cfg);
        dnn.data_cfg.seed = cell_data_seed(cfg.seed_base, 0, r);
        cells.push_back(std::move(dnn));
    }
    return run_cells(cfg, cells);
}

SweepResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::noise_sweep: return run_noise_sweep(cfg);
        case ExperimentKind::dim_sweep: return run_dim_sweep(cfg);
        case ExperimentKind::sample_sweep: return run_sample_sweep(cfg);
        case ExperimentKind::beta_grid: return run_beta_grid(cfg);
        case ExperimentKind::single_train:
            throw ConfigError("single_train is not a sweep; use the train subcommand");
    }
    throw ConfigError("unknown experiment kind");
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

struct CellKey {
    double value1;
    double value2;
    std::string method;
    bool operator<(const CellKey& o) const {
        if (value1 != o.value1) return value1 < o.value1;
        if (value2 != o.value2) return value2 < o.value2;
        return method < o.method;
    }
};

} // namespace

void emit_results(const SweepResult& result, const ExperimentConfig& cfg,
                  const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw IoError("emit_results: cannot create directory " + dir + ": " + ec.message());

    const std::string experiment = cfg.name.empty() ? to_string(cfg.kind) : cfg.name;
    const std::string kind = to_string(cfg.kind);

    {
        std::ofstream out(dir + "/results.csv");
        if (!out) throw IoError("emit_results: cannot write results.csv in " + dir);
        out << "experiment,kind,value1,value2,seed,method,test_error,mi_view1,mi_view2,wall_ms\n";
        for (const ResultRow& row : result.rows) {
            out << row.experiment << ',' << row.kind << ',' << format_double(row.value1) << ','
                << format_double(row.value2) << ',' << row.seed << ',' << row.method << ','
                << format_double(row.test_error) << ','
                << (row.mi_views.size() > 0 ? format_double(row.mi_views[0]) : "") << ','
                << (row.mi_views.size() > 1 ? format_double(row.mi_views[1]) : "") << ','
                << format_double(row.wall_ms) << "\n";
        }
    }

    // Per-cell mean and std of the test error.
    std::map<CellKey, std::vector<double>> cells;
    for (const ResultRow& row : result.rows)
        cells[{row.value1, row.value2, row.method}].push_back(row.test_error);

    auto mean_of = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / static_cast<double>(v.size());
    };
    auto std_of = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean_of(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };

    {
        std::ofstream out(dir + "/summary.csv");
        if (!out) throw IoError("emit_results: cannot write summary.csv in " + dir);
        out << "experiment,kind,value1,value2,method,mean_error,std_error,n\n";
        for (const auto& [key, errors] : cells)
            out << experiment << ',' << kind << ',' << format_double(key.value1) << ','
                << format_double(key.value2) << ',' << key.method << ','
                << format_double(mean_of(errors)) << ',' << format_double(std_of(errors)) << ','
                << errors.size() << "\n";
    }

    std::set<std::string> methods;
    for (const ResultRow& row : result.rows) methods.insert(row.method);
    const bool grid = cfg.kind == ExperimentKind::beta_grid;
    for (const std::string& method : methods) {
        std::ofstream out(dir + "/plotdata_" + method + ".csv");
        if (!out) throw IoError("emit_results: cannot write plot data in " + dir);
        out << (grid ? "beta1,beta2,mean,std\n" : "x,mean,std\n");
        for (const auto& [key, errors] : cells) {
            if (key.method != method) continue;
            out << format_double(key.value1) << ',';
            if (grid) out << format_double(key.value2) << ',';
            out << format_double(mean_of(errors)) << ',' << format_double(std_of(errors)) << "\n";
        }
    }

    if (!result.weight_norms.empty()) {
        std::ofstream out(dir + "/weight_norms.csv");
        if (!out) throw IoError("emit_results: cannot write weight_norms.csv in " + dir);
        out << "seed,method,view,dim_index,norm\n";
        for (const WeightNormRow& row : result.weight_norms)
            out << row.seed << ',' << row.method << ',' << row.view << ',' << row.dim_index << ','
                << format_double(row.norm) << "\n";
    }

    save_experiment_config(cfg, dir + "/config.json");
}

} // namespace meib
