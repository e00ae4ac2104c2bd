#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "meib/data_io.hpp"
#include "meib/errors.hpp"
#include "meib/kernel_entropy.hpp"
#include "meib/meib_model.hpp"
#include "meib/synth_gen.hpp"

namespace py = pybind11;
using namespace meib;

namespace {

using NumpyMatrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseMatrix to_matrix(const NumpyMatrix& arr) {
    if (arr.ndim() != 2) throw py::value_error("expected a 2-D float array");
    DenseMatrix m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
    std::memcpy(m.data().data(), arr.data(), m.size() * sizeof(double));
    return m;
}

py::array_t<double> to_array(const DenseMatrix& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    std::memcpy(arr.mutable_data(), m.data().data(), m.size() * sizeof(double));
    return arr;
}

NormalizedGram gram_from_array(const NumpyMatrix& arr) {
    return NormalizedGram::from_matrix(to_matrix(arr));
}

MultiViewBatch batch_from_python(const std::vector<NumpyMatrix>& views,
                                 const std::vector<int>& labels) {
    MultiViewBatch batch;
    for (const auto& v : views) batch.views.push_back(to_matrix(v));
    batch.labels = labels;
    batch.validate();
    return batch;
}

py::dict batch_to_python(const MultiViewBatch& batch) {
    py::dict d;
    py::list views;
    for (const DenseMatrix& v : batch.views) views.append(to_array(v));
    d["views"] = views;
    d["labels"] = py::array_t<int>(static_cast<py::ssize_t>(batch.labels.size()),
                                   batch.labels.data());
    return d;
}

py::dict stats_to_dict(const EpochStats& s) {
    py::dict d;
    d["epoch"] = s.epoch;
    d["total"] = s.total;
    d["ce"] = s.ce;
    d["accuracy"] = s.accuracy;
    d["mi"] = s.per_view_mi;
    return d;
}

/// Model handle exposing build / train / evaluate to python.
struct PyModel {
    MeibModel model;

    static PyModel build(const std::vector<int>& view_dims,
                         const std::vector<std::vector<int>>& encoder_hidden,
                         int fusion_width, int n_classes, const std::vector<double>& betas,
                         double alpha, int k_nn, std::uint64_t seed) {
        MeibTopology topology;
        topology.view_dims = view_dims;
        topology.encoder_hidden = encoder_hidden;
        topology.fusion_width = fusion_width;
        topology.n_classes = n_classes;
        KernelConfig kernel;
        kernel.alpha = alpha;
        kernel.k_nn = k_nn;
        return PyModel{build_model(topology, betas, kernel, seed)};
    }

    py::list train_on(const std::vector<NumpyMatrix>& views, const std::vector<int>& labels,
                      int epochs, int batch_size, double learning_rate,
                      const std::string& optimizer, int early_stop_patience,
                      std::uint64_t shuffle_seed) {
        const MultiViewBatch data = batch_from_python(views, labels);
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.learning_rate = learning_rate;
        cfg.optimizer = optimizer == "sgd" ? OptimizerState::Kind::sgd
                                           : OptimizerState::Kind::adam;
        cfg.early_stop_patience = early_stop_patience;
        cfg.shuffle_seed = shuffle_seed;
        py::list history;
        for (const EpochStats& s : train(model, data, cfg)) history.append(stats_to_dict(s));
        return history;
    }

    double evaluate_on(const std::vector<NumpyMatrix>& views, const std::vector<int>& labels) {
        return evaluate(model, batch_from_python(views, labels));
    }

    py::dict loss_on(const std::vector<NumpyMatrix>& views, const std::vector<int>& labels) {
        LossOptions options;
        options.want_gradients = false;
        const auto [report, grads] =
            meib_loss(model, batch_from_python(views, labels), options);
        py::dict d;
        d["total"] = report.total;
        d["ce"] = report.ce;
        d["accuracy"] = report.accuracy;
        d["mi"] = report.per_view_mi;
        return d;
    }

    py::list weight_norms() const {
        py::list out;
        for (const auto& norms : input_weight_norms(model))
            out.append(py::array_t<double>(static_cast<py::ssize_t>(norms.size()), norms.data()));
        return out;
    }
};

} // namespace

PYBIND11_MODULE(_meib, m) {
    m.doc() = "Matrix-based Renyi entropy estimators and the multi-view "
              "entropy-bottleneck model";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    m.def(
        "estimate_sigma",
        [](const NumpyMatrix& batch, int k_nn, double sigma_floor) {
            return estimate_sigma(to_matrix(batch), k_nn, sigma_floor);
        },
        py::arg("batch"), py::arg("k_nn") = 10, py::arg("sigma_floor") = 1e-6,
        "Kernel width: mean over samples of the mean distance to the k nearest "
        "neighbors.");

    m.def(
        "normalized_gram",
        [](const NumpyMatrix& batch, double sigma) {
            return to_array(normalized_gram(to_matrix(batch), sigma).matrix());
        },
        py::arg("batch"), py::arg("sigma"),
        "Trace-one Gaussian-kernel Gram matrix of a batch.");

    m.def(
        "renyi_entropy",
        [](const NumpyMatrix& gram, double alpha) {
            return renyi_entropy(gram_from_array(gram), alpha);
        },
        py::arg("gram"), py::arg("alpha") = 1.01,
        "Matrix-based Renyi alpha-order entropy (bits) of a normalized Gram matrix.");

    m.def(
        "joint_entropy",
        [](const NumpyMatrix& gx, const NumpyMatrix& gz, double alpha) {
            return joint_entropy(gram_from_array(gx), gram_from_array(gz), alpha);
        },
        py::arg("gram_x"), py::arg("gram_z"), py::arg("alpha") = 1.01);

    m.def(
        "mutual_information",
        [](const NumpyMatrix& gx, const NumpyMatrix& gz, double alpha) {
            return mutual_information(gram_from_array(gx), gram_from_array(gz), alpha);
        },
        py::arg("gram_x"), py::arg("gram_z"), py::arg("alpha") = 1.01,
        "I = H(A_x) + H(A_z) - H(A_x, A_z), in bits.");

    m.def(
        "mutual_information_batches",
        [](const NumpyMatrix& x, const NumpyMatrix& z, double alpha, int k_nn) {
            KernelConfig cfg;
            cfg.alpha = alpha;
            cfg.k_nn = k_nn;
            return mi_value_and_gradient(to_matrix(x), to_matrix(z), cfg, std::nullopt,
                                         std::nullopt, false)
                .mi;
        },
        py::arg("x"), py::arg("z"), py::arg("alpha") = 1.01, py::arg("k_nn") = 10,
        "I(X;Z) straight from two aligned batches, widths from the k-NN heuristic.");

    m.def(
        "entropy_gradient_wrt_gram",
        [](const NumpyMatrix& gram, double alpha) {
            return to_array(entropy_gradient_wrt_gram(gram_from_array(gram), alpha));
        },
        py::arg("gram"), py::arg("alpha") = 1.01);

    m.def(
        "mi_gradient",
        [](const NumpyMatrix& x, const NumpyMatrix& z, double alpha, int k_nn) {
            KernelConfig cfg;
            cfg.alpha = alpha;
            cfg.k_nn = k_nn;
            const MiValueGrad out = mi_value_and_gradient(to_matrix(x), to_matrix(z), cfg);
            return py::make_tuple(out.mi, to_array(out.d_z));
        },
        py::arg("x"), py::arg("z"), py::arg("alpha") = 1.01, py::arg("k_nn") = 10,
        "(I(X;Z), dI/dz) with kernel widths frozen at their heuristic values.");

    m.def(
        "generate_synth",
        [](int samples_per_class, int latent_dim, int extra_dim, double noise_factor,
           std::uint64_t seed, double train_fraction) {
            SynthConfig cfg;
            cfg.samples_per_class = samples_per_class;
            cfg.latent_dim = latent_dim;
            cfg.extra_dim = extra_dim;
            cfg.noise_factor = noise_factor;
            cfg.seed = seed;
            cfg.train_fraction = train_fraction;
            const SynthDataset data = generate(cfg);
            py::dict d;
            d["train"] = batch_to_python(data.train);
            d["test"] = batch_to_python(data.test);
            return d;
        },
        py::arg("samples_per_class") = 500, py::arg("latent_dim") = 20,
        py::arg("extra_dim") = 5, py::arg("noise_factor") = 0.0, py::arg("seed") = 0,
        py::arg("train_fraction") = 0.8,
        "Two-view synthetic benchmark: class-conditional Gaussians, distractor "
        "features, nonlinear view maps, magnitude-scaled noise.");

    py::class_<PyModel>(m, "Model")
        .def_static("build", &PyModel::build, py::arg("view_dims"), py::arg("encoder_hidden"),
                    py::arg("fusion_width") = 256, py::arg("n_classes") = 10,
                    py::arg("betas") = std::vector<double>{0.0, 0.0}, py::arg("alpha") = 1.01,
                    py::arg("k_nn") = 10, py::arg("seed") = 0)
        .def("train", &PyModel::train_on, py::arg("views"), py::arg("labels"),
             py::arg("epochs") = 100, py::arg("batch_size") = 100,
             py::arg("learning_rate") = 1e-3, py::arg("optimizer") = "adam",
             py::arg("early_stop_patience") = 20, py::arg("shuffle_seed") = 0)
        .def("evaluate", &PyModel::evaluate_on, py::arg("views"), py::arg("labels"),
             "Classification error fraction.")
        .def("loss", &PyModel::loss_on, py::arg("views"), py::arg("labels"))
        .def("input_weight_norms", &PyModel::weight_norms)
        .def("save", [](const PyModel& self, const std::string& path) {
            save_checkpoint(self.model, path);
        })
        .def_static("load",
                    [](const std::string& path) { return PyModel{load_checkpoint(path)}; })
        .def_property_readonly("betas",
                               [](const PyModel& self) { return self.model.betas; });
}
