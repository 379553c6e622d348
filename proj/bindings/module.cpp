#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <utility>

#include "mdsgnn/config.hpp"
#include "mdsgnn/errors.hpp"
#include "mdsgnn/graph.hpp"
#include "mdsgnn/propagation.hpp"
#include "mdsgnn/training.hpp"

namespace py = pybind11;
using namespace mdsgnn;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                 const char* what) {
    if (a.ndim() != 2) {
        throw DataError(std::string(what) + ": expected a 2-d array");
    }
    Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(m.data.data(), a.data(), m.data.size() * sizeof(double));
    return m;
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::memcpy(a.mutable_data(), m.data.data(), m.data.size() * sizeof(double));
    return a;
}

TrainConfig config_from(const std::string& text) {
    return text.empty() ? TrainConfig{} : parse_config_text(text, "<config>");
}

IncompleteGraph make_dataset(int n, int f, int c,
                             const std::vector<std::pair<int, int>>& edges,
                             const py::array_t<double, py::array::c_style |
                                                            py::array::forcecast>& features,
                             const std::vector<int>& labels,
                             const std::vector<int>& train_idx,
                             const std::vector<int>& val_idx,
                             const std::vector<int>& test_idx,
                             const std::vector<int>& known) {
    Graph g;
    g.n = n;
    g.f = f;
    g.c = c;
    g.adj = adjacency_from_edges(n, edges, "make_dataset");
    g.features = to_matrix(features, "features");
    if (g.features.rows != n || g.features.cols != f) {
        throw DataError("make_dataset: features must be n x f");
    }
    g.labels = labels;
    g.train_idx = train_idx;
    g.val_idx = val_idx;
    g.test_idx = test_idx;
    MaskMatrix mask;
    if (known.empty()) {
        mask.known.assign(n, 1);
    } else {
        if (static_cast<int>(known.size()) != n) {
            throw DataError("make_dataset: known must have one entry per node");
        }
        for (int k : known) mask.known.push_back(k ? 1 : 0);
    }
    g.validate();
    for (int i = 0; i < n; ++i) {
        if (mask.known[i]) continue;
        for (int j = 0; j < f; ++j) {
            if (g.features(i, j) != 0.0) {
                throw DataError("make_dataset: masked row " + std::to_string(i) +
                                " has nonzero features");
            }
        }
    }
    return {std::move(g), std::move(mask)};
}

py::dict metrics_dict(const RunMetrics& rm) {
    py::dict d;
    d["best_epoch"] = rm.best_epoch;
    d["val_acc"] = rm.best_val_acc;
    d["test_acc"] = rm.test_acc;
    py::list l_ce, l_ce_prime, l_rec, l_cl, total;
    for (const EpochLosses& el : rm.losses) {
        l_ce.append(el.l_ce);
        l_ce_prime.append(el.l_ce_prime);
        l_rec.append(el.l_rec);
        l_cl.append(el.l_cl);
        total.append(el.total);
    }
    py::dict losses;
    losses["l_ce"] = l_ce;
    losses["l_ce_prime"] = l_ce_prime;
    losses["l_rec"] = l_rec;
    losses["l_cl"] = l_cl;
    losses["total"] = total;
    d["losses"] = losses;
    return d;
}

}  // namespace

PYBIND11_MODULE(_mdsgnn, m) {
    m.doc() =
        "dual-stream graph neural network for node classification on graphs "
        "with missing features and edges";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<IncompleteGraph>(m, "Dataset")
        .def_property_readonly("n", [](const IncompleteGraph& g) { return g.graph.n; })
        .def_property_readonly("f", [](const IncompleteGraph& g) { return g.graph.f; })
        .def_property_readonly("c", [](const IncompleteGraph& g) { return g.graph.c; })
        .def_property_readonly("features",
                               [](const IncompleteGraph& g) { return to_array(g.graph.features); })
        .def_property_readonly("labels",
                               [](const IncompleteGraph& g) { return g.graph.labels; })
        .def_property_readonly("train_idx",
                               [](const IncompleteGraph& g) { return g.graph.train_idx; })
        .def_property_readonly("val_idx",
                               [](const IncompleteGraph& g) { return g.graph.val_idx; })
        .def_property_readonly("test_idx",
                               [](const IncompleteGraph& g) { return g.graph.test_idx; })
        .def_property_readonly("edges",
                               [](const IncompleteGraph& g) { return g.graph.edge_list(); })
        .def_property_readonly("known",
                               [](const IncompleteGraph& g) {
                                   std::vector<int> out;
                                   for (auto k : g.mask.known) out.push_back(k);
                                   return out;
                               })
        .def("__repr__", [](const IncompleteGraph& g) {
            return "Dataset(n=" + std::to_string(g.graph.n) +
                   ", f=" + std::to_string(g.graph.f) +
                   ", c=" + std::to_string(g.graph.c) +
                   ", edges=" + std::to_string(g.graph.undirected_edge_count()) +
                   ", missing=" + std::to_string(g.mask.missing_count()) + ")";
        });

    m.def("make_dataset", &make_dataset, py::arg("n"), py::arg("f"), py::arg("c"),
          py::arg("edges"), py::arg("features"), py::arg("labels"),
          py::arg("train_idx"), py::arg("val_idx"), py::arg("test_idx"),
          py::arg("known") = std::vector<int>{},
          "Build an in-memory dataset; empty `known` means all features known.");

    m.def("load_dataset", &load_dataset, py::arg("dir"));
    m.def(
        "save_dataset",
        [](const IncompleteGraph& g, const std::string& dir) {
            save_dataset(g, dir);
        },
        py::arg("dataset"), py::arg("dir"));

    m.def(
        "corrupt",
        [](const IncompleteGraph& g, double feature_missing, double edge_missing,
           std::uint64_t seed) {
            return corrupt_for_seed(g, feature_missing, edge_missing, seed);
        },
        py::arg("dataset"), py::arg("feature_missing"), py::arg("edge_missing"),
        py::arg("seed"),
        "Drop edges, mask node features, fold in any existing mask.");

    m.def(
        "knn_edges",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           int k) {
            Matrix m = to_matrix(x, "knn_edges");
            AugmentedGraph aug = knn_graph(m, k);
            std::vector<std::pair<int, int>> edges;
            const SparseMatrix& s = aug.knn_adjacency;
            for (int i = 0; i < s.rows; ++i) {
                for (int p = s.indptr[i]; p < s.indptr[i + 1]; ++p) {
                    int j = s.indices[p];
                    if (i < j) edges.emplace_back(i, j);
                }
            }
            return edges;
        },
        py::arg("x"), py::arg("k"),
        "Undirected cosine-similarity kNN edges (u < v pairs).");

    m.def(
        "propagate",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& knn_source,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           int k, double alpha, int steps) {
            AugmentedGraph aug = knn_graph(to_matrix(knn_source, "knn_source"), k);
            return to_array(
                ppr_propagate(aug, to_matrix(x, "x"), alpha, steps));
        },
        py::arg("knn_source"), py::arg("x"), py::arg("k"), py::arg("alpha"),
        py::arg("steps"),
        "Personalized propagation of x over the kNN graph of knn_source.");

    m.def(
        "ntxent_value",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& z,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& zp,
           double tau, bool canonical) {
            Tape tape;
            Tensor a = tape.leaf(to_matrix(z, "z"), false);
            Tensor b = tape.leaf(to_matrix(zp, "zp"), false);
            return tape.scalar(ntxent(a, b, tau, canonical).id);
        },
        py::arg("z"), py::arg("zp"), py::arg("tau"), py::arg("canonical") = false,
        "Contrastive alignment loss between two embedding views.");

    m.def(
        "train",
        [](const IncompleteGraph& g, const std::string& config,
           const std::string& method) {
            TrainConfig cfg = config_from(config);
            validate_config(cfg);
            if (parse_method(method) == Method::gcn) {
                return metrics_dict(gcn_baseline(g, cfg));
            }
            return metrics_dict(fit(g, cfg).second);
        },
        py::arg("dataset"), py::arg("config") = std::string(),
        py::arg("method") = "mdsgnn",
        "Train once on the dataset as-is; config is key=value lines.");

    m.def(
        "run_seeds",
        [](const IncompleteGraph& g, const std::string& config, int n_seeds,
           const std::string& method) {
            TrainConfig cfg = config_from(config);
            validate_config(cfg);
            std::vector<std::uint64_t> seeds;
            for (int i = 0; i < n_seeds; ++i) seeds.push_back(cfg.seed + i);
            RunSummary rs = run_seeds(g, cfg, seeds, parse_method(method));
            py::dict d;
            py::list accs;
            for (const SeedRun& r : rs.runs) accs.append(r.metrics.test_acc);
            d["accs"] = accs;
            d["mean"] = rs.mean;
            d["std"] = rs.stddev;
            return d;
        },
        py::arg("dataset"), py::arg("config") = std::string(),
        py::arg("n_seeds") = 5, py::arg("method") = "mdsgnn",
        "Per-seed corruption and training; returns test accuracies.");

    m.def("gradcheck", []() {
        py::dict d;
        for (const auto& [name, err] : gradcheck_suite()) d[name.c_str()] = err;
        return d;
    });

    m.def("default_config", []() { return render_config(TrainConfig{}); });

    m.attr("__version__") = "0.1.0";
}
