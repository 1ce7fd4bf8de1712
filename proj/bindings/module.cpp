#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pottsrf/clustering.hpp"
#include "pottsrf/graph.hpp"
#include "pottsrf/imaging.hpp"
#include "pottsrf/matrix.hpp"
#include "pottsrf/solver.hpp"

namespace py = pybind11;
using namespace pottsrf;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DArray& a, const char* name) {
    if (a.ndim() != 2) throw std::invalid_argument(std::string(name) + " must be a 2d array");
    Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    const double* src = a.data();
    std::copy(src, src + m.data.size(), m.data.begin());
    return m;
}

py::array_t<double> from_matrix(const Matrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), a.mutable_data());
    return a;
}

std::vector<int> to_labels(const IArray& a, const char* name) {
    if (a.ndim() != 1) throw std::invalid_argument(std::string(name) + " must be a 1d array");
    std::vector<int> out(a.shape(0));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = static_cast<int>(a.data()[i]);
    return out;
}

py::array_t<std::int32_t> from_labels(const std::vector<int>& labels) {
    py::array_t<std::int32_t> a(static_cast<py::ssize_t>(labels.size()));
    std::copy(labels.begin(), labels.end(), a.mutable_data());
    return a;
}

py::dict report_dict(const SolverReport& r) {
    py::dict d;
    d["iterations"] = r.iterations;
    d["termination"] = std::string(to_string(r.termination));
    d["primal_energy"] = r.primal_energy;
    d["dual_energy"] = r.dual_energy;
    d["final_gap"] = r.final_gap;
    d["wall_time_s"] = r.wall_time_s;
    return d;
}

SolverConfig make_config(const std::string& algorithm, double beta, double gamma, double c,
                         double epsilon, int max_iter) {
    SolverConfig cfg;
    if (algorithm == "pdhg") {
        cfg.algorithm = Algorithm::pdhg;
    } else if (algorithm == "admm") {
        cfg.algorithm = Algorithm::admm;
    } else {
        throw std::invalid_argument("algorithm must be pdhg or admm");
    }
    cfg.beta = beta > 0 ? beta : (cfg.algorithm == Algorithm::admm ? 0.05 : 0.4);
    cfg.gamma = gamma;
    cfg.penalty = c;
    cfg.epsilon = epsilon;
    cfg.max_iter = max_iter;
    return cfg;
}

RegionForceKind make_force(const std::string& name) {
    if (name == "log") return RegionForceKind::log;
    if (name == "linear") return RegionForceKind::linear;
    if (name == "l2") return RegionForceKind::l2;
    throw std::invalid_argument("force must be log, linear or l2");
}

}  // namespace

PYBIND11_MODULE(_pottsrf, m) {
    m.doc() = "relaxed Potts segmentation and semi-supervised clustering";
    m.attr("__version__") = "0.1.0";

    m.def(
        "three_circles",
        [](std::uint64_t seed, int n, int dim, double noise_std, bool arc_length_weighted) {
            const Dataset ds = gen_three_circles(seed, n, dim, noise_std, arc_length_weighted);
            return py::make_tuple(from_matrix(ds.points), from_labels(ds.labels));
        },
        py::arg("seed") = 0, py::arg("n") = 6000, py::arg("dim") = 100,
        py::arg("noise_std") = 0.4, py::arg("arc_length_weighted") = false,
        "Three concentric noisy circles; returns (points, labels).");

    m.def(
        "project_simplex",
        [](DArray v) {
            if (v.ndim() != 1) throw std::invalid_argument("expected a 1d array");
            std::vector<double> buf(v.data(), v.data() + v.shape(0));
            project_simplex(buf);
            py::array_t<double> out(static_cast<py::ssize_t>(buf.size()));
            std::copy(buf.begin(), buf.end(), out.mutable_data());
            return out;
        },
        py::arg("v"), "Euclidean projection onto the probability simplex.");

    m.def(
        "solve_graph",
        [](DArray edges, int n_nodes, DArray f, double alpha, const std::string& algorithm,
           double beta, double gamma, double c, double epsilon, int max_iter) {
            if (edges.ndim() != 2 || edges.shape(1) != 3)
                throw std::invalid_argument("edges must be (m, 3): i, j, weight rows");
            std::vector<UndirectedEdge> list;
            list.reserve(edges.shape(0));
            for (py::ssize_t e = 0; e < edges.shape(0); ++e) {
                list.push_back({static_cast<int>(edges.data()[e * 3 + 0]),
                                static_cast<int>(edges.data()[e * 3 + 1]),
                                edges.data()[e * 3 + 2]});
            }
            const Graph g = Graph::from_undirected_edges(n_nodes, list);
            const Matrix fm = to_matrix(f, "f");
            const NodeField av(n_nodes, alpha);
            const GraphSolveResult res =
                solve(g, fm, av, make_config(algorithm, beta, gamma, c, epsilon, max_iter));
            py::dict d;
            d["phi"] = from_matrix(res.phi);
            d["labels"] = from_labels(assign_labels(res.phi));
            d["report"] = report_dict(res.report);
            return d;
        },
        py::arg("edges"), py::arg("n_nodes"), py::arg("f"), py::arg("alpha"),
        py::arg("algorithm") = "pdhg", py::arg("beta") = -1.0, py::arg("gamma") = 0.4,
        py::arg("c") = 0.05, py::arg("epsilon") = 1e-3, py::arg("max_iter") = 2500,
        "Relaxed Potts solve on an explicit weighted graph.");

    m.def(
        "cluster_trials",
        [](DArray points, IArray labels, double alpha, const std::string& force,
           const std::string& algorithm, int s, int diffusion_power, const std::string& weight,
           int n_trials, int n_seeds, std::uint64_t seed, double beta, double gamma, double c,
           double epsilon, int max_iter, int threads) {
            Dataset ds;
            ds.points = to_matrix(points, "points");
            ds.labels = to_labels(labels, "labels");
            int max_label = -1;
            for (int l : ds.labels) max_label = std::max(max_label, l);
            ds.n_classes = max_label + 1;

            ClusterParams params;
            params.n_classes = ds.n_classes;
            params.knn.s = s;
            params.knn.threads = threads;
            if (weight == "rbf") {
                params.knn.kind = WeightKind::rbf;
            } else if (weight == "zmp") {
                params.knn.kind = WeightKind::zmp;
            } else if (weight == "cosine") {
                params.knn.kind = WeightKind::cosine;
            } else {
                throw std::invalid_argument("weight must be rbf, zmp or cosine");
            }
            params.diffusion_power = diffusion_power;
            params.force = make_force(force);
            params.alpha = alpha;
            params.solver = make_config(algorithm, beta, gamma, c, epsilon, max_iter);

            const TrialAggregate agg = run_trials(ds, params, n_trials, n_seeds, seed);
            py::list trials;
            for (const TrialResult& t : agg.trials) {
                py::dict d;
                d["accuracy"] = t.accuracy;
                d["accuracy_unlabeled"] = t.accuracy_unlabeled;
                d["labels"] = from_labels(t.labels);
                d["report"] = report_dict(t.report);
                trials.append(d);
            }
            py::dict d;
            d["mean_accuracy"] = agg.mean_accuracy;
            d["min_accuracy"] = agg.min_accuracy;
            d["max_accuracy"] = agg.max_accuracy;
            d["stddev_accuracy"] = agg.stddev_accuracy;
            d["mean_iterations"] = agg.mean_iterations;
            d["mean_wall_time_s"] = agg.mean_wall_time_s;
            d["trials"] = trials;
            return d;
        },
        py::arg("points"), py::arg("labels"), py::arg("alpha"), py::arg("force") = "log",
        py::arg("algorithm") = "pdhg", py::arg("s") = 10, py::arg("diffusion_power") = 2,
        py::arg("weight") = "zmp", py::arg("n_trials") = 1, py::arg("n_seeds") = 50,
        py::arg("seed") = 0, py::arg("beta") = -1.0, py::arg("gamma") = 0.4,
        py::arg("c") = 0.05, py::arg("epsilon") = 1e-3, py::arg("max_iter") = 2500,
        py::arg("threads") = 1,
        "Semi-supervised clustering trials on an s-NN graph; returns aggregate stats.");

    m.def(
        "segment",
        [](DArray image, int k, const std::string& force, const std::string& algorithm,
           double alpha, double edge_gamma, double sigma, double delta, std::uint64_t seed,
           double beta, double gamma, double c, double epsilon, int max_iter, double blur_sigma,
           bool squared_distance) {
            if (image.ndim() != 2 && !(image.ndim() == 3 && image.shape(2) == 3))
                throw std::invalid_argument("image must be (H, W) or (H, W, 3)");
            const int h = static_cast<int>(image.shape(0));
            const int w = static_cast<int>(image.shape(1));
            const int ch = image.ndim() == 3 ? 3 : 1;
            Image img(w, h, ch);
            std::copy(image.data(), image.data() + img.data.size(), img.data.begin());

            SegmentParams params;
            params.n_classes = k;
            params.force = make_force(force);
            params.delta = delta;
            params.sigma = sigma;
            params.squared_distance = squared_distance;
            params.alpha = alpha;
            params.edge_gamma = edge_gamma;
            params.blur_sigma = blur_sigma;
            params.seed = seed;
            params.solver = make_config(algorithm, beta, gamma, c, epsilon, max_iter);

            const SegmentResult res = segment_image(img, params);
            py::array_t<std::int32_t> lab({h, w});
            std::copy(res.labels.begin(), res.labels.end(), lab.mutable_data());
            py::dict d;
            d["labels"] = lab;
            d["phi"] = from_matrix(res.phi);
            d["centroids"] = from_matrix(res.centroids);
            d["report"] = report_dict(res.report);
            return d;
        },
        py::arg("image"), py::arg("k"), py::arg("force") = "log",
        py::arg("algorithm") = "pdhg", py::arg("alpha") = 1.0, py::arg("edge_gamma") = 0.0,
        py::arg("sigma") = 1.0, py::arg("delta") = 1e-3, py::arg("seed") = 0,
        py::arg("beta") = -1.0, py::arg("gamma") = 0.4, py::arg("c") = 0.1,
        py::arg("epsilon") = 1e-5, py::arg("max_iter") = 2500, py::arg("blur_sigma") = 0.0,
        py::arg("squared_distance") = false,
        "Multi-phase image segmentation; image values in [0, 1].");
}
