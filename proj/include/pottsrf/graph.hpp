#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pottsrf/matrix.hpp"

namespace pottsrf {

using NodeField = std::vector<double>;

/// Values on directed stored adjacency pairs, aligned with Graph adjacency
/// layout: entry e corresponds to the pair (i -> nbr[e]) with row_start[i] <= e < row_start[i+1].
using EdgeField = std::vector<double>;

struct UndirectedEdge {
    int i = 0;
    int j = 0;
    double w = 0.0;
};

/// Undirected weighted graph in CSR form. Both directions of every edge are
/// stored; twin[e] is the position of the mirrored pair, so w[e] == w[twin[e]].
/// Adjacency lists are sorted by neighbor index and contain no self-loops.
struct Graph {
    int n_nodes = 0;
    std::vector<std::int64_t> row_start;  // size n_nodes + 1
    std::vector<int> nbr;
    std::vector<double> weight;
    std::vector<std::int64_t> twin;

    std::int64_t n_directed() const { return static_cast<std::int64_t>(nbr.size()); }
    std::int64_t n_undirected() const { return n_directed() / 2; }
    std::int64_t degree(int i) const { return row_start[i + 1] - row_start[i]; }

    /// Builds from unordered unique undirected edges (i != j, w finite and >= 0).
    static Graph from_undirected_edges(int n, std::span<const UndirectedEdge> edges);
};

struct GridGeometry {
    int width = 0;
    int height = 0;
    int n() const { return width * height; }
};

/// One 2-vector (horizontal, vertical) per pixel, row-major.
struct PixelVectorField {
    int width = 0;
    int height = 0;
    std::vector<double> x;
    std::vector<double> y;

    PixelVectorField() = default;
    PixelVectorField(int w, int h)
        : width(w), height(h),
          x(static_cast<std::size_t>(w) * h, 0.0),
          y(static_cast<std::size_t>(w) * h, 0.0) {}
};

/// 4-neighbor pixel grid with unit weights, no wraparound.
Graph build_grid_graph(const GridGeometry& geom);

enum class WeightKind { rbf, zmp, cosine };

struct KnnConfig {
    int s = 10;
    WeightKind kind = WeightKind::zmp;
    double rbf_epsilon = 1.0;  // only used by WeightKind::rbf
    int threads = 1;
};

/// Exact brute-force s-nearest-neighbor graph under the l2 metric. Ties in
/// distance break toward the lower point index. The directed s-NN relation is
/// symmetrized once as W <- (W + W^T)/2; pairs found in only one direction
/// keep half their kernel weight.
Graph build_knn_graph(const Matrix& points, const KnnConfig& cfg);

/// exp(-d^2 / (2 eps)), the radial basis affinity.
double weight_rbf(double d, double epsilon);

/// exp(-d^2 / (sigma_i sigma_j)), the Zelnik-Manor-Perona self-tuning affinity.
double weight_zmp(double d, double sigma_i, double sigma_j);

/// <x_i, x_j> / (|x_i| |x_j|), in [-1, 1].
double weight_cosine(std::span<const double> xi, std::span<const double> xj);

/// Gradient on the graph: entry (i -> j) is w_ij (u_j - u_i).
EdgeField gradient(const Graph& g, const NodeField& u);

/// Divergence, the adjoint of the graph gradient:
///   div q (x_i) = sum_j w_ij (q_j(i) - q_i(j)),  <grad u, q> = <u, div q>.
NodeField divergence(const Graph& g, const EdgeField& q);

/// Weighted anisotropic total variation sum_i alpha_i sum_j w_ij |u_j - u_i|.
double anisotropic_tv(const Graph& g, const NodeField& u, const NodeField& alpha);

/// Forward differences with replicate (Neumann) boundary.
PixelVectorField grid_gradient(const GridGeometry& geom, const NodeField& u);

/// Negative adjoint of grid_gradient: <grad u, q> = -<u, grid_divergence(q)>.
NodeField grid_divergence(const GridGeometry& geom, const PixelVectorField& q);

/// Isotropic weighted total variation sum_x alpha(x) |grad u(x)|_2.
double grid_tv(const GridGeometry& geom, const NodeField& u, const NodeField& alpha);

/// Symmetric sparse matrix in CSR form (used for affinity matrices, where
/// diagonal entries are allowed).
struct SparseMatrix {
    int n = 0;
    std::vector<std::int64_t> row_start;
    std::vector<int> col;
    std::vector<double> val;

    static SparseMatrix from_triplets(int n, std::span<const UndirectedEdge> upper,
                                      std::span<const double> diagonal);
};

/// Adjacency weights of g plus a constant self-loop on every node.
SparseMatrix affinity_matrix(const Graph& g, double self_loop);

/// D^{-1/2} W D^{-1/2} with d_ii the l1 norm of row i. Rows with zero sum are
/// isolated nodes and raise numeric_error listing the offending indices.
SparseMatrix normalize_affinity(const SparseMatrix& w);

/// y = A x.
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

std::vector<double> sparse_diag(const SparseMatrix& a);

/// Row squared norms; equals diag(A^2) when A is symmetric.
std::vector<double> row_sq_norms(const SparseMatrix& a);

}  // namespace pottsrf
