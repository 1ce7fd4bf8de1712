#pragma once

#include <vector>

#include "pottsrf/graph.hpp"
#include "pottsrf/matrix.hpp"
#include "pottsrf/rng.hpp"

namespace pottsrf {

/// seeds[k] holds the node indices labeled k in advance. Indices are unique
/// across classes.
struct SeedSet {
    std::vector<std::vector<int>> seeds;

    int n_classes() const { return static_cast<int>(seeds.size()); }
    int total() const;
    bool contains(int node) const;
};

/// Seed-diffusion class probabilities on a graph. w_hat is the normalized
/// affinity, power m in {1, 2}. Row i of the result is
///   p_k(x_i) ∝ |S_k|^{-1} sum_{j in S_k} r_ij,
///   r_ij = (w_hat^m)_ij^2 / ((w_hat^m)_ii (w_hat^m)_jj),
/// normalized over k; rows with zero total fall back to the uniform 1/K.
Matrix diffusion_probabilities(const SparseMatrix& w_hat, const SeedSet& seeds, int power);

/// Gaussian-model class probabilities for pixel features against centroids:
///   p_k(x) ∝ exp(-|I(x) - c_k| / (2 sigma^2)),
/// computed with log-sum-exp. |.| is the plain l2 distance; set
/// squared_distance to use |.|^2 instead.
Matrix image_probabilities(const Matrix& features, const Matrix& centroids, double sigma,
                           bool squared_distance = false);

enum class RegionForceKind { log, linear, l2 };

/// f_k = -log(p_k + delta) + log(1 - p_k + delta), elementwise.
Matrix region_force_log(const Matrix& probabilities, double delta = 1e-3);

/// f_k = 1 - 2 p_k, elementwise.
Matrix region_force_linear(const Matrix& probabilities);

/// f_k(x) = |I(x) - c_k|^2, the classic piecewise-constant fidelity.
Matrix region_force_l2(const Matrix& features, const Matrix& centroids);

/// k-means++ seeding followed by Lloyd iterations (at most 100, centroid
/// movement tolerance 1e-6). Empty clusters restart from the farthest point.
/// Needs at least k distinct rows.
Matrix kmeans_centroids(const Matrix& points, int k, Rng& rng);

}  // namespace pottsrf
