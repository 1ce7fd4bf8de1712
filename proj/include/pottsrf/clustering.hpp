#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pottsrf/graph.hpp"
#include "pottsrf/matrix.hpp"
#include "pottsrf/region_force.hpp"
#include "pottsrf/rng.hpp"
#include "pottsrf/solver.hpp"

namespace pottsrf {

struct Dataset {
    Matrix points;            // n x dim
    std::vector<int> labels;  // ground truth
    int n_classes = 0;

    int n() const { return points.rows; }
};

/// Reads a point CSV and a label file (one integer per line); n_classes is
/// inferred as max label + 1. Row-count mismatch is a parse error naming both
/// counts.
Dataset load_dataset(const std::string& points_path, const std::string& labels_path);

/// Three concentric noisy circles in R^100. Per point: class uniform in
/// {0,1,2} (or proportional to circumference when arc_length_weighted),
/// radius class+1, angle uniform in [0,2pi), zero-padded to dim, then iid
/// Gaussian noise (std noise_std) on every coordinate.
Dataset gen_three_circles(std::uint64_t seed, int n = 6000, int dim = 100,
                          double noise_std = 0.4, bool arc_length_weighted = false);

/// Draws n_seeds labeled nodes uniformly without replacement over the whole
/// dataset; if any class ends up empty the draw is repeated (at most 100
/// times) before giving up with numeric_error. stratified draws
/// n_seeds / n_classes per class instead (n_seeds must divide evenly).
SeedSet sample_seeds(const std::vector<int>& labels, int n_classes, int n_seeds, Rng& rng,
                     bool stratified = false);

struct ClusterParams {
    int n_classes = 3;
    KnnConfig knn;
    int diffusion_power = 2;
    RegionForceKind force = RegionForceKind::log;
    double delta = 1e-3;
    double alpha = 3.0;   // TV weight, constant across nodes
    SolverConfig solver;
};

struct TrialResult {
    double accuracy = 0.0;            // all nodes, seed labels clamped
    double accuracy_unlabeled = 0.0;  // excluding seed nodes
    double accuracy_unclamped = 0.0;  // all nodes, raw argmax labels
    std::vector<int> labels;
    SeedSet seeds;
    SolverReport report;
};

/// Semi-supervised clustering on an s-NN graph: normalized affinity with unit
/// self-loops, seed diffusion probabilities, region force, relaxed Potts solve.
/// Seed rows of phi are clamped to their one-hot label before extraction.
TrialResult cluster(const Dataset& data, const SeedSet& seeds, const ClusterParams& params);

/// Same, reusing a prebuilt s-NN graph of data.points.
TrialResult cluster(const Graph& graph, const Dataset& data, const SeedSet& seeds,
                    const ClusterParams& params);

struct TrialAggregate {
    std::vector<TrialResult> trials;
    double mean_accuracy = 0.0;
    double min_accuracy = 0.0;
    double max_accuracy = 0.0;
    double stddev_accuracy = 0.0;
    double mean_iterations = 0.0;
    double mean_wall_time_s = 0.0;
};

/// Repeats cluster() n_trials times with fresh seed draws (base_seed + t for
/// trial t), building the graph once.
TrialAggregate run_trials(const Dataset& data, const ClusterParams& params, int n_trials,
                          int n_seeds_per_trial, std::uint64_t base_seed,
                          bool stratified = false);

/// Fraction of matching labels; ignore, when given, marks indices to skip.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                const std::vector<bool>* ignore = nullptr);

/// Best accuracy over all permutations of predicted class ids against truth
/// (for unsupervised pipelines where class identity is arbitrary). K <= 8.
double permuted_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                         int n_classes);

}  // namespace pottsrf
