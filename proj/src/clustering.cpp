#include "pottsrf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pottsrf/errors.hpp"
#include "pottsrf/io.hpp"

namespace pottsrf {

Dataset load_dataset(const std::string& points_path, const std::string& labels_path) {
    Dataset ds;
    ds.points = read_csv_matrix(points_path);
    ds.labels = read_labels(labels_path);
    if (static_cast<int>(ds.labels.size()) != ds.points.rows)
        throw parse_error("label count " + std::to_string(ds.labels.size()) +
                          " does not match point count " + std::to_string(ds.points.rows));
    int max_label = 0;
    for (int l : ds.labels) {
        if (l < 0) throw parse_error("negative class label in " + labels_path);
        max_label = std::max(max_label, l);
    }
    ds.n_classes = max_label + 1;
    return ds;
}

Dataset gen_three_circles(std::uint64_t seed, int n, int dim, double noise_std,
                          bool arc_length_weighted) {
    if (n < 1 || dim < 2) throw std::invalid_argument("need n >= 1 points of dimension >= 2");
    Rng rng(seed);
    Dataset ds;
    ds.points = Matrix(n, dim, 0.0);
    ds.labels.resize(n);
    const double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < n; ++i) {
        int cls;
        if (arc_length_weighted) {
            // circumference-proportional: radii 1,2,3 give odds 1:2:3
            const double u = rng.uniform() * 6.0;
            cls = u < 1.0 ? 0 : (u < 3.0 ? 1 : 2);
        } else {
            cls = rng.uniform_int(3);
        }
        const double radius = cls + 1;
        const double angle = rng.uniform() * two_pi;
        auto row = ds.points.row(i);
        row[0] = radius * std::cos(angle);
        row[1] = radius * std::sin(angle);
        if (noise_std > 0.0) {
            for (int d = 0; d < dim; ++d) row[d] += noise_std * rng.normal();
        }
        ds.labels[i] = cls;
    }
    ds.n_classes = 3;
    return ds;
}

SeedSet sample_seeds(const std::vector<int>& labels, int n_classes, int n_seeds, Rng& rng,
                     bool stratified) {
    const int n = static_cast<int>(labels.size());
    if (n_classes < 1) throw std::invalid_argument("need at least one class");
    if (n_seeds < n_classes || n_seeds > n)
        throw std::invalid_argument("seed count must lie in [n_classes, n_points]");
    for (int l : labels) {
        if (l < 0 || l >= n_classes) throw std::invalid_argument("label out of range");
    }

    SeedSet set;
    set.seeds.assign(n_classes, {});
    if (stratified) {
        if (n_seeds % n_classes != 0)
            throw std::invalid_argument("stratified seeding needs n_seeds divisible by classes");
        const int per = n_seeds / n_classes;
        for (int c = 0; c < n_classes; ++c) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i) {
                if (labels[i] == c) members.push_back(i);
            }
            if (static_cast<int>(members.size()) < per)
                throw std::invalid_argument("class " + std::to_string(c) +
                                            " has too few points to seed");
            for (int t = 0; t < per; ++t) {
                std::swap(members[t], members[t + rng.uniform_int(static_cast<int>(members.size()) - t)]);
                set.seeds[c].push_back(members[t]);
            }
            std::sort(set.seeds[c].begin(), set.seeds[c].end());
        }
        return set;
    }

    std::vector<int> idx(n);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::iota(idx.begin(), idx.end(), 0);
        for (int c = 0; c < n_classes; ++c) set.seeds[c].clear();
        for (int t = 0; t < n_seeds; ++t) {
            std::swap(idx[t], idx[t + rng.uniform_int(n - t)]);
            set.seeds[labels[idx[t]]].push_back(idx[t]);
        }
        bool ok = true;
        for (int c = 0; c < n_classes; ++c) ok = ok && !set.seeds[c].empty();
        if (ok) {
            for (int c = 0; c < n_classes; ++c) std::sort(set.seeds[c].begin(), set.seeds[c].end());
            return set;
        }
    }
    throw numeric_error("seed draw left a class empty after 100 attempts");
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                const std::vector<bool>* ignore) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("prediction/truth length mismatch");
    if (ignore && ignore->size() != truth.size())
        throw std::invalid_argument("ignore mask length mismatch");
    std::size_t considered = 0, hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (ignore && (*ignore)[i]) continue;
        ++considered;
        if (predicted[i] == truth[i]) ++hit;
    }
    if (considered == 0) return 0.0;
    return static_cast<double>(hit) / static_cast<double>(considered);
}

double permuted_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                         int n_classes) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("prediction/truth length mismatch");
    if (n_classes < 1 || n_classes > 8)
        throw std::invalid_argument("permutation matching supports 1..8 classes");
    std::vector<int> perm(n_classes);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const int p = predicted[i];
            if (p >= 0 && p < n_classes && perm[p] == truth[i]) ++hit;
        }
        best = std::max(best, static_cast<double>(hit) / static_cast<double>(truth.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

TrialResult cluster(const Graph& graph, const Dataset& data, const SeedSet& seeds,
                    const ClusterParams& params) {
    if (graph.n_nodes != data.n()) throw std::invalid_argument("graph/data size mismatch");
    if (params.force == RegionForceKind::l2)
        throw std::invalid_argument("the l2 force needs image features, not a seed set");
    if (seeds.n_classes() != params.n_classes)
        throw std::invalid_argument("seed class count disagrees with params");

    const SparseMatrix w_hat = normalize_affinity(affinity_matrix(graph, 1.0));
    const Matrix p = diffusion_probabilities(w_hat, seeds, params.diffusion_power);
    const Matrix f = params.force == RegionForceKind::log ? region_force_log(p, params.delta)
                                                          : region_force_linear(p);
    const NodeField alpha(graph.n_nodes, params.alpha);
    GraphSolveResult sol = solve(graph, f, alpha, params.solver);

    TrialResult trial;
    trial.labels = assign_labels(sol.phi);
    trial.seeds = seeds;
    trial.report = std::move(sol.report);
    trial.accuracy_unclamped = accuracy(trial.labels, data.labels);

    std::vector<bool> seeded(data.n(), false);
    for (int c = 0; c < seeds.n_classes(); ++c) {
        for (int i : seeds.seeds[c]) {
            trial.labels[i] = c;
            seeded[i] = true;
        }
    }
    trial.accuracy = accuracy(trial.labels, data.labels);
    trial.accuracy_unlabeled = accuracy(trial.labels, data.labels, &seeded);
    return trial;
}

TrialResult cluster(const Dataset& data, const SeedSet& seeds, const ClusterParams& params) {
    const Graph graph = build_knn_graph(data.points, params.knn);
    return cluster(graph, data, seeds, params);
}

TrialAggregate run_trials(const Dataset& data, const ClusterParams& params, int n_trials,
                          int n_seeds_per_trial, std::uint64_t base_seed, bool stratified) {
    if (n_trials < 1) throw std::invalid_argument("need at least one trial");
    const Graph graph = build_knn_graph(data.points, params.knn);

    TrialAggregate agg;
    agg.trials.reserve(n_trials);
    for (int t = 0; t < n_trials; ++t) {
        Rng rng(base_seed + static_cast<std::uint64_t>(t));
        const SeedSet seeds =
            sample_seeds(data.labels, params.n_classes, n_seeds_per_trial, rng, stratified);
        agg.trials.push_back(cluster(graph, data, seeds, params));
    }

    agg.min_accuracy = agg.trials[0].accuracy;
    agg.max_accuracy = agg.trials[0].accuracy;
    double sum = 0.0, sum_it = 0.0, sum_time = 0.0;
    for (const auto& tr : agg.trials) {
        sum += tr.accuracy;
        sum_it += tr.report.iterations;
        sum_time += tr.report.wall_time_s;
        agg.min_accuracy = std::min(agg.min_accuracy, tr.accuracy);
        agg.max_accuracy = std::max(agg.max_accuracy, tr.accuracy);
    }
    agg.mean_accuracy = sum / n_trials;
    agg.mean_iterations = sum_it / n_trials;
    agg.mean_wall_time_s = sum_time / n_trials;
    double var = 0.0;
    for (const auto& tr : agg.trials) {
        const double d = tr.accuracy - agg.mean_accuracy;
        var += d * d;
    }
    agg.stddev_accuracy = n_trials > 1 ? std::sqrt(var / (n_trials - 1)) : 0.0;
    return agg;
}

}  // namespace pottsrf
