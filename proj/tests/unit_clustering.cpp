#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "pottsrf/clustering.hpp"
#include "pottsrf/errors.hpp"
#include "pottsrf/io.hpp"

using namespace pottsrf;

namespace {

// three tight, well separated blobs in the plane
Dataset blob_dataset(int per_class, double spread, std::uint64_t seed) {
    const double cx[3] = {0.0, 10.0, 0.0};
    const double cy[3] = {0.0, 0.0, 10.0};
    Rng rng(seed);
    Dataset ds;
    ds.n_classes = 3;
    ds.points = Matrix(3 * per_class, 2, 0.0);
    ds.labels.resize(3 * per_class);
    for (int c = 0; c < 3; ++c) {
        for (int t = 0; t < per_class; ++t) {
            const int i = c * per_class + t;
            ds.points(i, 0) = cx[c] + spread * rng.normal();
            ds.points(i, 1) = cy[c] + spread * rng.normal();
            ds.labels[i] = c;
        }
    }
    return ds;
}

SeedSet first_of_each_class(const Dataset& ds) {
    SeedSet set;
    set.seeds.assign(ds.n_classes, {});
    for (int c = 0; c < ds.n_classes; ++c) {
        for (int i = 0; i < ds.n(); ++i) {
            if (ds.labels[i] == c) {
                set.seeds[c].push_back(i);
                break;
            }
        }
    }
    return set;
}

}  // namespace

TEST_CASE("three-circles generator shape and class balance") {
    const Dataset ds = gen_three_circles(7);
    CHECK(ds.n() == 6000);
    CHECK(ds.points.cols == 100);
    CHECK(ds.n_classes == 3);
    int counts[3] = {0, 0, 0};
    for (int l : ds.labels) {
        REQUIRE(l >= 0);
        REQUIRE(l < 3);
        ++counts[l];
    }
    for (int c = 0; c < 3; ++c) {
        CHECK(counts[c] > 1800);
        CHECK(counts[c] < 2200);
    }
}

TEST_CASE("noise-free points sit exactly on the circles") {
    const Dataset ds = gen_three_circles(3, 300, 10, 0.0);
    for (int i = 0; i < ds.n(); ++i) {
        const double r = std::hypot(ds.points(i, 0), ds.points(i, 1));
        CHECK(r == doctest::Approx(ds.labels[i] + 1.0).epsilon(1e-12));
        for (int d = 2; d < 10; ++d) CHECK(ds.points(i, d) == 0.0);
    }
}

TEST_CASE("noisy coordinates carry the configured variance") {
    const Dataset ds = gen_three_circles(11);
    // column 50 holds pure noise with variance 0.4^2 = 0.16
    double mean = 0.0;
    for (int i = 0; i < ds.n(); ++i) mean += ds.points(i, 50);
    mean /= ds.n();
    double var = 0.0;
    for (int i = 0; i < ds.n(); ++i) {
        const double d = ds.points(i, 50) - mean;
        var += d * d;
    }
    var /= ds.n() - 1;
    CHECK(var > 0.14);
    CHECK(var < 0.18);
}

TEST_CASE("generator is deterministic in the seed") {
    const Dataset a = gen_three_circles(42, 500);
    const Dataset b = gen_three_circles(42, 500);
    const Dataset c = gen_three_circles(43, 500);
    CHECK(a.points.data == b.points.data);
    CHECK(a.labels == b.labels);
    CHECK(a.points.data != c.points.data);
}

TEST_CASE("arc-length weighting fills circles by circumference") {
    const Dataset ds = gen_three_circles(5, 6000, 100, 0.4, true);
    int counts[3] = {0, 0, 0};
    for (int l : ds.labels) ++counts[l];
    CHECK(counts[0] / 6000.0 == doctest::Approx(1.0 / 6.0).epsilon(0.15));
    CHECK(counts[1] / 6000.0 == doctest::Approx(2.0 / 6.0).epsilon(0.10));
    CHECK(counts[2] / 6000.0 == doctest::Approx(3.0 / 6.0).epsilon(0.10));
}

TEST_CASE("generator rejects bad sizes") {
    CHECK_THROWS_AS(gen_three_circles(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(gen_three_circles(0, 10, 1), std::invalid_argument);
}

TEST_CASE("dataset file round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pottsrf_ds_test";
    fs::create_directories(dir);
    const std::string pts = (dir / "p.csv").string();
    const std::string lab = (dir / "l.csv").string();

    const Dataset orig = gen_three_circles(1, 40, 5);
    write_csv_matrix(orig.points, pts);
    write_labels(orig.labels, lab);
    const Dataset back = load_dataset(pts, lab);
    CHECK(back.n() == 40);
    CHECK(back.n_classes == 3);
    CHECK(back.labels == orig.labels);
    for (std::size_t i = 0; i < orig.points.data.size(); ++i)
        CHECK(back.points.data[i] == doctest::Approx(orig.points.data[i]).epsilon(1e-12));

    write_labels(std::vector<int>{0, 1}, lab);
    CHECK_THROWS_WITH_AS(load_dataset(pts, lab),
                         doctest::Contains("2 does not match point count 40"), parse_error);
    fs::remove_all(dir);
}

TEST_CASE("uniform seed sampling covers every class") {
    const Dataset ds = blob_dataset(20, 0.2, 9);
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const SeedSet set = sample_seeds(ds.labels, 3, 5, rng);
        REQUIRE(set.n_classes() == 3);
        CHECK(set.total() == 5);
        std::set<int> seen;
        for (int c = 0; c < 3; ++c) {
            CHECK(!set.seeds[c].empty());
            CHECK(std::is_sorted(set.seeds[c].begin(), set.seeds[c].end()));
            for (int i : set.seeds[c]) {
                CHECK(ds.labels[i] == c);
                CHECK(seen.insert(i).second);  // no repeats across classes
            }
        }
    }
}

TEST_CASE("stratified seed sampling draws evenly") {
    const Dataset ds = blob_dataset(20, 0.2, 9);
    Rng rng(21);
    const SeedSet set = sample_seeds(ds.labels, 3, 9, rng, true);
    for (int c = 0; c < 3; ++c) {
        CHECK(set.seeds[c].size() == 3);
        for (int i : set.seeds[c]) CHECK(ds.labels[i] == c);
    }
    CHECK_THROWS_AS(sample_seeds(ds.labels, 3, 8, rng, true), std::invalid_argument);
}

TEST_CASE("seed sampling failure modes") {
    Rng rng(3);
    const std::vector<int> labels = {0, 0, 0, 0};
    CHECK_THROWS_AS(sample_seeds(labels, 2, 1, rng), std::invalid_argument);  // below class count
    CHECK_THROWS_AS(sample_seeds(labels, 2, 5, rng), std::invalid_argument);  // above n
    // class 1 has no members, so uniform draws can never cover it
    CHECK_THROWS_AS(sample_seeds(labels, 2, 2, rng), numeric_error);
    const std::vector<int> bad = {0, 3, 0, 0};
    CHECK_THROWS_AS(sample_seeds(bad, 2, 2, rng), std::invalid_argument);
}

TEST_CASE("accuracy and permutation matching") {
    const std::vector<int> truth = {0, 0, 1, 1};
    CHECK(accuracy({0, 0, 1, 0}, truth) == doctest::Approx(0.75));
    const std::vector<bool> ignore = {false, false, false, true};
    CHECK(accuracy({0, 0, 1, 0}, truth, &ignore) == doctest::Approx(1.0));
    CHECK_THROWS_AS(accuracy({0, 1}, truth), std::invalid_argument);

    CHECK(permuted_accuracy({1, 1, 0, 0}, truth, 2) == doctest::Approx(1.0));
    CHECK(permuted_accuracy({1, 0, 0, 0}, truth, 2) == doctest::Approx(0.75));
    CHECK_THROWS_AS(permuted_accuracy({0}, {0}, 9), std::invalid_argument);
}

TEST_CASE("clustering separable blobs is exact") {
    const Dataset ds = blob_dataset(30, 0.3, 13);
    const SeedSet seeds = first_of_each_class(ds);
    ClusterParams params;
    params.knn.s = 6;
    params.alpha = 1.0;
    params.solver.epsilon = 1e-6;
    params.solver.max_iter = 5000;
    const TrialResult trial = cluster(ds, seeds, params);
    CHECK(trial.accuracy == doctest::Approx(1.0));
    CHECK(trial.accuracy_unlabeled == doctest::Approx(1.0));
    CHECK(trial.accuracy_unclamped == doctest::Approx(1.0));
    CHECK(trial.labels == ds.labels);
    CHECK(trial.report.iterations >= 1);
}

TEST_CASE("seed labels stay clamped even when the solver smooths them away") {
    const Dataset ds = blob_dataset(12, 0.3, 31);
    const SeedSet seeds = first_of_each_class(ds);
    ClusterParams params;
    params.knn.s = 6;
    params.alpha = 500.0;  // TV dominates, pushing toward one constant class
    params.solver.max_iter = 800;
    const TrialResult trial = cluster(ds, seeds, params);
    for (int c = 0; c < 3; ++c) {
        for (int i : seeds.seeds[c]) CHECK(trial.labels[i] == c);
    }
}

TEST_CASE("cluster rejects unusable configurations") {
    const Dataset ds = blob_dataset(10, 0.3, 8);
    const SeedSet seeds = first_of_each_class(ds);
    ClusterParams params;
    params.knn.s = 4;

    ClusterParams l2 = params;
    l2.force = RegionForceKind::l2;
    CHECK_THROWS_AS(cluster(ds, seeds, l2), std::invalid_argument);

    SeedSet two;
    two.seeds.assign(2, {});
    two.seeds[0].push_back(0);
    two.seeds[1].push_back(10);
    CHECK_THROWS_AS(cluster(ds, two, params), std::invalid_argument);

    const Graph wrong = build_knn_graph(blob_dataset(7, 0.3, 8).points, params.knn);
    CHECK_THROWS_AS(cluster(wrong, ds, seeds, params), std::invalid_argument);
}

TEST_CASE("trial aggregates match their own trials") {
    const Dataset ds = blob_dataset(20, 0.3, 19);
    ClusterParams params;
    params.knn.s = 5;
    params.alpha = 1.0;
    params.solver.max_iter = 2000;
    const TrialAggregate agg = run_trials(ds, params, 4, 6, 77);
    REQUIRE(agg.trials.size() == 4);

    double sum = 0.0, sum_it = 0.0;
    double lo = 1.0, hi = 0.0;
    for (const auto& tr : agg.trials) {
        sum += tr.accuracy;
        sum_it += tr.report.iterations;
        lo = std::min(lo, tr.accuracy);
        hi = std::max(hi, tr.accuracy);
        CHECK(tr.seeds.total() == 6);
    }
    CHECK(agg.mean_accuracy == doctest::Approx(sum / 4));
    CHECK(agg.min_accuracy == doctest::Approx(lo));
    CHECK(agg.max_accuracy == doctest::Approx(hi));
    CHECK(agg.mean_iterations == doctest::Approx(sum_it / 4));
    double var = 0.0;
    for (const auto& tr : agg.trials) {
        const double d = tr.accuracy - agg.mean_accuracy;
        var += d * d;
    }
    CHECK(agg.stddev_accuracy == doctest::Approx(std::sqrt(var / 3)));
    CHECK(agg.mean_wall_time_s >= 0.0);

    CHECK_THROWS_AS(run_trials(ds, params, 0, 6, 1), std::invalid_argument);
}

TEST_CASE("repeated trial runs are deterministic") {
    const Dataset ds = blob_dataset(15, 0.3, 23);
    ClusterParams params;
    params.knn.s = 5;
    params.solver.max_iter = 1500;
    const TrialAggregate a = run_trials(ds, params, 2, 3, 5);
    const TrialAggregate b = run_trials(ds, params, 2, 3, 5);
    CHECK(a.mean_accuracy == b.mean_accuracy);
    for (int t = 0; t < 2; ++t) {
        CHECK(a.trials[t].labels == b.trials[t].labels);
        CHECK(a.trials[t].seeds.seeds == b.trials[t].seeds.seeds);
    }
}
