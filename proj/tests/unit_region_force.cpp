#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "oracles.hpp"
#include "pottsrf/errors.hpp"
#include "pottsrf/graph.hpp"
#include "pottsrf/region_force.hpp"
#include "pottsrf/rng.hpp"

using namespace pottsrf;

namespace {

SeedSet random_seeds(Rng& rng, int n, int k) {
    SeedSet s;
    s.seeds.resize(k);
    for (int c = 0; c < k; ++c) s.seeds[c].push_back(rng.uniform_int(n));
    // dedupe collisions across classes by shifting
    for (int c = 1; c < k; ++c) {
        while (true) {
            bool clash = false;
            for (int p = 0; p < c; ++p) clash |= s.seeds[p][0] == s.seeds[c][0];
            if (!clash) break;
            s.seeds[c][0] = (s.seeds[c][0] + 1) % n;
        }
    }
    return s;
}

}  // namespace

TEST_CASE("diffusion probabilities agree with the dense oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 4 + rng.uniform_int(20);
        const int k = 2 + rng.uniform_int(2);
        const int m = 1 + rng.uniform_int(2);
        const Graph g = oracles::random_graph(rng, n);
        const SeedSet seeds = random_seeds(rng, n, k);

        const SparseMatrix w_hat = normalize_affinity(affinity_matrix(g, 1.0));
        const Matrix p = diffusion_probabilities(w_hat, seeds, m);
        const Matrix oracle = oracles::dense_diffusion(g, seeds, m);

        REQUIRE(p.rows == n);
        REQUIRE(p.cols == k);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c)
                CHECK(p(i, c) == doctest::Approx(oracle(i, c)).epsilon(1e-12));
    }
}

TEST_CASE("diffusion probability rows sum to one") {
    Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4 + rng.uniform_int(25);
        const Graph g = oracles::random_graph(rng, n);
        const SeedSet seeds = random_seeds(rng, n, 3);
        const SparseMatrix w_hat = normalize_affinity(affinity_matrix(g, 1.0));
        const Matrix p = diffusion_probabilities(w_hat, seeds, 2);
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int c = 0; c < 3; ++c) sum += p(i, c);
            CHECK(std::abs(sum - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("unreachable nodes fall back to uniform probabilities") {
    // two disconnected pairs; both seeds sit in the first component, so with
    // m = 1 the second component sees zero mass from every class
    const Graph g = Graph::from_undirected_edges(
        4, std::vector<UndirectedEdge>{{0, 1, 0.5}, {2, 3, 1.0}});
    SeedSet seeds;
    seeds.seeds = {{0}, {1}};
    const SparseMatrix w_hat = normalize_affinity(affinity_matrix(g, 1.0));
    const Matrix p = diffusion_probabilities(w_hat, seeds, 1);
    CHECK(p(2, 0) == doctest::Approx(0.5));
    CHECK(p(2, 1) == doctest::Approx(0.5));
    CHECK(p(3, 0) == doctest::Approx(0.5));
    CHECK(p(0, 0) > 0.5);  // seed of class 0 leans to its own class
}

TEST_CASE("diffusion probabilities validate their inputs") {
    const Graph g = build_grid_graph({2, 2});
    const SparseMatrix w_hat = normalize_affinity(affinity_matrix(g, 1.0));
    SeedSet seeds;
    seeds.seeds = {{0}, {1}};
    CHECK_THROWS_AS(diffusion_probabilities(w_hat, seeds, 3), std::invalid_argument);
    CHECK_THROWS_AS(diffusion_probabilities(w_hat, seeds, 0), std::invalid_argument);
    SeedSet empty_class;
    empty_class.seeds = {{0}, {}};
    CHECK_THROWS_AS(diffusion_probabilities(w_hat, empty_class, 1), std::invalid_argument);
    SeedSet out_of_range;
    out_of_range.seeds = {{0}, {7}};
    CHECK_THROWS_AS(diffusion_probabilities(w_hat, out_of_range, 1), std::invalid_argument);
}

TEST_CASE("zero diagonal raises a numeric error naming the node") {
    // node 1 has no self-loop and m = 1 diagonal entry 0
    SparseMatrix w;
    w.n = 2;
    w.row_start = {0, 2, 3};
    w.col = {0, 1, 0};
    w.val = {1.0, 0.5, 0.5};
    SeedSet seeds;
    seeds.seeds = {{0}, {1}};
    try {
        diffusion_probabilities(w, seeds, 1);
        FAIL("expected numeric_error");
    } catch (const numeric_error& e) {
        CHECK(std::string(e.what()).find('1') != std::string::npos);
    }
}

TEST_CASE("log force hand values") {
    Matrix p(1, 2);
    p(0, 0) = 1.0;
    p(0, 1) = 0.5;
    const Matrix f = region_force_log(p, 1e-3);
    // -log(1.001) + log(0.001) = -6.90875477931522
    CHECK(f(0, 0) == doctest::Approx(-6.90875477931522).epsilon(1e-12));
    CHECK(f(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("log force with zero offset rejects degenerate probabilities") {
    Matrix fine(1, 2);
    fine(0, 0) = 0.3;
    fine(0, 1) = 0.7;
    CHECK_NOTHROW(region_force_log(fine, 0.0));
    Matrix bad(1, 2);
    bad(0, 0) = 1.0;
    bad(0, 1) = 0.0;
    CHECK_THROWS_AS(region_force_log(bad, 0.0), numeric_error);
    CHECK_THROWS_AS(region_force_log(fine, -0.5), std::invalid_argument);
}

TEST_CASE("log force stays below the linear-over-p bound") {
    // -log(p) + log(1-p) <= (1-2p)/p on (0, 1)
    for (int t = 1; t < 1000; ++t) {
        const double p = t / 1000.0;
        Matrix m(1, 1);
        m(0, 0) = p;
        const double f = region_force_log(m, 0.0)(0, 0);
        CHECK(f <= (1.0 - 2.0 * p) / p + 1e-12);
    }
}

TEST_CASE("linear force is 1 - 2p") {
    Matrix p(2, 2);
    p(0, 0) = 0.0;
    p(0, 1) = 1.0;
    p(1, 0) = 0.25;
    p(1, 1) = 0.75;
    const Matrix f = region_force_linear(p);
    CHECK(f(0, 0) == 1.0);
    CHECK(f(0, 1) == -1.0);
    CHECK(f(1, 0) == 0.5);
    CHECK(f(1, 1) == -0.5);
}

TEST_CASE("l2 force is the squared distance to each centroid") {
    Matrix features(2, 2);
    features(0, 0) = 0.0;
    features(0, 1) = 0.0;
    features(1, 0) = 1.0;
    features(1, 1) = 1.0;
    Matrix centroids(2, 2);
    centroids(0, 0) = 0.0;
    centroids(0, 1) = 0.0;
    centroids(1, 0) = 3.0;
    centroids(1, 1) = 4.0;
    const Matrix f = region_force_l2(features, centroids);
    CHECK(f(0, 0) == 0.0);
    CHECK(f(0, 1) == 25.0);
    CHECK(f(1, 0) == 2.0);
    CHECK(f(1, 1) == doctest::Approx(13.0));
}

TEST_CASE("image probabilities: two-centroid hand value") {
    Matrix features(1, 1);
    features(0, 0) = 0.0;
    Matrix centroids(2, 1);
    centroids(0, 0) = 0.0;
    centroids(1, 0) = 2.0;
    const Matrix p = image_probabilities(features, centroids, 1.0);
    // exp(0) / (exp(0) + exp(-2/2)) = 1 / (1 + e^-1) = 0.7310585786300049
    CHECK(p(0, 0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    CHECK(p(0, 0) + p(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("image probabilities: squared distance option") {
    Matrix features(1, 1);
    features(0, 0) = 0.0;
    Matrix centroids(2, 1);
    centroids(0, 0) = 0.0;
    centroids(1, 0) = 2.0;
    const Matrix p = image_probabilities(features, centroids, 1.0, true);
    // exp(0) / (exp(0) + exp(-4/2))
    CHECK(p(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("image probabilities survive extreme distances") {
    Matrix features(1, 1);
    features(0, 0) = 0.0;
    Matrix centroids(2, 1);
    centroids(0, 0) = 0.0;
    centroids(1, 0) = 1e6;
    const Matrix p = image_probabilities(features, centroids, 1e-3, true);
    CHECK(std::isfinite(p(0, 0)));
    CHECK(p(0, 0) == doctest::Approx(1.0));
    CHECK(p(0, 1) >= 0.0);
}

TEST_CASE("image probabilities validate sigma and dimensions") {
    Matrix features(1, 2), centroids(2, 1);
    CHECK_THROWS_AS(image_probabilities(features, centroids, 1.0), std::invalid_argument);
    Matrix c2(2, 2);
    CHECK_THROWS_AS(image_probabilities(features, c2, 0.0), std::invalid_argument);
}

TEST_CASE("kmeans recovers well-separated blobs") {
    Rng rng(17);
    Matrix pts(60, 2);
    for (int i = 0; i < 30; ++i) {
        pts(i, 0) = 0.0 + 0.05 * rng.normal();
        pts(i, 1) = 0.0 + 0.05 * rng.normal();
    }
    for (int i = 30; i < 60; ++i) {
        pts(i, 0) = 5.0 + 0.05 * rng.normal();
        pts(i, 1) = 5.0 + 0.05 * rng.normal();
    }
    Rng krng(1);
    const Matrix c = kmeans_centroids(pts, 2, krng);
    REQUIRE(c.rows == 2);
    const double lo = std::min(c(0, 0), c(1, 0));
    const double hi = std::max(c(0, 0), c(1, 0));
    CHECK(lo == doctest::Approx(0.0).epsilon(0.1));
    CHECK(hi == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("kmeans is deterministic given the rng seed") {
    Rng rng(23);
    Matrix pts(40, 3);
    for (auto& v : pts.data) v = rng.uniform(-1.0, 1.0);
    Rng a(9), b(9);
    const Matrix ca = kmeans_centroids(pts, 4, a);
    const Matrix cb = kmeans_centroids(pts, 4, b);
    CHECK(ca.data == cb.data);
}

TEST_CASE("kmeans needs k distinct rows") {
    Matrix pts(3, 1);
    pts(0, 0) = 1.0;
    pts(1, 0) = 1.0;
    pts(2, 0) = 2.0;
    Rng rng(1);
    CHECK_THROWS_AS(kmeans_centroids(pts, 3, rng), std::invalid_argument);
    CHECK_NOTHROW(kmeans_centroids(pts, 2, rng));
}
