#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pottsrf/errors.hpp"
#include "pottsrf/solver.hpp"

using namespace pottsrf;

namespace {

// two nodes joined by a unit edge; labeling (0, 0) is optimal with energy 0.5
struct TwoNode {
    Graph g = Graph::from_undirected_edges(2, std::vector<UndirectedEdge>{{0, 1, 1.0}});
    Matrix f{2, 2};
    NodeField alpha = NodeField(2, 1.0);

    TwoNode() {
        f(0, 0) = 0.0;
        f(0, 1) = 3.0;
        f(1, 0) = 0.5;
        f(1, 1) = 0.0;
    }
};

Matrix one_hot(const std::vector<int>& labels, int k) {
    Matrix m(static_cast<int>(labels.size()), k, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<int>(i), labels[i]) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("simplex projection matches the exhaustive QP oracle") {
    Rng rng(19);
    for (int trial = 0; trial < 1000; ++trial) {
        const int dim = 1 + rng.uniform_int(12);
        std::vector<double> v(dim);
        for (auto& x : v) x = rng.uniform(-2.0, 3.0);
        std::vector<double> got = v;
        project_simplex(got);
        const std::vector<double> want = oracles::simplex_qp(v);
        double sum = 0.0;
        for (int i = 0; i < dim; ++i) {
            CHECK(std::abs(got[i] - want[i]) < 1e-8);
            CHECK(got[i] >= 0.0);
            sum += got[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("simplex projection is idempotent and keeps simplex points") {
    std::vector<double> v = {0.2, 0.3, 0.5};
    auto w = v;
    project_simplex(w);
    for (int i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(v[i]).epsilon(1e-15));
    std::vector<double> u = {2.0, -1.0, 0.5};
    project_simplex(u);
    auto u2 = u;
    project_simplex(u2);
    for (int i = 0; i < 3; ++i) CHECK(u2[i] == doctest::Approx(u[i]).epsilon(1e-14));
}

TEST_CASE("grid dual projection scales radially") {
    const GridGeometry geom{2, 1};
    PixelVectorField q(2, 1);
    q.x = {3.0, 0.1};
    q.y = {4.0, 0.2};
    const NodeField alpha = {1.0, 1.0};
    project_dual_ball(geom, q, alpha);
    CHECK(q.x[0] == doctest::Approx(0.6));  // (3,4)/5
    CHECK(q.y[0] == doctest::Approx(0.8));
    CHECK(q.x[1] == 0.1);  // inside the ball, untouched
    CHECK(q.y[1] == 0.2);
}

TEST_CASE("graph dual projection clamps by the source node weight") {
    const Graph g = Graph::from_undirected_edges(2, std::vector<UndirectedEdge>{{0, 1, 1.0}});
    EdgeField q = {5.0, -5.0};
    const NodeField alpha = {0.5, 2.0};
    project_dual_ball(g, q, alpha);
    // entry 0 lives in row 0 (alpha 0.5), entry 1 in row 1 (alpha 2)
    CHECK(q[0] == 0.5);
    CHECK(q[1] == -2.0);
}

TEST_CASE("primal energy of one-hot labelings matches the cut oracle") {
    Rng rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + rng.uniform_int(8);
        const int k = 2 + rng.uniform_int(2);
        const Graph g = oracles::random_graph(rng, n);
        Matrix f(n, k);
        for (auto& v : f.data) v = rng.uniform(-1.0, 1.0);
        NodeField alpha(n);
        for (auto& a : alpha) a = rng.uniform(0.05, 0.5);
        std::vector<int> labels(n);
        for (auto& l : labels) l = rng.uniform_int(k);

        const double lib = primal_energy(g, f, one_hot(labels, k), alpha);
        const double oracle = oracles::labeling_energy(g, f, alpha, labels);
        CHECK(lib == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("weak duality holds for random feasible pairs") {
    Rng rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + rng.uniform_int(10);
        const int k = 2 + rng.uniform_int(2);
        const Graph g = oracles::random_graph(rng, n);
        Matrix f(n, k);
        for (auto& v : f.data) v = rng.uniform(-1.0, 1.0);
        NodeField alpha(n);
        for (auto& a : alpha) a = rng.uniform(0.05, 0.5);

        Matrix phi(n, k);
        for (auto& v : phi.data) v = rng.uniform(-1.0, 2.0);
        for (int i = 0; i < n; ++i) project_simplex(phi.row(i));

        std::vector<EdgeField> flows(k, EdgeField(g.n_directed()));
        for (auto& q : flows) {
            for (auto& v : q) v = rng.uniform(-2.0, 2.0);
            project_dual_ball(g, q, alpha);
        }
        const double ep = primal_energy(g, f, phi, alpha);
        const double ed = dual_energy(g, f, flows);
        CHECK(ed <= ep + 1e-12 * std::max(1.0, std::abs(ep)));
    }
}

TEST_CASE("two-node instance: both solvers find the optimum") {
    const TwoNode inst;
    CHECK(oracles::brute_force_optimum(inst.g, inst.f, inst.alpha, 2) == doctest::Approx(0.5));

    for (const Algorithm algo : {Algorithm::pdhg, Algorithm::admm}) {
        SolverConfig cfg;
        cfg.algorithm = algo;
        cfg.beta = algo == Algorithm::admm ? 0.05 : 0.2;
        cfg.gamma = 0.2;
        cfg.penalty = 0.1;
        cfg.epsilon = 1e-10;
        cfg.max_iter = 20000;
        const GraphSolveResult res = solve(inst.g, inst.f, inst.alpha, cfg);
        CHECK(assign_labels(res.phi) == std::vector<int>{0, 0});
        CHECK(res.report.primal_energy == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(res.report.dual_energy == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(res.report.termination == Termination::gap);
        CHECK(res.flows.size() == 2);
    }
}

TEST_CASE("pdhg variants land on the same optimum") {
    const TwoNode inst;
    SolverConfig cfg;
    cfg.beta = cfg.gamma = 0.2;
    cfg.epsilon = 1e-10;
    cfg.max_iter = 20000;

    SolverConfig literal = cfg;
    literal.literal_updates = true;
    SolverConfig uniform = cfg;
    uniform.uniform_init = true;

    for (const SolverConfig& c : {cfg, literal, uniform}) {
        const GraphSolveResult res = solve(inst.g, inst.f, inst.alpha, c);
        CHECK(assign_labels(res.phi) == std::vector<int>{0, 0});
        CHECK(res.report.primal_energy == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("ramp schedule converges on the two-node instance") {
    const TwoNode inst;
    SolverConfig cfg;
    cfg.beta = 0.5;
    cfg.gamma = 0.5;
    cfg.schedule = StepSchedule::ramp;
    cfg.schedule_eta = 0.1;
    cfg.epsilon = 1e-6;
    cfg.max_iter = 2500;
    const GraphSolveResult res = solve(inst.g, inst.f, inst.alpha, cfg);
    CHECK(res.report.termination == Termination::gap);
    CHECK(assign_labels(res.phi) == std::vector<int>{0, 0});
}

TEST_CASE("admm exposes feasible auxiliaries at exit") {
    const TwoNode inst;
    SolverConfig cfg;
    cfg.algorithm = Algorithm::admm;
    cfg.beta = 0.05;
    cfg.penalty = 0.1;
    cfg.epsilon = 1e-8;
    cfg.max_iter = 20000;
    const GraphSolveResult res = solve(inst.g, inst.f, inst.alpha, cfg);
    REQUIRE(res.h.rows == 2);
    REQUIRE(res.lambda.size() == 2);
    // sink flows stay below their capacities f_k
    for (int i = 0; i < 2; ++i)
        for (int c = 0; c < 2; ++c) CHECK(res.h(i, c) <= inst.f(i, c) + 1e-9);
    // phi rows are projected onto the simplex at extraction
    for (int i = 0; i < 2; ++i) {
        double sum = 0.0;
        for (int c = 0; c < 2; ++c) {
            CHECK(res.phi(i, c) >= 0.0);
            sum += res.phi(i, c);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pdhg keeps phi on the simplex every iteration") {
    // re-running with growing iteration caps samples the trajectory
    const TwoNode inst;
    for (int cap : {1, 2, 3, 5, 8, 13, 21}) {
        SolverConfig cfg;
        cfg.beta = cfg.gamma = 0.3;
        cfg.epsilon = 1e-14;
        cfg.max_iter = cap;
        const GraphSolveResult res = solve(inst.g, inst.f, inst.alpha, cfg);
        for (int i = 0; i < 2; ++i) {
            double sum = 0.0;
            for (int c = 0; c < 2; ++c) {
                CHECK(res.phi(i, c) >= -1e-15);
                sum += res.phi(i, c);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("termination bookkeeping") {
    const TwoNode inst;
    SolverConfig cfg;
    cfg.beta = cfg.gamma = 0.2;
    cfg.epsilon = 1e-16;  // unreachable
    cfg.max_iter = 7;
    const GraphSolveResult res = solve(inst.g, inst.f, inst.alpha, cfg);
    CHECK(res.report.iterations == 7);
    CHECK(res.report.termination == Termination::max_iter);
    CHECK(res.report.gap_history.size() == 7);

    SolverConfig strided = cfg;
    strided.energy_every = 3;
    const GraphSolveResult r2 = solve(inst.g, inst.f, inst.alpha, strided);
    // evaluations at 3, 6 and the final iteration 7
    CHECK(r2.report.gap_history.size() == 3);
    CHECK(r2.report.final_gap == r2.report.gap_history.back());
}

TEST_CASE("solver validates its inputs") {
    const TwoNode inst;
    SolverConfig cfg;
    Matrix wrong_rows(3, 2);
    CHECK_THROWS_AS(solve(inst.g, wrong_rows, inst.alpha, cfg), std::invalid_argument);
    Matrix one_class(2, 1, 0.0);
    CHECK_NOTHROW(solve(inst.g, one_class, inst.alpha, cfg));
    CHECK_THROWS_AS(solve(inst.g, inst.f, NodeField(3, 1.0), cfg), std::invalid_argument);
    CHECK_THROWS_AS(solve(inst.g, inst.f, NodeField(2, -1.0), cfg), std::invalid_argument);

    Matrix bad_f = inst.f;
    bad_f(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solve(inst.g, bad_f, inst.alpha, cfg), std::invalid_argument);

    SolverConfig bad = cfg;
    bad.max_iter = 0;
    CHECK_THROWS_AS(solve(inst.g, inst.f, inst.alpha, bad), std::invalid_argument);
    bad = cfg;
    bad.beta = 0.0;
    CHECK_THROWS_AS(solve(inst.g, inst.f, inst.alpha, bad), std::invalid_argument);
    bad = cfg;
    bad.energy_every = 0;
    CHECK_THROWS_AS(solve(inst.g, inst.f, inst.alpha, bad), std::invalid_argument);
}

TEST_CASE("grid solve finds the optimum of a two-pixel instance") {
    const GridGeometry geom{2, 1};
    Matrix f(2, 2);
    f(0, 0) = 0.0;
    f(0, 1) = 3.0;
    f(1, 0) = 0.5;
    f(1, 1) = 0.0;
    const NodeField alpha(2, 1.0);
    // labelings: (0,0) -> 0.5; (1,1) -> 3; split labelings pay 2 in TV
    for (const Algorithm algo : {Algorithm::pdhg, Algorithm::admm}) {
        SolverConfig cfg;
        cfg.algorithm = algo;
        cfg.beta = algo == Algorithm::admm ? 0.05 : 0.25;
        cfg.gamma = 0.25;
        cfg.penalty = 0.1;
        cfg.epsilon = 1e-9;
        cfg.max_iter = 20000;
        const GridSolveResult res = solve(geom, f, alpha, cfg);
        CHECK(assign_labels(res.phi) == std::vector<int>{0, 0});
        CHECK(res.report.primal_energy == doctest::Approx(0.5).epsilon(1e-5));
    }
}

TEST_CASE("argmax labels break ties toward the lower class") {
    Matrix phi(2, 3, 0.0);
    phi(0, 0) = 0.5;
    phi(0, 1) = 0.5;
    phi(1, 2) = 1.0;
    CHECK(assign_labels(phi) == std::vector<int>{0, 2});
}

TEST_CASE("enum names round trip") {
    CHECK(std::string(to_string(Algorithm::pdhg)) == "pdhg");
    CHECK(std::string(to_string(Algorithm::admm)) == "admm");
    CHECK(std::string(to_string(Termination::gap)) == "gap");
    CHECK(std::string(to_string(Termination::max_iter)) == "max_iter");
}
