#pragma once

#include <span>
#include <string>
#include <vector>

#include "pottsrf/graph.hpp"
#include "pottsrf/matrix.hpp"

namespace pottsrf {

enum class Algorithm { pdhg, admm };

/// Step-size schedule for PDHG. "fixed" keeps beta/gamma constant; "ramp"
/// uses beta_l = beta * l and gamma_l = gamma / (1 + eta * l) with l the
/// 1-based iteration counter.
enum class StepSchedule { fixed, ramp };

struct SolverConfig {
    Algorithm algorithm = Algorithm::pdhg;
    double beta = 0.4;    // dual ascent step (PDHG) / projected-gradient step (ADMM)
    double gamma = 0.4;   // primal descent step (PDHG only)
    double theta = -0.5;  // PDHG extrapolation coefficient
    double penalty = 0.05;  // ADMM augmentation constant c
    StepSchedule schedule = StepSchedule::fixed;
    double schedule_eta = 0.1;
    double epsilon = 1e-3;  // relative duality-gap tolerance
    int max_iter = 2500;
    // PDHG only: reproduce the stale-operand sweep exactly (gradient of phi^l
    // in the q-step, div of q^l in the phi-step). Default refreshes both.
    bool literal_updates = false;
    // Start from the uniform simplex center instead of the one-hot argmin of f.
    bool uniform_init = false;
    int energy_every = 1;  // gap check cadence, in iterations
};

enum class Termination { gap, max_iter };

struct SolverReport {
    int iterations = 0;
    Termination termination = Termination::max_iter;
    double primal_energy = 0.0;
    double dual_energy = 0.0;
    double final_gap = 0.0;
    double wall_time_s = 0.0;
    std::vector<double> primal_history;
    std::vector<double> dual_history;
    std::vector<double> gap_history;
};

/// Euclidean projection of v onto the probability simplex, written in place.
void project_simplex(std::span<double> v);

/// Pixelwise radial projection onto |q(x)|_2 <= alpha(x).
void project_dual_ball(const GridGeometry& geom, PixelVectorField& q, const NodeField& alpha);

/// Componentwise clamp of q_i(j) to [-alpha_i, alpha_i] (the graph dual box).
void project_dual_ball(const Graph& g, EdgeField& q, const NodeField& alpha);

/// Relaxed Potts primal energy sum_k [<f_k, phi_k> + TV_alpha(phi_k)].
double primal_energy(const Graph& g, const Matrix& f, const Matrix& phi, const NodeField& alpha);
double primal_energy(const GridGeometry& geom, const Matrix& f, const Matrix& phi,
                     const NodeField& alpha);

/// Dual energy sum_x min_k (f_k(x) + div q_k(x)); flows[k] must lie in the
/// dual constraint set for this to be a valid lower bound.
double dual_energy(const Graph& g, const Matrix& f, const std::vector<EdgeField>& flows);
double dual_energy(const GridGeometry& geom, const Matrix& f,
                   const std::vector<PixelVectorField>& flows);

struct GraphSolveResult {
    Matrix phi;  // n x K, rows on the simplex
    std::vector<EdgeField> flows;
    SolverReport report;
    // ADMM auxiliaries at exit (empty for PDHG).
    NodeField lambda;
    Matrix h;
};

struct GridSolveResult {
    Matrix phi;
    std::vector<PixelVectorField> flows;
    SolverReport report;
    NodeField lambda;
    Matrix h;
};

/// Minimizes the simplex-relaxed Potts energy with region cost f (n x K) and
/// spatial weight alpha (per node / per pixel).
GraphSolveResult solve(const Graph& g, const Matrix& f, const NodeField& alpha,
                       const SolverConfig& cfg);
GridSolveResult solve(const GridGeometry& geom, const Matrix& f, const NodeField& alpha,
                      const SolverConfig& cfg);

/// Row-wise argmax of phi; ties break toward the lower class index.
std::vector<int> assign_labels(const Matrix& phi);

const char* to_string(Algorithm a);
const char* to_string(Termination t);

}  // namespace pottsrf
