#include "pottsrf/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pottsrf/errors.hpp"

namespace pottsrf {

void project_simplex(std::span<double> v) {
    static thread_local std::vector<double> u;
    u.assign(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    for (auto& x : v) x = std::max(x - tau, 0.0);
}

void project_dual_ball(const GridGeometry& geom, PixelVectorField& q, const NodeField& alpha) {
    const int n = geom.n();
    if (q.width != geom.width || q.height != geom.height ||
        static_cast<int>(alpha.size()) != n)
        throw std::invalid_argument("size mismatch");
    for (int p = 0; p < n; ++p) {
        if (alpha[p] < 0.0) throw std::invalid_argument("alpha must be nonnegative");
        const double norm = std::sqrt(q.x[p] * q.x[p] + q.y[p] * q.y[p]);
        if (norm > alpha[p]) {
            const double s = alpha[p] / norm;
            q.x[p] *= s;
            q.y[p] *= s;
        }
    }
}

void project_dual_ball(const Graph& g, EdgeField& q, const NodeField& alpha) {
    if (static_cast<std::int64_t>(q.size()) != g.n_directed() ||
        static_cast<int>(alpha.size()) != g.n_nodes)
        throw std::invalid_argument("size mismatch");
    for (int i = 0; i < g.n_nodes; ++i) {
        const double a = alpha[i];
        if (a < 0.0) throw std::invalid_argument("alpha must be nonnegative");
        for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
            q[e] = std::clamp(q[e], -a, a);
        }
    }
}

namespace {

// The two total-variation backends share the solver loop below. Each supplies
// its divergence D (the operator appearing in the energies), the scaled
// adjoint update q += s * D^T(u), the dual-feasible projection and the TV
// functional. With these, the same update formulas realize the isotropic grid
// model and the anisotropic graph model.
struct GraphBackend {
    const Graph& g;
    using Flow = EdgeField;

    int n() const { return g.n_nodes; }
    Flow zero_flow() const { return EdgeField(g.n_directed(), 0.0); }

    // D^T = gradient (divergence here is the exact adjoint of the gradient)
    void add_scaled_adjoint(Flow& q, double s, const NodeField& u) const {
        for (int i = 0; i < g.n_nodes; ++i) {
            for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
                q[e] += s * g.weight[e] * (u[g.nbr[e]] - u[i]);
            }
        }
    }

    void div(const Flow& q, NodeField& out) const {
        for (int i = 0; i < g.n_nodes; ++i) {
            double s = 0.0;
            for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
                s += g.weight[e] * (q[g.twin[e]] - q[e]);
            }
            out[i] = s;
        }
    }

    void project(Flow& q, const NodeField& alpha) const { project_dual_ball(g, q, alpha); }

    double tv(const NodeField& u, const NodeField& alpha) const {
        return anisotropic_tv(g, u, alpha);
    }
};

struct GridBackend {
    GridGeometry geom;
    using Flow = PixelVectorField;

    int n() const { return geom.n(); }
    Flow zero_flow() const { return PixelVectorField(geom.width, geom.height); }

    // Divergence is the negative adjoint of the forward-difference gradient,
    // so D^T(u) = -grad u.
    void add_scaled_adjoint(Flow& q, double s, const NodeField& u) const {
        const int w = geom.width, h = geom.height;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                if (x + 1 < w) q.x[p] -= s * (u[p + 1] - u[p]);
                if (y + 1 < h) q.y[p] -= s * (u[p + w] - u[p]);
            }
        }
    }

    void div(const Flow& q, NodeField& out) const {
        const int w = geom.width, h = geom.height;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                double v = 0.0;
                if (x + 1 < w) v += q.x[p];
                if (x > 0) v -= q.x[p - 1];
                if (y + 1 < h) v += q.y[p];
                if (y > 0) v -= q.y[p - w];
                out[p] = v;
            }
        }
    }

    void project(Flow& q, const NodeField& alpha) const { project_dual_ball(geom, q, alpha); }

    double tv(const NodeField& u, const NodeField& alpha) const {
        return grid_tv(geom, u, alpha);
    }
};

void step_sizes(const SolverConfig& cfg, int l, double& beta_l, double& gamma_l) {
    if (cfg.schedule == StepSchedule::ramp) {
        beta_l = cfg.beta * l;
        gamma_l = cfg.gamma / (1.0 + cfg.schedule_eta * l);
    } else {
        beta_l = cfg.beta;
        gamma_l = cfg.gamma;
    }
}

void init_phi(const Matrix& f, bool uniform, std::vector<NodeField>& phi) {
    const int n = f.rows, k = f.cols;
    if (uniform) {
        for (int c = 0; c < k; ++c) std::fill(phi[c].begin(), phi[c].end(), 1.0 / k);
        return;
    }
    for (int c = 0; c < k; ++c) std::fill(phi[c].begin(), phi[c].end(), 0.0);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < k; ++c) {
            if (f(i, c) < f(i, best)) best = c;
        }
        phi[best][i] = 1.0;
    }
}

double relative_gap(double ep, double ed) {
    const double diff = std::abs(ep - ed);
    return ep == 0.0 ? diff : diff / std::abs(ep);
}

template <class Backend>
double primal_energy_cols(const Backend& bk, const std::vector<NodeField>& fcol,
                          const std::vector<NodeField>& phi, const NodeField& alpha) {
    double e = 0.0;
    const int n = bk.n();
    for (std::size_t c = 0; c < fcol.size(); ++c) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += fcol[c][i] * phi[c][i];
        e += dot + bk.tv(phi[c], alpha);
    }
    return e;
}

double dual_energy_cols(const std::vector<NodeField>& fcol, const std::vector<NodeField>& divq) {
    const int n = static_cast<int>(fcol[0].size());
    const int k = static_cast<int>(fcol.size());
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
        double m = fcol[0][i] + divq[0][i];
        for (int c = 1; c < k; ++c) m = std::min(m, fcol[c][i] + divq[c][i]);
        e += m;
    }
    return e;
}

struct CoreResult {
    Matrix phi;
    SolverReport report;
    NodeField lambda;
    Matrix h;
};

template <class Backend>
CoreResult solve_core(const Backend& bk, const Matrix& f, const NodeField& alpha,
                      const SolverConfig& cfg, std::vector<typename Backend::Flow>& q) {
    const int n = bk.n();
    const int k = f.cols;
    if (f.rows != n) throw std::invalid_argument("region force row count mismatch");
    if (k < 1) throw std::invalid_argument("need at least one class");
    if (static_cast<int>(alpha.size()) != n) throw std::invalid_argument("alpha size mismatch");
    if (cfg.beta <= 0.0 || cfg.gamma <= 0.0 || cfg.penalty <= 0.0 || cfg.epsilon <= 0.0)
        throw std::invalid_argument("steps, penalty and tolerance must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (cfg.energy_every < 1) throw std::invalid_argument("energy_every must be at least 1");
    for (double v : f.data) {
        if (!std::isfinite(v)) throw std::invalid_argument("region force must be finite");
    }
    for (double v : alpha) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("alpha must be finite and nonnegative");
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<NodeField> fcol(k, NodeField(n));
    for (int c = 0; c < k; ++c) f.copy_col(c, fcol[c]);

    std::vector<NodeField> phi(k, NodeField(n));
    init_phi(f, cfg.uniform_init, phi);
    q.assign(k, bk.zero_flow());
    std::vector<NodeField> divq(k, NodeField(n, 0.0));

    SolverReport report;
    CoreResult out;
    std::vector<double> rowbuf(k);

    auto project_rows = [&](std::vector<NodeField>& field) {
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) rowbuf[c] = field[c][i];
            project_simplex(rowbuf);
            for (int c = 0; c < k; ++c) field[c][i] = rowbuf[c];
        }
    };

    auto finish = [&](int iters, Termination why, double ep, double ed) {
        report.iterations = iters;
        report.termination = why;
        report.primal_energy = ep;
        report.dual_energy = ed;
        report.final_gap = relative_gap(ep, ed);
        report.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (cfg.algorithm == Algorithm::pdhg) {
        std::vector<NodeField> phibar = phi;
        std::vector<NodeField> phi_new(k, NodeField(n));
        int l = 0;
        double ep = 0.0, ed = 0.0;
        Termination why = Termination::max_iter;
        while (l < cfg.max_iter) {
            ++l;
            double beta_l, gamma_l;
            step_sizes(cfg, l, beta_l, gamma_l);

            if (cfg.literal_updates) {
                // as printed: q-step reads phi^l, phi-step reads div q^l
                for (int c = 0; c < k; ++c) {
                    for (int i = 0; i < n; ++i) {
                        phi_new[c][i] = phi[c][i] - gamma_l * (divq[c][i] + fcol[c][i]);
                    }
                    bk.add_scaled_adjoint(q[c], beta_l, phi[c]);
                    bk.project(q[c], alpha);
                }
                project_rows(phi_new);
                for (int c = 0; c < k; ++c) bk.div(q[c], divq[c]);
            } else {
                for (int c = 0; c < k; ++c) {
                    bk.add_scaled_adjoint(q[c], beta_l, phibar[c]);
                    bk.project(q[c], alpha);
                    bk.div(q[c], divq[c]);
                    for (int i = 0; i < n; ++i) {
                        phi_new[c][i] = phi[c][i] - gamma_l * (divq[c][i] + fcol[c][i]);
                    }
                }
                project_rows(phi_new);
            }
            for (int c = 0; c < k; ++c) {
                for (int i = 0; i < n; ++i) {
                    phibar[c][i] = cfg.theta * phi[c][i] + (1.0 - cfg.theta) * phi_new[c][i];
                }
            }
            phi.swap(phi_new);

            if (l % cfg.energy_every == 0 || l == cfg.max_iter) {
                ep = primal_energy_cols(bk, fcol, phi, alpha);
                ed = dual_energy_cols(fcol, divq);
                if (!std::isfinite(ep) || !std::isfinite(ed))
                    throw numeric_error("solver diverged at iteration " + std::to_string(l));
                report.primal_history.push_back(ep);
                report.dual_history.push_back(ed);
                report.gap_history.push_back(relative_gap(ep, ed));
                if (report.gap_history.back() <= cfg.epsilon) {
                    why = Termination::gap;
                    break;
                }
            }
        }
        finish(l, why, ep, ed);
        out.phi = Matrix(n, k, 0.0);
        for (int c = 0; c < k; ++c) out.phi.set_col(c, phi[c]);
    } else {
        // ADMM on the max-flow dual; phi plays the Lagrange multiplier and
        // may leave the simplex until extraction.
        const double c_pen = cfg.penalty;
        std::vector<NodeField> h(k, NodeField(n));
        for (int c = 0; c < k; ++c) {
            for (int i = 0; i < n; ++i) h[c][i] = std::min(fcol[c][i], 0.0);
        }
        NodeField lambda(n, 0.0);
        NodeField r(n, 0.0);
        int l = 0;
        double ep = 0.0, ed = 0.0;
        Termination why = Termination::max_iter;
        while (l < cfg.max_iter) {
            ++l;
            double beta_l, gamma_l;
            step_sizes(cfg, l, beta_l, gamma_l);

            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int c = 0; c < k; ++c) s += divq[c][i] + h[c][i] - phi[c][i] / c_pen;
                lambda[i] = s / k + 1.0 / (k * c_pen);
            }
            for (int c = 0; c < k; ++c) {
                for (int i = 0; i < n; ++i) {
                    h[c][i] = std::min(phi[c][i] / c_pen + lambda[i] - divq[c][i], fcol[c][i]);
                }
            }
            for (int c = 0; c < k; ++c) {
                for (int i = 0; i < n; ++i) {
                    r[i] = divq[c][i] - lambda[i] + h[c][i] - phi[c][i] / c_pen;
                }
                // one projected-gradient ascent step on -|D q - lambda + h - phi/c|^2
                bk.add_scaled_adjoint(q[c], -beta_l, r);
                bk.project(q[c], alpha);
                bk.div(q[c], divq[c]);
                for (int i = 0; i < n; ++i) {
                    phi[c][i] -= c_pen * (h[c][i] + divq[c][i] - lambda[i]);
                }
            }

            if (l % cfg.energy_every == 0 || l == cfg.max_iter) {
                ep = primal_energy_cols(bk, fcol, phi, alpha);
                ed = dual_energy_cols(fcol, divq);
                if (!std::isfinite(ep) || !std::isfinite(ed))
                    throw numeric_error("solver diverged at iteration " + std::to_string(l));
                report.primal_history.push_back(ep);
                report.dual_history.push_back(ed);
                report.gap_history.push_back(relative_gap(ep, ed));
                if (report.gap_history.back() <= cfg.epsilon) {
                    why = Termination::gap;
                    break;
                }
            }
        }
        out.lambda = lambda;
        out.h = Matrix(n, k, 0.0);
        for (int c = 0; c < k; ++c) out.h.set_col(c, h[c]);
        project_rows(phi);
        // report the energy of the extracted (feasible) field; the histories
        // keep the raw multiplier energies used by the stopping rule
        ep = primal_energy_cols(bk, fcol, phi, alpha);
        finish(l, why, ep, ed);
        report.final_gap = report.gap_history.empty() ? relative_gap(ep, ed)
                                                      : report.gap_history.back();
        out.phi = Matrix(n, k, 0.0);
        for (int c = 0; c < k; ++c) out.phi.set_col(c, phi[c]);
    }
    out.report = std::move(report);
    return out;
}

}  // namespace

double primal_energy(const Graph& g, const Matrix& f, const Matrix& phi, const NodeField& alpha) {
    if (!f.same_shape(phi) || f.rows != g.n_nodes)
        throw std::invalid_argument("shape mismatch");
    GraphBackend bk{g};
    double e = 0.0;
    NodeField col(f.rows);
    for (int c = 0; c < f.cols; ++c) {
        phi.copy_col(c, col);
        double dot = 0.0;
        for (int i = 0; i < f.rows; ++i) dot += f(i, c) * col[i];
        e += dot + bk.tv(col, alpha);
    }
    return e;
}

double primal_energy(const GridGeometry& geom, const Matrix& f, const Matrix& phi,
                     const NodeField& alpha) {
    if (!f.same_shape(phi) || f.rows != geom.n())
        throw std::invalid_argument("shape mismatch");
    GridBackend bk{geom};
    double e = 0.0;
    NodeField col(f.rows);
    for (int c = 0; c < f.cols; ++c) {
        phi.copy_col(c, col);
        double dot = 0.0;
        for (int i = 0; i < f.rows; ++i) dot += f(i, c) * col[i];
        e += dot + bk.tv(col, alpha);
    }
    return e;
}

double dual_energy(const Graph& g, const Matrix& f, const std::vector<EdgeField>& flows) {
    if (static_cast<int>(flows.size()) != f.cols || f.rows != g.n_nodes)
        throw std::invalid_argument("shape mismatch");
    double e = 0.0;
    std::vector<NodeField> divq(f.cols);
    for (int c = 0; c < f.cols; ++c) divq[c] = divergence(g, flows[c]);
    for (int i = 0; i < f.rows; ++i) {
        double m = f(i, 0) + divq[0][i];
        for (int c = 1; c < f.cols; ++c) m = std::min(m, f(i, c) + divq[c][i]);
        e += m;
    }
    return e;
}

double dual_energy(const GridGeometry& geom, const Matrix& f,
                   const std::vector<PixelVectorField>& flows) {
    if (static_cast<int>(flows.size()) != f.cols || f.rows != geom.n())
        throw std::invalid_argument("shape mismatch");
    double e = 0.0;
    std::vector<NodeField> divq(f.cols);
    for (int c = 0; c < f.cols; ++c) divq[c] = grid_divergence(geom, flows[c]);
    for (int i = 0; i < f.rows; ++i) {
        double m = f(i, 0) + divq[0][i];
        for (int c = 1; c < f.cols; ++c) m = std::min(m, f(i, c) + divq[c][i]);
        e += m;
    }
    return e;
}

GraphSolveResult solve(const Graph& g, const Matrix& f, const NodeField& alpha,
                       const SolverConfig& cfg) {
    GraphBackend bk{g};
    GraphSolveResult res;
    CoreResult core = solve_core(bk, f, alpha, cfg, res.flows);
    res.phi = std::move(core.phi);
    res.report = std::move(core.report);
    res.lambda = std::move(core.lambda);
    res.h = std::move(core.h);
    return res;
}

GridSolveResult solve(const GridGeometry& geom, const Matrix& f, const NodeField& alpha,
                      const SolverConfig& cfg) {
    GridBackend bk{geom};
    GridSolveResult res;
    CoreResult core = solve_core(bk, f, alpha, cfg, res.flows);
    res.phi = std::move(core.phi);
    res.report = std::move(core.report);
    res.lambda = std::move(core.lambda);
    res.h = std::move(core.h);
    return res;
}

std::vector<int> assign_labels(const Matrix& phi) {
    std::vector<int> labels(phi.rows, 0);
    for (int i = 0; i < phi.rows; ++i) {
        int best = 0;
        for (int c = 1; c < phi.cols; ++c) {
            if (phi(i, c) > phi(i, best)) best = c;
        }
        labels[i] = best;
    }
    return labels;
}

const char* to_string(Algorithm a) { return a == Algorithm::pdhg ? "pdhg" : "admm"; }

const char* to_string(Termination t) { return t == Termination::gap ? "gap" : "max_iter"; }

}  // namespace pottsrf
