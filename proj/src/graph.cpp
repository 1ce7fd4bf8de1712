#include "pottsrf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pottsrf/errors.hpp"
#include "pottsrf/parallel.hpp"

namespace pottsrf {

Graph Graph::from_undirected_edges(int n, std::span<const UndirectedEdge> edges) {
    if (n <= 0) throw std::invalid_argument("graph needs at least one node");
    for (const auto& e : edges) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.i == e.j) throw std::invalid_argument("self-loops are not allowed");
        if (!std::isfinite(e.w) || e.w < 0.0)
            throw std::invalid_argument("edge weights must be finite and nonnegative");
    }

    Graph g;
    g.n_nodes = n;
    g.row_start.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& e : edges) {
        ++g.row_start[e.i + 1];
        ++g.row_start[e.j + 1];
    }
    for (int i = 0; i < n; ++i) g.row_start[i + 1] += g.row_start[i];

    const std::int64_t m2 = g.row_start[n];
    g.nbr.assign(m2, 0);
    g.weight.assign(m2, 0.0);
    std::vector<std::int64_t> cursor(g.row_start.begin(), g.row_start.end() - 1);
    for (const auto& e : edges) {
        g.nbr[cursor[e.i]] = e.j;
        g.weight[cursor[e.i]++] = e.w;
        g.nbr[cursor[e.j]] = e.i;
        g.weight[cursor[e.j]++] = e.w;
    }

    // canonical form: each adjacency list ascending by neighbor index
    std::vector<std::int64_t> perm;
    for (int i = 0; i < n; ++i) {
        const std::int64_t b = g.row_start[i], e = g.row_start[i + 1];
        perm.resize(e - b);
        std::iota(perm.begin(), perm.end(), b);
        std::sort(perm.begin(), perm.end(),
                  [&g](std::int64_t a, std::int64_t c) { return g.nbr[a] < g.nbr[c]; });
        std::vector<int> nb(e - b);
        std::vector<double> wt(e - b);
        for (std::int64_t t = 0; t < e - b; ++t) {
            nb[t] = g.nbr[perm[t]];
            wt[t] = g.weight[perm[t]];
        }
        std::copy(nb.begin(), nb.end(), g.nbr.begin() + b);
        std::copy(wt.begin(), wt.end(), g.weight.begin() + b);
        for (std::int64_t t = 1; t < e - b; ++t) {
            if (nb[t] == nb[t - 1]) throw std::invalid_argument("duplicate edge in input");
        }
    }

    g.twin.assign(m2, -1);
    for (int i = 0; i < n; ++i) {
        for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
            const int j = g.nbr[e];
            if (j < i) continue;  // handled from the other side
            auto lo = g.nbr.begin() + g.row_start[j];
            auto hi = g.nbr.begin() + g.row_start[j + 1];
            auto it = std::lower_bound(lo, hi, i);
            const std::int64_t back = it - g.nbr.begin();
            g.twin[e] = back;
            g.twin[back] = e;
        }
    }
    return g;
}

Graph build_grid_graph(const GridGeometry& geom) {
    if (geom.width < 1 || geom.height < 1)
        throw std::invalid_argument("grid dimensions must be positive");
    std::vector<UndirectedEdge> edges;
    edges.reserve(static_cast<std::size_t>(2) * geom.width * geom.height);
    for (int y = 0; y < geom.height; ++y) {
        for (int x = 0; x < geom.width; ++x) {
            const int p = y * geom.width + x;
            if (x + 1 < geom.width) edges.push_back({p, p + 1, 1.0});
            if (y + 1 < geom.height) edges.push_back({p, p + geom.width, 1.0});
        }
    }
    return Graph::from_undirected_edges(geom.n(), edges);
}

double weight_rbf(double d, double epsilon) {
    if (epsilon <= 0.0) throw std::invalid_argument("rbf epsilon must be positive");
    return std::exp(-d * d / (2.0 * epsilon));
}

double weight_zmp(double d, double sigma_i, double sigma_j) {
    if (sigma_i <= 0.0 || sigma_j <= 0.0)
        throw std::invalid_argument("zmp scales must be positive");
    return std::exp(-d * d / (sigma_i * sigma_j));
}

double weight_cosine(std::span<const double> xi, std::span<const double> xj) {
    if (xi.size() != xj.size()) throw std::invalid_argument("dimension mismatch");
    double dot = 0.0, ni = 0.0, nj = 0.0;
    for (std::size_t t = 0; t < xi.size(); ++t) {
        dot += xi[t] * xj[t];
        ni += xi[t] * xi[t];
        nj += xj[t] * xj[t];
    }
    if (ni == 0.0 || nj == 0.0) throw std::invalid_argument("cosine weight of a zero vector");
    return dot / (std::sqrt(ni) * std::sqrt(nj));
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        s += d * d;
    }
    return s;
}

}  // namespace

Graph build_knn_graph(const Matrix& points, const KnnConfig& cfg) {
    const int n = points.rows;
    if (cfg.s < 1) throw std::invalid_argument("s must be positive");
    if (cfg.s >= n) throw std::invalid_argument("s must be smaller than the number of points");
    for (double v : points.data) {
        if (!std::isfinite(v)) throw std::invalid_argument("point coordinates must be finite");
    }

    const int s = cfg.s;
    std::vector<int> nn(static_cast<std::size_t>(n) * s);
    std::vector<double> nn_d2(static_cast<std::size_t>(n) * s);
    std::vector<double> sigma(n, 0.0);  // distance to the s-th nearest neighbor

    parallel_for(n, resolve_threads(cfg.threads), [&](std::int64_t begin, std::int64_t end) {
        std::vector<std::pair<double, int>> cand(n - 1);
        for (std::int64_t i = begin; i < end; ++i) {
            const auto xi = points.row(static_cast<int>(i));
            int c = 0;
            for (int j = 0; j < n; ++j) {
                if (j == static_cast<int>(i)) continue;
                cand[c++] = {sq_dist(xi, points.row(j)), j};
            }
            std::partial_sort(cand.begin(), cand.begin() + s, cand.end());
            for (int t = 0; t < s; ++t) {
                nn[i * s + t] = cand[t].second;
                nn_d2[i * s + t] = cand[t].first;
            }
            sigma[i] = std::sqrt(cand[s - 1].first);
        }
    });

    // union of directed pairs; remember whether both directions were found
    struct Pair {
        int a, b;
        double d2;
        bool from_a = false, from_b = false;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * s);
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < s; ++t) {
            const int j = nn[static_cast<std::size_t>(i) * s + t];
            const double d2 = nn_d2[static_cast<std::size_t>(i) * s + t];
            Pair p;
            p.a = std::min(i, j);
            p.b = std::max(i, j);
            p.d2 = d2;
            (i < j ? p.from_a : p.from_b) = true;
            pairs.push_back(p);
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& u, const Pair& v) { return u.a != v.a ? u.a < v.a : u.b < v.b; });

    std::vector<UndirectedEdge> edges;
    edges.reserve(pairs.size());
    std::size_t t = 0;
    while (t < pairs.size()) {
        Pair p = pairs[t++];
        while (t < pairs.size() && pairs[t].a == p.a && pairs[t].b == p.b) {
            p.from_a = p.from_a || pairs[t].from_a;
            p.from_b = p.from_b || pairs[t].from_b;
            ++t;
        }
        double kernel = 0.0;
        switch (cfg.kind) {
            case WeightKind::rbf:
                kernel = weight_rbf(std::sqrt(p.d2), cfg.rbf_epsilon);
                break;
            case WeightKind::zmp: {
                const double ss = sigma[p.a] * sigma[p.b];
                // duplicate points push sigma to 0; take the kernel's limit
                if (ss == 0.0) {
                    kernel = p.d2 == 0.0 ? 1.0 : 0.0;
                } else {
                    kernel = std::exp(-p.d2 / ss);
                }
                break;
            }
            case WeightKind::cosine: {
                double dot = 0.0, na = 0.0, nb = 0.0;
                const auto xa = points.row(p.a);
                const auto xb = points.row(p.b);
                for (int d = 0; d < points.cols; ++d) {
                    dot += xa[d] * xb[d];
                    na += xa[d] * xa[d];
                    nb += xb[d] * xb[d];
                }
                // weights must stay nonnegative: clamp negative similarity,
                // define the zero-vector case as no affinity
                kernel = (na == 0.0 || nb == 0.0)
                             ? 0.0
                             : std::max(0.0, dot / (std::sqrt(na) * std::sqrt(nb)));
                break;
            }
        }
        // (W + W^T)/2: full kernel if the relation held both ways, half if one
        const double w = (p.from_a && p.from_b) ? kernel : 0.5 * kernel;
        edges.push_back({p.a, p.b, w});
    }
    return Graph::from_undirected_edges(n, edges);
}

EdgeField gradient(const Graph& g, const NodeField& u) {
    if (static_cast<int>(u.size()) != g.n_nodes)
        throw std::invalid_argument("node field size mismatch");
    EdgeField out(g.n_directed());
    for (int i = 0; i < g.n_nodes; ++i) {
        for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
            out[e] = g.weight[e] * (u[g.nbr[e]] - u[i]);
        }
    }
    return out;
}

NodeField divergence(const Graph& g, const EdgeField& q) {
    if (static_cast<std::int64_t>(q.size()) != g.n_directed())
        throw std::invalid_argument("edge field size mismatch");
    NodeField out(g.n_nodes, 0.0);
    for (int i = 0; i < g.n_nodes; ++i) {
        double s = 0.0;
        for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
            s += g.weight[e] * (q[g.twin[e]] - q[e]);
        }
        out[i] = s;
    }
    return out;
}

double anisotropic_tv(const Graph& g, const NodeField& u, const NodeField& alpha) {
    if (static_cast<int>(u.size()) != g.n_nodes || static_cast<int>(alpha.size()) != g.n_nodes)
        throw std::invalid_argument("node field size mismatch");
    double total = 0.0;
    for (int i = 0; i < g.n_nodes; ++i) {
        if (alpha[i] < 0.0) throw std::invalid_argument("alpha must be nonnegative");
        double s = 0.0;
        for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
            s += g.weight[e] * std::abs(u[g.nbr[e]] - u[i]);
        }
        total += alpha[i] * s;
    }
    return total;
}

PixelVectorField grid_gradient(const GridGeometry& geom, const NodeField& u) {
    if (static_cast<int>(u.size()) != geom.n())
        throw std::invalid_argument("node field size mismatch");
    const int w = geom.width, h = geom.height;
    PixelVectorField out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            out.x[p] = x + 1 < w ? u[p + 1] - u[p] : 0.0;
            out.y[p] = y + 1 < h ? u[p + w] - u[p] : 0.0;
        }
    }
    return out;
}

NodeField grid_divergence(const GridGeometry& geom, const PixelVectorField& q) {
    if (q.width != geom.width || q.height != geom.height)
        throw std::invalid_argument("vector field size mismatch");
    const int w = geom.width, h = geom.height;
    NodeField out(geom.n(), 0.0);
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
    return out;
}

double grid_tv(const GridGeometry& geom, const NodeField& u, const NodeField& alpha) {
    if (static_cast<int>(alpha.size()) != geom.n())
        throw std::invalid_argument("alpha size mismatch");
    const PixelVectorField g = grid_gradient(geom, u);
    double total = 0.0;
    for (int p = 0; p < geom.n(); ++p) {
        if (alpha[p] < 0.0) throw std::invalid_argument("alpha must be nonnegative");
        total += alpha[p] * std::sqrt(g.x[p] * g.x[p] + g.y[p] * g.y[p]);
    }
    return total;
}

SparseMatrix SparseMatrix::from_triplets(int n, std::span<const UndirectedEdge> upper,
                                         std::span<const double> diagonal) {
    if (!diagonal.empty() && static_cast<int>(diagonal.size()) != n)
        throw std::invalid_argument("diagonal size mismatch");
    SparseMatrix a;
    a.n = n;
    a.row_start.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& e : upper) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n || e.i == e.j)
            throw std::invalid_argument("bad off-diagonal entry");
        ++a.row_start[e.i + 1];
        ++a.row_start[e.j + 1];
    }
    if (!diagonal.empty()) {
        for (int i = 0; i < n; ++i) ++a.row_start[i + 1];
    }
    for (int i = 0; i < n; ++i) a.row_start[i + 1] += a.row_start[i];
    a.col.assign(a.row_start[n], 0);
    a.val.assign(a.row_start[n], 0.0);
    std::vector<std::int64_t> cursor(a.row_start.begin(), a.row_start.end() - 1);
    auto put = [&](int i, int j, double v) {
        a.col[cursor[i]] = j;
        a.val[cursor[i]++] = v;
    };
    for (const auto& e : upper) {
        put(e.i, e.j, e.w);
        put(e.j, e.i, e.w);
    }
    if (!diagonal.empty()) {
        for (int i = 0; i < n; ++i) put(i, i, diagonal[i]);
    }
    for (int i = 0; i < n; ++i) {
        const std::int64_t b = a.row_start[i], e = a.row_start[i + 1];
        std::vector<std::pair<int, double>> row(e - b);
        for (std::int64_t t = b; t < e; ++t) row[t - b] = {a.col[t], a.val[t]};
        std::sort(row.begin(), row.end());
        for (std::int64_t t = b; t < e; ++t) {
            a.col[t] = row[t - b].first;
            a.val[t] = row[t - b].second;
        }
    }
    return a;
}

SparseMatrix affinity_matrix(const Graph& g, double self_loop) {
    SparseMatrix a;
    a.n = g.n_nodes;
    const bool diag = self_loop != 0.0;
    a.row_start.assign(static_cast<std::size_t>(a.n) + 1, 0);
    for (int i = 0; i < a.n; ++i) a.row_start[i + 1] = a.row_start[i] + g.degree(i) + (diag ? 1 : 0);
    a.col.reserve(a.row_start[a.n]);
    a.val.reserve(a.row_start[a.n]);
    for (int i = 0; i < a.n; ++i) {
        bool placed = !diag;
        for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
            if (!placed && g.nbr[e] > i) {
                a.col.push_back(i);
                a.val.push_back(self_loop);
                placed = true;
            }
            a.col.push_back(g.nbr[e]);
            a.val.push_back(g.weight[e]);
        }
        if (!placed) {
            a.col.push_back(i);
            a.val.push_back(self_loop);
        }
    }
    return a;
}

SparseMatrix normalize_affinity(const SparseMatrix& w) {
    std::vector<double> deg(w.n, 0.0);
    for (int i = 0; i < w.n; ++i) {
        for (std::int64_t e = w.row_start[i]; e < w.row_start[i + 1]; ++e) {
            deg[i] += std::abs(w.val[e]);
        }
    }
    std::vector<int> isolated;
    for (int i = 0; i < w.n; ++i) {
        if (deg[i] <= 0.0) isolated.push_back(i);
    }
    if (!isolated.empty()) {
        std::ostringstream msg;
        msg << "isolated nodes (zero affinity row):";
        for (int i : isolated) msg << ' ' << i;
        throw numeric_error(msg.str());
    }
    SparseMatrix out = w;
    for (int i = 0; i < w.n; ++i) {
        const double di = 1.0 / std::sqrt(deg[i]);
        for (std::int64_t e = w.row_start[i]; e < w.row_start[i + 1]; ++e) {
            out.val[e] = w.val[e] * di / std::sqrt(deg[w.col[e]]);
        }
    }
    return out;
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (static_cast<int>(x.size()) != a.n || static_cast<int>(y.size()) != a.n)
        throw std::invalid_argument("spmv size mismatch");
    for (int i = 0; i < a.n; ++i) {
        double s = 0.0;
        for (std::int64_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
            s += a.val[e] * x[a.col[e]];
        }
        y[i] = s;
    }
}

std::vector<double> sparse_diag(const SparseMatrix& a) {
    std::vector<double> d(a.n, 0.0);
    for (int i = 0; i < a.n; ++i) {
        for (std::int64_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
            if (a.col[e] == i) d[i] = a.val[e];
        }
    }
    return d;
}

std::vector<double> row_sq_norms(const SparseMatrix& a) {
    std::vector<double> d(a.n, 0.0);
    for (int i = 0; i < a.n; ++i) {
        double s = 0.0;
        for (std::int64_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
            s += a.val[e] * a.val[e];
        }
        d[i] = s;
    }
    return d;
}

}  // namespace pottsrf
