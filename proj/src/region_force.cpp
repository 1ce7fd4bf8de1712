#include "pottsrf/region_force.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pottsrf/errors.hpp"

namespace pottsrf {

int SeedSet::total() const {
    int t = 0;
    for (const auto& s : seeds) t += static_cast<int>(s.size());
    return t;
}

bool SeedSet::contains(int node) const {
    for (const auto& s : seeds) {
        if (std::find(s.begin(), s.end(), node) != s.end()) return true;
    }
    return false;
}

Matrix diffusion_probabilities(const SparseMatrix& w_hat, const SeedSet& seeds, int power) {
    if (power != 1 && power != 2) throw std::invalid_argument("diffusion power must be 1 or 2");
    const int n = w_hat.n;
    const int k = seeds.n_classes();
    if (k < 1) throw std::invalid_argument("need at least one seed class");
    for (int c = 0; c < k; ++c) {
        if (seeds.seeds[c].empty())
            throw std::invalid_argument("seed class " + std::to_string(c) + " is empty");
        for (int j : seeds.seeds[c]) {
            if (j < 0 || j >= n) throw std::invalid_argument("seed index out of range");
        }
    }

    // diag(W^m): read directly for m=1; for m=2 it equals the row squared
    // norms since W is symmetric.
    std::vector<double> diag = power == 1 ? sparse_diag(w_hat) : row_sq_norms(w_hat);
    for (int i = 0; i < n; ++i) {
        if (diag[i] <= 0.0)
            throw numeric_error("zero diagonal in diffusion kernel at node " + std::to_string(i));
    }

    Matrix score(n, k, 0.0);  // per class: |S_k|^{-1} sum_{j in S_k} r_ij
    std::vector<double> col(n), tmp(n);
    for (int c = 0; c < k; ++c) {
        const double inv_sz = 1.0 / static_cast<double>(seeds.seeds[c].size());
        for (int j : seeds.seeds[c]) {
            // column j of W^m without forming W^m: W e_j is row j by symmetry
            std::fill(col.begin(), col.end(), 0.0);
            for (std::int64_t e = w_hat.row_start[j]; e < w_hat.row_start[j + 1]; ++e) {
                col[w_hat.col[e]] = w_hat.val[e];
            }
            if (power == 2) {
                spmv(w_hat, col, tmp);
                col.swap(tmp);
            }
            const double dj = diag[j];
            for (int i = 0; i < n; ++i) {
                score(i, c) += inv_sz * col[i] * col[i] / (diag[i] * dj);
            }
        }
    }

    Matrix p(n, k, 0.0);
    for (int i = 0; i < n; ++i) {
        double denom = 0.0;
        for (int c = 0; c < k; ++c) denom += score(i, c);
        if (denom == 0.0) {
            for (int c = 0; c < k; ++c) p(i, c) = 1.0 / k;
        } else {
            for (int c = 0; c < k; ++c) p(i, c) = score(i, c) / denom;
        }
    }
    return p;
}

Matrix image_probabilities(const Matrix& features, const Matrix& centroids, double sigma,
                           bool squared_distance) {
    if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    if (features.cols != centroids.cols)
        throw std::invalid_argument("feature/centroid dimension mismatch");
    const int n = features.rows;
    const int k = centroids.rows;
    if (k < 1) throw std::invalid_argument("need at least one centroid");
    const double scale = -1.0 / (2.0 * sigma * sigma);

    Matrix p(n, k, 0.0);
    std::vector<double> expo(k);
    for (int i = 0; i < n; ++i) {
        const auto x = features.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const auto ck = centroids.row(c);
            double d2 = 0.0;
            for (int t = 0; t < features.cols; ++t) {
                const double d = x[t] - ck[t];
                d2 += d * d;
            }
            expo[c] = scale * (squared_distance ? d2 : std::sqrt(d2));
            mx = std::max(mx, expo[c]);
        }
        double denom = 0.0;
        for (int c = 0; c < k; ++c) denom += std::exp(expo[c] - mx);
        for (int c = 0; c < k; ++c) p(i, c) = std::exp(expo[c] - mx) / denom;
    }
    return p;
}

Matrix region_force_log(const Matrix& probabilities, double delta) {
    if (delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
    Matrix f(probabilities.rows, probabilities.cols, 0.0);
    for (std::size_t t = 0; t < probabilities.data.size(); ++t) {
        const double p = probabilities.data[t];
        if (delta == 0.0 && (p <= 0.0 || p >= 1.0))
            throw numeric_error("log region force undefined at p in {0,1} with delta=0");
        f.data[t] = -std::log(p + delta) + std::log(1.0 - p + delta);
    }
    return f;
}

Matrix region_force_linear(const Matrix& probabilities) {
    Matrix f(probabilities.rows, probabilities.cols, 0.0);
    for (std::size_t t = 0; t < probabilities.data.size(); ++t) {
        f.data[t] = 1.0 - 2.0 * probabilities.data[t];
    }
    return f;
}

Matrix region_force_l2(const Matrix& features, const Matrix& centroids) {
    if (features.cols != centroids.cols)
        throw std::invalid_argument("feature/centroid dimension mismatch");
    Matrix f(features.rows, centroids.rows, 0.0);
    for (int i = 0; i < features.rows; ++i) {
        const auto x = features.row(i);
        for (int c = 0; c < centroids.rows; ++c) {
            const auto ck = centroids.row(c);
            double d2 = 0.0;
            for (int t = 0; t < features.cols; ++t) {
                const double d = x[t] - ck[t];
                d2 += d * d;
            }
            f(i, c) = d2;
        }
    }
    return f;
}

namespace {

double row_sq_dist(const Matrix& m, int i, std::span<const double> c) {
    const auto x = m.row(i);
    double s = 0.0;
    for (std::size_t t = 0; t < c.size(); ++t) {
        const double d = x[t] - c[t];
        s += d * d;
    }
    return s;
}

int count_distinct_rows(const Matrix& m, int cap) {
    std::vector<int> idx(m.rows);
    for (int i = 0; i < m.rows; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&m](int a, int b) {
        const auto ra = m.row(a), rb = m.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    int distinct = m.rows > 0 ? 1 : 0;
    for (int t = 1; t < m.rows && distinct < cap; ++t) {
        const auto ra = m.row(idx[t - 1]), rb = m.row(idx[t]);
        if (!std::equal(ra.begin(), ra.end(), rb.begin())) ++distinct;
    }
    return distinct;
}

}  // namespace

Matrix kmeans_centroids(const Matrix& points, int k, Rng& rng) {
    const int n = points.rows;
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (count_distinct_rows(points, k) < k)
        throw std::invalid_argument("fewer distinct points than clusters");

    // k-means++ seeding
    Matrix centroids(k, points.cols, 0.0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    {
        const int first = rng.uniform_int(n);
        std::copy(points.row(first).begin(), points.row(first).end(), centroids.row(0).begin());
    }
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], row_sq_dist(points, i, centroids.row(c - 1)));
            total += d2[i];
        }
        int pick = -1;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            double run = 0.0;
            for (int i = 0; i < n; ++i) {
                run += d2[i];
                if (run >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        } else {
            pick = rng.uniform_int(n);  // unreachable given the distinct-rows check
        }
        std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
    }

    // Lloyd iterations
    std::vector<int> assign(n, 0);
    std::vector<int> count(k, 0);
    Matrix next(k, points.cols, 0.0);
    for (int iter = 0; iter < 100; ++iter) {
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = row_sq_dist(points, i, centroids.row(0));
            for (int c = 1; c < k; ++c) {
                const double d = row_sq_dist(points, i, centroids.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        std::fill(count.begin(), count.end(), 0);
        std::fill(next.data.begin(), next.data.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            ++count[assign[i]];
            const auto x = points.row(i);
            auto row = next.row(assign[i]);
            for (int t = 0; t < points.cols; ++t) row[t] += x[t];
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) {
                auto row = next.row(c);
                for (int t = 0; t < points.cols; ++t) row[t] /= count[c];
            } else {
                // restart an empty cluster from the point farthest from its centroid
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = row_sq_dist(points, i, centroids.row(assign[i]));
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                std::copy(points.row(far).begin(), points.row(far).end(), next.row(c).begin());
            }
        }
        double moved = 0.0;
        for (int c = 0; c < k; ++c) {
            moved = std::max(moved, std::sqrt(row_sq_dist(next, c, centroids.row(c))));
        }
        centroids.data.swap(next.data);
        if (moved <= 1e-6) break;
    }
    return centroids;
}

}  // namespace pottsrf
