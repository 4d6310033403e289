#include "otlim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace otlim {

namespace {

// The integral formulas stay meaningful for n = m (flat weight), which the
// standing assumption m <= n-1 would otherwise exclude.
void check_integrable(const ProblemConfig& cfg) {
    if (cfg.m < 1 || cfg.n < cfg.m) throw ConfigError("C1: requires n >= m >= 1");
    if (static_cast<int>(cfg.degrees.size()) != cfg.m + 1)
        throw ConfigError("C1: expected m+1 degrees");
    for (int d : cfg.degrees)
        if (d < 1) throw ConfigError("C1: degrees must be >= 1");
}

}  // namespace

double C1_closed_form(const ProblemConfig& cfg) {
    check_integrable(cfg);
    double fact_ratio = 1.0;  // (n-m)!/n! = 1/((n-m+1)*...*n)
    for (int t = cfg.n - cfg.m + 1; t <= cfg.n; ++t) fact_ratio /= t;
    return cfg.degree_sum() / cfg.degree_product() * fact_ratio;
}

namespace {

// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_q.
void gauss_legendre_01(int q, Vec& nodes, Vec& weights) {
    nodes.resize(q);
    weights.resize(q);
    for (int i = 0; i < q; ++i) {
        // initial guess (Chebyshev-like), then Newton on P_q(x) over [-1,1]
        double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int kdeg = 2; kdeg <= q; ++kdeg) {
                const double p2 = ((2 * kdeg - 1) * x * p1 - (kdeg - 1) * p0) / kdeg;
                p0 = p1;
                p1 = p2;
            }
            const double dp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int kdeg = 2; kdeg <= q; ++kdeg) {
            const double p2 = ((2 * kdeg - 1) * x * p1 - (kdeg - 1) * p0) / kdeg;
            p0 = p1;
            p1 = p2;
        }
        const double dp = q * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = 0.5 * (x + 1.0);
        weights[q - 1 - i] = 0.5 * w;
    }
}

double simplex_volume(const std::vector<Vec>& verts) {
    const std::size_t m = verts.size() - 1;
    // |det(v_i - v_0)| / m!
    std::vector<Vec> A;
    for (std::size_t i = 1; i <= m; ++i) {
        Vec row(m);
        for (std::size_t t = 0; t < m; ++t) row[t] = verts[i][t] - verts[0][t];
        A.push_back(std::move(row));
    }
    double det = 1.0;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        if (std::fabs(A[piv][col]) == 0.0) return 0.0;
        if (piv != col) {
            std::swap(A[piv], A[col]);
            det = -det;
        }
        det *= A[col][col];
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = A[r][col] / A[col][col];
            for (std::size_t cc = col; cc < m; ++cc) A[r][cc] -= f * A[col][cc];
        }
    }
    double fact = 1.0;
    for (std::size_t t = 2; t <= m; ++t) fact *= t;
    return std::fabs(det) / fact;
}

}  // namespace

double simplex_quadrature(const std::vector<Vec>& verts, int degree,
                          const std::function<double(const Vec&)>& f) {
    const int m = static_cast<int>(verts.size()) - 1;
    const double vol = simplex_volume(verts);
    if (vol == 0.0) return 0.0;
    if (m == 0) return f(verts[0]);

    // Collapsed map: t_1 = a_1, t_k = a_k (1 - t_1 - .. - t_{k-1});
    // per-axis degree after collapse is at most degree + m, so q Gauss points
    // with 2q-1 >= degree + m are exact.
    const int q = std::max(1, (degree + m) / 2 + 1);
    Vec nodes, weights;
    gauss_legendre_01(q, nodes, weights);

    double fact = 1.0;
    for (int t = 2; t <= m; ++t) fact *= t;

    std::vector<int> idx(m, 0);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        Vec t(m);
        double remaining = 1.0;
        for (int k = 0; k < m; ++k) {
            const double a = nodes[idx[k]];
            w *= weights[idx[k]];
            t[k] = a * remaining;
            remaining -= t[k];
            if (k + 1 < m) w *= remaining;  // dt_{k+1}/da_{k+1}
        }
        Vec p(verts[0]);
        for (int k = 0; k < m; ++k)
            for (int c = 0; c < m; ++c) p[c] += t[k] * (verts[k + 1][c] - verts[0][c]);
        total += w * f(p);

        int k = m - 1;
        while (k >= 0 && ++idx[k] == q) idx[k--] = 0;
        if (k < 0) break;
    }
    return total * vol * fact;
}

double C1_quadrature(const ProblemConfig& cfg, int resolution) {
    check_integrable(cfg);
    if (resolution < 2) throw ConfigError("C1_quadrature: resolution >= 2 required");
    const int m = cfg.m;

    // reference subdivision of the unit simplex, reused for every cell
    SimplexGrid ref = SimplexGrid::make(m, resolution);
    const auto ref_cells = simplex_grid_cells(ref);

    double total = 0.0;
    for (int k = 0; k <= m; ++k) {
        // cell k in free coordinates t = -p_{i != k}: simplex with vertices
        // 0, e_i/d_i; pulled back through the reference subdivision
        std::vector<int> free;
        for (int i = 0; i <= m; ++i)
            if (i != k) free.push_back(i);

        auto eval_W = [&](const Vec& t) {
            double pairing = 0.0;
            for (int a = 0; a < m; ++a) pairing -= cfg.degrees[free[a]] * t[a];
            const double base = std::max(0.0, 1.0 + pairing);
            double w = 1.0;
            for (int e = 0; e < cfg.n - cfg.m; ++e) w *= base;
            return w;
        };

        for (const auto& cell : ref_cells) {
            std::vector<Vec> verts;
            for (std::size_t c : cell.corners) {
                Vec v(m);
                const Vec red = ref.points[c].reduced();
                // reference barycentric (s_1..s_m) -> t = sum s_a * e_a/d_a
                double s0 = ref.points[c].x[0];
                (void)s0;
                for (int a = 0; a < m; ++a) v[a] = red[a] / cfg.degrees[free[a]];
                verts.push_back(std::move(v));
            }
            total += simplex_quadrature(verts, cfg.n - cfg.m, eval_W);
        }
    }
    return total;
}

DiscreteMeasure source_measure(const SimplexGrid& grid) {
    if (grid.points.empty()) throw EmptyGridError("source_measure: empty grid");
    DiscreteMeasure mu;
    mu.weights.assign(grid.points.size(), 0.0);
    if (grid.points.size() == 1) {
        mu.weights[0] = 1.0;
        mu.total_mass = 1.0;
        return mu;
    }
    const auto cells = simplex_grid_cells(grid);
    // all cells are unimodular (equal volume): lumping reduces to incidence
    for (const auto& cell : cells)
        for (std::size_t c : cell.corners) mu.weights[c] += 1.0;
    const double sum = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
    for (double& w : mu.weights) w /= sum;
    mu.total_mass = 1.0;
    return mu;
}

Vec dual_lumped_volumes(const DualGrid& grid) {
    const ProblemConfig& cfg = grid.cfg;
    const int m = cfg.m;
    const int M = grid.N * cfg.max_degree();
    const double h = 1.0 / M;

    // index canonical points by their lattice tuple (in units of h)
    std::vector<std::pair<std::vector<int>, std::size_t>> index;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        std::vector<int> key(m + 1);
        for (int t = 0; t <= m; ++t)
            key[t] = static_cast<int>(std::lround(-grid.points[i].p[t] * M));
        index.emplace_back(std::move(key), i);
    }
    std::sort(index.begin(), index.end());
    auto lookup = [&](const std::vector<int>& key) -> std::size_t {
        auto it = std::lower_bound(index.begin(), index.end(), key,
                                   [](const auto& a, const std::vector<int>& b) {
                                       return a.first < b;
                                   });
        if (it == index.end() || it->first != key) return SIZE_MAX;
        return it->second;
    };

    Vec vol(grid.points.size(), 0.0);
    double mfact = 1.0;
    for (int t = 2; t <= m; ++t) mfact *= t;

    for (int k = 0; k <= m; ++k) {
        std::vector<int> free;
        for (int i = 0; i <= m; ++i)
            if (i != k) free.push_back(i);
        Vec dd(m);
        double dprod = 1.0;
        for (int a = 0; a < m; ++a) {
            dd[a] = cfg.degrees[free[a]];
            dprod *= dd[a];
        }
        int dsum = 0;
        for (int a = 0; a < m; ++a) dsum += static_cast<int>(dd[a]);

        std::vector<int> j(m, 0);
        // enlarged budget so every box meeting the cell is visited; boxes of
        // lattice points just outside the cell snap their clipped volume to
        // the nearest interior point (the boxes tile the orthant, so the
        // lumped volumes partition the cell exactly)
        std::function<void(int, int)> rec = [&](int idx, int rem) {
            if (idx == m) {
                // vol( prod [max(0,(j-1/2)h), (j+1/2)h] cap {sum d t <= 1} )
                Vec lo(m), hi(m);
                for (int a = 0; a < m; ++a) {
                    lo[a] = std::max(0.0, (j[a] - 0.5) * h);
                    hi[a] = (j[a] + 0.5) * h;
                }
                double v = 0.0;
                for (int S = 0; S < (1 << m); ++S) {
                    double s = 1.0;
                    int bits = 0;
                    for (int a = 0; a < m; ++a) {
                        const bool up = (S >> a) & 1;
                        bits += up;
                        s -= dd[a] * (up ? hi[a] : lo[a]);
                    }
                    if (s > 0.0) v += ((bits & 1) ? -1.0 : 1.0) * std::pow(s, m);
                }
                v /= mfact * dprod;
                if (v <= 0.0) return;

                std::vector<int> snapped(j);
                int budget = 0;
                for (int a = 0; a < m; ++a) budget += static_cast<int>(dd[a]) * snapped[a];
                while (budget > M) {
                    int pick = 0;
                    double worst = -1.0;
                    for (int a = 0; a < m; ++a) {
                        const double excess = dd[a] * snapped[a];
                        if (snapped[a] > 0 && excess > worst) {
                            worst = excess;
                            pick = a;
                        }
                    }
                    --snapped[pick];
                    budget -= static_cast<int>(dd[pick]);
                }
                std::vector<int> key(m + 1, 0);
                for (int a = 0; a < m; ++a) key[free[a]] = snapped[a];
                const std::size_t slot = lookup(key);
                if (slot != SIZE_MAX) vol[slot] += v;
                return;
            }
            const int d = static_cast<int>(dd[idx]);
            for (int v2 = 0; v2 * d <= rem; ++v2) {
                j[idx] = v2;
                rec(idx + 1, rem - v2 * d);
            }
        };
        rec(0, M + dsum);
    }
    return vol;
}

DiscreteMeasure target_measure(const DualGrid& grid) {
    if (grid.points.empty()) throw EmptyGridError("target_measure: empty dual grid");
    const Vec vol = dual_lumped_volumes(grid);
    DiscreteMeasure nu;
    nu.weights.resize(grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        nu.weights[i] = weight_W(grid.points[i], grid.cfg) * vol[i];
    const double sum = std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0);
    if (sum <= 0.0) throw ZeroMassError("target_measure: all weights vanish");
    for (double& w : nu.weights) w /= sum;
    nu.total_mass = 1.0;
    return nu;
}

}  // namespace otlim
