#include "otlim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace otlim {

void ProblemConfig::validate() const {
    if (m < 1 || m > n - 1)
        throw ConfigError("ProblemConfig: requires 1 <= m <= n-1, got m=" + std::to_string(m) +
                          ", n=" + std::to_string(n));
    if (static_cast<int>(degrees.size()) != m + 1)
        throw ConfigError("ProblemConfig: expected m+1 = " + std::to_string(m + 1) +
                          " degrees, got " + std::to_string(degrees.size()));
    for (int d : degrees)
        if (d < 1) throw ConfigError("ProblemConfig: degrees must be >= 1");
}

int ProblemConfig::degree_sum() const {
    return std::accumulate(degrees.begin(), degrees.end(), 0);
}

double ProblemConfig::degree_product() const {
    double p = 1.0;
    for (int d : degrees) p *= d;
    return p;
}

int ProblemConfig::max_degree() const {
    return *std::max_element(degrees.begin(), degrees.end());
}

DualPoint canonicalize(const Vec& q, const ProblemConfig& cfg, double tol) {
    if (static_cast<int>(q.size()) != cfg.m + 1)
        throw OutOfConeError("canonicalize: expected " + std::to_string(cfg.m + 1) +
                             " coordinates");
    const double mx = *std::max_element(q.begin(), q.end());
    DualPoint out;
    out.p.resize(q.size());
    double pairing = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        out.p[i] = q[i] - mx;
        pairing += cfg.degrees[i] * out.p[i];
    }
    if (pairing < -1.0 - tol)
        throw OutOfConeError("canonicalize: sum d_i p_i = " + std::to_string(pairing) +
                             " < -1 beyond tolerance");
    out.cell = -1;
    for (std::size_t i = 0; i < out.p.size(); ++i) {
        if (out.p[i] == 0.0) {
            out.cell = static_cast<int>(i);
            break;
        }
    }
    return out;
}

DualPoint lift_reduced(const Vec& phat, const ProblemConfig& cfg, double tol) {
    Vec q(phat.size() + 1, 0.0);
    for (std::size_t i = 0; i < phat.size(); ++i) q[i + 1] = phat[i];
    return canonicalize(q, cfg, tol);
}

double weight_W(const DualPoint& p, const ProblemConfig& cfg) {
    double pairing = 0.0;
    for (std::size_t i = 0; i < p.p.size(); ++i) pairing += cfg.degrees[i] * p.p[i];
    const double base = std::max(0.0, 1.0 + pairing);
    double w = 1.0;
    for (int e = 0; e < cfg.n - cfg.m; ++e) w *= base;
    return w;
}

DualPoint dual_vertex(int i, const ProblemConfig& cfg) {
    if (i < 0 || i > cfg.m) throw IndexRangeError("dual_vertex: index out of range");
    Vec q(cfg.m + 1, 0.0);
    q[i] = -1.0 / cfg.degrees[i];
    return canonicalize(q, cfg, kExactTol);
}

namespace {

void enumerate_bary(int m, int N, std::vector<int>& tuple, int pos, int rem,
                    std::vector<SimplexPoint>& out) {
    if (pos == m) {
        tuple[m] = rem;
        SimplexPoint sp;
        sp.x.resize(m + 1);
        for (int i = 0; i <= m; ++i) sp.x[i] = static_cast<double>(tuple[i]) / N;
        out.push_back(std::move(sp));
        return;
    }
    for (int k = rem; k >= 0; --k) {
        tuple[pos] = k;
        enumerate_bary(m, N, tuple, pos + 1, rem - k, out);
    }
}

}  // namespace

std::vector<SimplexPoint> barycentric_grid(int m, int N) {
    if (N < 1) throw ConfigError("barycentric_grid: N >= 1 required");
    std::vector<SimplexPoint> out;
    out.reserve(static_cast<std::size_t>(binomial(N + m, m)));
    std::vector<int> tuple(m + 1, 0);
    enumerate_bary(m, N, tuple, 0, N, out);
    return out;
}

std::vector<DualPoint> dual_grid(const ProblemConfig& cfg, int N) {
    cfg.validate();
    if (N < 1) throw ConfigError("dual_grid: N >= 1 required");
    const int m = cfg.m;
    const int M = N * cfg.max_degree();  // lattice budget: sum d_i j_i <= M
    const double h = 1.0 / M;
    std::vector<DualPoint> out;

    for (int k = 0; k <= m; ++k) {
        std::vector<int> free;
        for (int i = 0; i <= m; ++i)
            if (i != k) free.push_back(i);

        std::vector<int> j(free.size(), 0);
        // odometer over j with sum d_i j_i <= M
        std::vector<int> budget(free.size() + 1, 0);
        auto emit = [&]() {
            // dedup: faces shared with a lower-index cell have p_l = 0, l < k
            for (int l = 0; l < k; ++l) {
                auto it = std::find(free.begin(), free.end(), l);
                if (it != free.end() && j[it - free.begin()] == 0) return;
            }
            DualPoint dp;
            dp.p.assign(m + 1, 0.0);
            for (std::size_t t = 0; t < free.size(); ++t) dp.p[free[t]] = -j[t] * h;
            dp.cell = k;
            out.push_back(std::move(dp));
        };
        // recursive enumeration, lexicographic in j
        std::vector<int> stack;
        std::function<void(std::size_t, int)> rec = [&](std::size_t idx, int rem) {
            if (idx == free.size()) {
                emit();
                return;
            }
            const int d = cfg.degrees[free[idx]];
            for (int v = 0; v * d <= rem; ++v) {
                j[idx] = v;
                rec(idx + 1, rem - v * d);
            }
        };
        rec(0, M);
    }
    return out;
}

SimplexGrid SimplexGrid::make(int m, int N) {
    SimplexGrid g;
    g.m = m;
    g.N = N;
    g.points = barycentric_grid(m, N);
    g.keys_.resize(g.points.size());
    g.order_.resize(g.points.size());
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        std::vector<int> k(m + 1);
        for (int t = 0; t <= m; ++t)
            k[t] = static_cast<int>(std::lround(g.points[i].x[t] * N));
        g.keys_[i] = g.encode(k);
        g.order_[i] = i;
    }
    std::sort(g.order_.begin(), g.order_.end(),
              [&](std::size_t a, std::size_t b) { return g.keys_[a] < g.keys_[b]; });
    return g;
}

std::int64_t SimplexGrid::encode(const std::vector<int>& k) const {
    std::int64_t key = 0;
    for (int t = 1; t <= m; ++t) key = key * (N + 1) + k[t];
    return key;
}

std::ptrdiff_t SimplexGrid::index_of(const std::vector<int>& k) const {
    if (static_cast<int>(k.size()) != m + 1) return -1;
    int total = 0;
    for (int v : k) {
        if (v < 0 || v > N) return -1;
        total += v;
    }
    if (total != N) return -1;
    const std::int64_t key = encode(k);
    auto it = std::lower_bound(order_.begin(), order_.end(), key,
                               [&](std::size_t a, std::int64_t v) { return keys_[a] < v; });
    if (it == order_.end() || keys_[*it] != key) return -1;
    return static_cast<std::ptrdiff_t>(*it);
}

std::vector<int> SimplexGrid::lattice_tuple(std::size_t i) const {
    std::vector<int> k(m + 1);
    for (int t = 0; t <= m; ++t) k[t] = static_cast<int>(std::lround(points[i].x[t] * N));
    return k;
}

DualGrid DualGrid::make(const ProblemConfig& cfg, int N) {
    DualGrid g;
    g.cfg = cfg;
    g.N = N;
    g.points = dual_grid(cfg, N);
    return g;
}

// Alcove triangulation of the dilated simplex. In the order coordinates
// w_i = khat_i + ... + khat_m the region is {N >= w_1 >= ... >= w_m >= 0};
// unit boxes split into Kuhn simplices compatible with the chain equalities.
std::vector<GridCell> simplex_grid_cells(const SimplexGrid& grid) {
    const int m = grid.m;
    const int N = grid.N;
    std::vector<GridCell> cells;

    std::vector<int> c(m, 0);
    std::vector<int> perm(m);

    std::function<void(int, int)> rec = [&](int pos, int hi) {
        if (pos == m) {
            // permutations of axes 1..m; when c_i == c_{i+1}, axis i must be
            // added before axis i+1
            std::iota(perm.begin(), perm.end(), 0);
            do {
                bool ok = true;
                std::vector<int> where(m);
                for (int t = 0; t < m; ++t) where[perm[t]] = t;
                for (int i = 0; i + 1 < m && ok; ++i)
                    if (c[i] == c[i + 1] && where[i] > where[i + 1]) ok = false;
                if (!ok) continue;

                GridCell cell;
                std::vector<int> w(c);
                auto push_vertex = [&]() {
                    // khat_i = w_i - w_{i+1}
                    std::vector<int> key(m + 1);
                    int total = 0;
                    for (int i = 0; i < m; ++i) {
                        const int kh = w[i] - (i + 1 < m ? w[i + 1] : 0);
                        key[i + 1] = kh;
                        total += kh;
                    }
                    key[0] = N - total;
                    const auto idx = grid.index_of(key);
                    cell.corners.push_back(static_cast<std::size_t>(idx));
                };
                push_vertex();
                for (int t = 0; t < m; ++t) {
                    ++w[perm[t]];
                    push_vertex();
                }
                cells.push_back(std::move(cell));
            } while (std::next_permutation(perm.begin(), perm.end()));
            return;
        }
        for (int v = hi; v >= 0; --v) {
            c[pos] = v;
            rec(pos + 1, v);
        }
    };
    if (m >= 1) rec(0, N - 1);
    return cells;
}

std::vector<Vec> dual_cell_vertices_reduced(int k, const ProblemConfig& cfg) {
    const int m = cfg.m;
    std::vector<Vec> verts;
    verts.push_back(Vec(m, 0.0));  // image of the origin
    for (int i = 0; i <= m; ++i) {
        if (i == k) continue;
        verts.push_back(dual_vertex(i, cfg).reduced());
    }
    return verts;
}

std::vector<Vec> dual_hull_vertices_reduced(const ProblemConfig& cfg) {
    std::vector<Vec> verts;
    for (int i = 0; i <= cfg.m; ++i) verts.push_back(dual_vertex(i, cfg).reduced());
    return verts;
}

namespace {

// Solve A x = b for small dense A by Gaussian elimination with partial pivoting.
bool solve_small(std::vector<Vec> A, Vec b, Vec& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        if (std::fabs(A[piv][col]) < 1e-300) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            for (std::size_t cc = col; cc < n; ++cc) A[r][cc] -= f * A[col][cc];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t cc = r + 1; cc < n; ++cc) s -= A[r][cc] * x[cc];
        x[r] = s / A[r][r];
    }
    return true;
}

}  // namespace

std::vector<Halfspace> simplex_halfspaces(const std::vector<Vec>& verts) {
    const std::size_t m = verts[0].size();
    std::vector<Halfspace> out;
    for (std::size_t drop = 0; drop < verts.size(); ++drop) {
        // facet through all vertices except `drop`; unit normal solves
        // n . (v_i - v_0) = 0, oriented toward the dropped vertex
        std::vector<Vec> face;
        for (std::size_t i = 0; i < verts.size(); ++i)
            if (i != drop) face.push_back(verts[i]);
        Vec normal(m, 0.0);
        if (m == 1) {
            normal[0] = 1.0;
        } else {
            std::vector<Vec> A;
            for (std::size_t i = 1; i < face.size(); ++i) {
                Vec row(m);
                for (std::size_t t = 0; t < m; ++t) row[t] = face[i][t] - face[0][t];
                A.push_back(std::move(row));
            }
            // fix the scale with a gauge row; retry axes until solvable
            bool done = false;
            for (std::size_t gauge = 0; gauge < m && !done; ++gauge) {
                std::vector<Vec> Ag(A);
                Vec gr(m, 0.0);
                gr[gauge] = 1.0;
                Ag.push_back(gr);
                Vec rhs(m, 0.0);
                rhs[m - 1] = 1.0;
                done = solve_small(Ag, rhs, normal);
            }
            if (!done) throw Error("simplex_halfspaces: degenerate simplex");
        }
        const double len = norm2(normal);
        for (double& v : normal) v /= len;
        double s_drop = 0.0;
        for (std::size_t t = 0; t < m; ++t)
            s_drop += normal[t] * (verts[drop][t] - face[0][t]);
        if (s_drop < 0.0)
            for (double& v : normal) v = -v;
        Halfspace h;
        h.offset = dot(normal, face[0]);
        h.normal = std::move(normal);
        out.push_back(std::move(h));
    }
    return out;
}

double simplex_depth(const Vec& q, const std::vector<Halfspace>& facets) {
    double depth = std::numeric_limits<double>::infinity();
    for (const auto& h : facets) depth = std::min(depth, dot(h.normal, q) - h.offset);
    return depth;
}

double simplex_depth(const Vec& q, const std::vector<Vec>& verts) {
    return simplex_depth(q, simplex_halfspaces(verts));
}

}  // namespace otlim
