#include "otlim/potential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace otlim {

namespace {

double full_pairing(const Vec& x, const Vec& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * p[i];
    return s;
}

}  // namespace

ConvexPotential ConvexPotential::from_duals(const TransportPlan& plan,
                                            const SimplexGrid& grid,
                                            const DualGrid& dual) {
    if (plan.f.size() != grid.points.size() || plan.g.size() != dual.points.size())
        throw MissingDualsError("from_duals: dual vectors do not match the grids");

    ConvexPotential pot;
    pot.grid = grid;
    pot.dual = dual;

    const std::size_t ns = grid.points.size();
    const std::size_t nt = dual.points.size();

    Vec u_raw(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        const Vec xh = grid.points[i].reduced();
        u_raw[i] = 0.5 * dot(xh, xh) - plan.f[i];
    }
    Vec ustar_raw(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        const Vec ph = dual.points[j].reduced();
        ustar_raw[j] = 0.5 * dot(ph, ph) - plan.g[j] + dual.points[j].p0();
    }

    // one double-Legendre round-trip on the u side: projects onto the
    // max-affine class with slopes in the dual grid (entropic duals are not
    // exactly c-conjugate)
    Vec t(nt, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < nt; ++j) {
        const Vec& p = dual.points[j].p;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ns; ++i)
            best = std::max(best, full_pairing(grid.points[i].x, p) - u_raw[i]);
        t[j] = best;
    }
    Vec u_cx(ns, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < ns; ++i) {
        const Vec& x = grid.points[i].x;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nt; ++j)
            best = std::max(best, full_pairing(x, dual.points[j].p) - t[j]);
        u_cx[i] = best;
    }

    const double shift = *std::min_element(u_cx.begin(), u_cx.end());
    pot.u.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) pot.u[i] = u_cx[i] - shift;
    pot.u_star.resize(nt);
    for (std::size_t j = 0; j < nt; ++j) pot.u_star[j] = ustar_raw[j] + shift;
    pot.normalization_shift = shift;
    return pot;
}

ConvexPotential ConvexPotential::from_values(SimplexGrid grid, DualGrid dual, Vec u,
                                             Vec u_star) {
    ConvexPotential pot;
    pot.grid = std::move(grid);
    pot.dual = std::move(dual);
    pot.u = std::move(u);
    pot.u_star = std::move(u_star);
    return pot;
}

double ConvexPotential::legendre_dual(const Vec& p_full) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        best = std::max(best, full_pairing(grid.points[i].x, p_full) - u[i]);
    return best;
}

double ConvexPotential::double_legendre(const Vec& x_full) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dual.points.size(); ++j)
        best = std::max(best, full_pairing(dual.points[j].p, x_full) - u_star[j]);
    return best;
}

std::size_t ConvexPotential::double_legendre_argmax(const Vec& x_full) const {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < dual.points.size(); ++j) {
        const double v = full_pairing(dual.points[j].p, x_full) - u_star[j];
        if (v > best) {
            best = v;
            arg = j;
        }
    }
    return arg;
}

namespace {

// W in reduced coordinates on the image cell k: with phat_0 == 0,
// sum d_i p_i = sum_{i>=1} d_i phat_i - phat_k * (sum d_i).
double weight_W_reduced(const Vec& phat, int k, const ProblemConfig& cfg) {
    double s = 0.0;
    for (int i = 1; i <= cfg.m; ++i) s += cfg.degrees[i] * phat[i - 1];
    const double pk = (k == 0) ? 0.0 : phat[k - 1];
    const double base = std::max(0.0, 1.0 + s - pk * cfg.degree_sum());
    double w = 1.0;
    for (int e = 0; e < cfg.n - cfg.m; ++e) w *= base;
    return w;
}

// Sutherland-Hodgman clip of a convex polygon against n . x >= b.
std::vector<Vec> clip_halfplane(const std::vector<Vec>& poly, const Vec& n, double b) {
    std::vector<Vec> out;
    const std::size_t sz = poly.size();
    for (std::size_t i = 0; i < sz; ++i) {
        const Vec& cur = poly[i];
        const Vec& nxt = poly[(i + 1) % sz];
        const double dc = dot(n, cur) - b;
        const double dn = dot(n, nxt) - b;
        if (dc >= 0.0) out.push_back(cur);
        if ((dc >= 0.0) != (dn >= 0.0)) {
            const double s = dc / (dc - dn);
            Vec mid(cur.size());
            for (std::size_t c = 0; c < cur.size(); ++c)
                mid[c] = cur[c] + s * (nxt[c] - cur[c]);
            out.push_back(std::move(mid));
        }
    }
    return out;
}

}  // namespace

double ma_measure(const ConvexPotential& pot, const std::vector<GridCell>& region,
                  const BrenierMap& map, const ProblemConfig& cfg) {
    const int m = cfg.m;
    if (m > 2) throw ConfigError("ma_measure: supported for m <= 2");
    if (region.empty()) return 0.0;
    const int degree = cfg.n - cfg.m;

    double total = 0.0;
    if (m == 1) {
        // image of a cell is an interval in phat; integrate the per-cell
        // polynomial over its overlap with each dual cell segment
        const double lo0 = -1.0 / cfg.degrees[1];  // image of cell 0
        const double hi1 = 1.0 / cfg.degrees[0];   // image of cell 1
        for (const auto& cell : region) {
            const double A = map.t_phat[cell.corners[0]][0];
            const double B = map.t_phat[cell.corners[1]][0];
            const double lo = std::min(A, B), hi = std::max(A, B);
            const std::pair<double, double> segs[2] = {{std::max(lo, lo0), std::min(hi, 0.0)},
                                                       {std::max(lo, 0.0), std::min(hi, hi1)}};
            for (int k = 0; k < 2; ++k) {
                if (segs[k].second <= segs[k].first) continue;
                std::vector<Vec> verts = {{segs[k].first}, {segs[k].second}};
                total += simplex_quadrature(verts, degree, [&](const Vec& q) {
                    return weight_W_reduced(q, k, cfg);
                });
            }
        }
        return total;
    }

    // m == 2: clip each image triangle against the three dual cell triangles
    std::vector<std::vector<Halfspace>> cell_facets;
    for (int k = 0; k <= m; ++k)
        cell_facets.push_back(simplex_halfspaces(dual_cell_vertices_reduced(k, cfg)));

    for (const auto& cell : region) {
        std::vector<Vec> tri;
        for (std::size_t c : cell.corners) tri.push_back(map.t_phat[c]);
        for (int k = 0; k <= m; ++k) {
            std::vector<Vec> poly = tri;
            for (const auto& h : cell_facets[k]) {
                poly = clip_halfplane(poly, h.normal, h.offset);
                if (poly.size() < 3) break;
            }
            if (poly.size() < 3) continue;
            for (std::size_t t = 1; t + 1 < poly.size(); ++t) {
                std::vector<Vec> sub = {poly[0], poly[t], poly[t + 1]};
                total += simplex_quadrature(sub, degree, [&](const Vec& q) {
                    return weight_W_reduced(q, k, cfg);
                });
            }
        }
    }
    return total;
}

std::vector<DualPoint> fs_lattice(const ProblemConfig& cfg, int k) {
    const int m = cfg.m;
    std::vector<DualPoint> out;
    std::vector<std::int64_t> l(m + 1, 0);
    std::function<void(int, std::int64_t)> rec = [&](int pos, std::int64_t rem) {
        if (pos == m + 1) {
            if (*std::min_element(l.begin(), l.end()) != 0) return;
            DualPoint dp;
            dp.p.resize(m + 1);
            for (int i = 0; i <= m; ++i)
                dp.p[i] = -static_cast<double>(l[i]) / k;
            dp.cell = static_cast<int>(
                std::find(l.begin(), l.end(), 0) - l.begin());
            out.push_back(std::move(dp));
            return;
        }
        for (std::int64_t v = 0; v * cfg.degrees[pos] <= rem; ++v) {
            l[pos] = v;
            rec(pos + 1, rem - v * cfg.degrees[pos]);
        }
    };
    rec(0, k);
    return out;
}

double fs_approximant(const ConvexPotential& pot, int k, const SimplexPoint& x) {
    if (k < 1) throw ConfigError("fs_approximant: k >= 1 required");
    const auto lattice = fs_lattice(pot.dual.cfg, k);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : lattice)
        best = std::max(best, full_pairing(p.p, x.x) - pot.legendre_dual(p.p));
    return best;
}

Vec fs_approximant_grid(const ConvexPotential& pot, int k) {
    if (k < 1) throw ConfigError("fs_approximant: k >= 1 required");
    const auto lattice = fs_lattice(pot.dual.cfg, k);
    Vec ustar_lat(lattice.size());
    for (std::size_t t = 0; t < lattice.size(); ++t)
        ustar_lat[t] = pot.legendre_dual(lattice[t].p);
    Vec out(pot.grid.points.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < pot.grid.points.size(); ++i) {
        const Vec& x = pot.grid.points[i].x;
        for (std::size_t t = 0; t < lattice.size(); ++t)
            out[i] = std::max(out[i], full_pairing(lattice[t].p, x) - ustar_lat[t]);
    }
    return out;
}

double tropical_valuation(const std::vector<TropicalTerm>& terms, const SimplexPoint& x,
                          const ProblemConfig* cfg, std::int64_t degree_bound) {
    if (terms.empty()) throw EmptyTermsError("tropical_valuation: empty term list");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& term : terms) {
        if (term.l.size() != x.x.size())
            throw MalformedTermError("tropical_valuation: exponent arity mismatch");
        std::int64_t mn = term.l[0], weighted = 0;
        for (std::size_t i = 0; i < term.l.size(); ++i) {
            if (term.l[i] < 0) throw MalformedTermError("tropical_valuation: negative exponent");
            mn = std::min(mn, term.l[i]);
            if (cfg) weighted += static_cast<std::int64_t>(cfg->degrees[i]) * term.l[i];
        }
        if (mn != 0)
            throw MalformedTermError("tropical_valuation: no zero exponent in term");
        if (degree_bound >= 0 && cfg && weighted > degree_bound)
            throw MalformedTermError("tropical_valuation: term exceeds degree bound");
        double v = static_cast<double>(term.a);
        for (std::size_t i = 0; i < term.l.size(); ++i) v += term.l[i] * x.x[i];
        best = std::min(best, v);
    }
    return best;
}

double fs_potential_from_terms(const std::vector<FsTermGroup>& groups, std::int64_t l,
                               const SimplexPoint& x, const ProblemConfig* cfg) {
    if (l < 1) throw ConfigError("fs_potential_from_terms: l >= 1 required");
    if (groups.empty()) throw EmptyTermsError("fs_potential_from_terms: no groups");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& grp : groups) {
        if (grp.terms.empty()) throw EmptyTermsError("fs_potential_from_terms: empty group");
        for (const auto& term : grp.terms) {
            if (term.l.size() != x.x.size())
                throw MalformedTermError("fs_potential_from_terms: arity mismatch");
            std::int64_t mn = term.l[0], weighted = 0;
            for (std::size_t i = 0; i < term.l.size(); ++i) {
                if (term.l[i] < 0)
                    throw MalformedTermError("fs_potential_from_terms: negative exponent");
                mn = std::min(mn, term.l[i]);
                if (cfg) weighted += static_cast<std::int64_t>(cfg->degrees[i]) * term.l[i];
            }
            if (mn != 0)
                throw MalformedTermError("fs_potential_from_terms: no zero exponent");
            if (cfg && weighted > l)
                throw MalformedTermError("fs_potential_from_terms: term degree exceeds l");
            double v = grp.c - static_cast<double>(term.a);
            for (std::size_t i = 0; i < term.l.size(); ++i) v -= term.l[i] * x.x[i];
            best = std::max(best, v);
        }
    }
    return best / static_cast<double>(l);
}

}  // namespace otlim
