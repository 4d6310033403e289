// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. The two reference instances are solved once and shared.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "otlim/chambers.hpp"
#include "otlim/geometry.hpp"
#include "otlim/measures.hpp"
#include "otlim/oracle.hpp"
#include "otlim/potential.hpp"
#include "otlim/transport.hpp"

using namespace otlim;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct Instance {
    ProblemConfig cfg;
    SimplexGrid grid;
    DualGrid dual;
    DiscreteMeasure mu, nu;
    CostSpec cost;
    TransportPlan plan;
    BrenierMap map;
    ConvexPotential pot;
    ChamberMap cmap;
    double solve_seconds = 0.0;
};

Instance solve(const ProblemConfig& cfg, int N, int dual_N, bool exact,
               double delta_wall = 0.02) {
    Instance s;
    s.cfg = cfg;
    s.grid = SimplexGrid::make(cfg.m, N);
    s.dual = DualGrid::make(cfg, dual_N);
    s.mu = source_measure(s.grid);
    s.nu = target_measure(s.dual);
    s.cost = CostSpec::make(s.grid, s.dual);
    const auto t0 = std::chrono::steady_clock::now();
    if (exact) {
        s.plan = solve_exact(s.mu, s.nu, s.cost);
    } else {
        EpsSchedule sched;  // 0.1 -> 1e-3 by factor 2, cap 10000, stop 1e-8
        s.plan = solve_entropic(s.mu, s.nu, s.cost, sched);
    }
    s.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.map = brenier_map(s.plan, s.cost, cfg);
    s.pot = ConvexPotential::from_duals(s.plan, s.grid, s.dual);
    s.cmap = classify(s.grid, s.map, delta_wall, cfg);
    return s;
}

double lipschitz_ustar(const Instance& s) {
    double lip = 0.0;
    for (std::size_t a = 0; a < s.dual.points.size(); ++a) {
        const Vec pa = s.dual.points[a].reduced();
        for (std::size_t b = a + 1; b < s.dual.points.size(); ++b) {
            const double dist = std::sqrt(sq_dist(pa, s.dual.points[b].reduced()));
            if (dist <= 0.0 || dist > 1.6 * s.dual.spacing()) continue;
            lip = std::max(lip, std::fabs(s.pot.u_star[a] - s.pot.u_star[b]) / dist);
        }
    }
    return lip;
}

double lipschitz_u(const Instance& s) {
    // max slope along grid cell edges
    const auto cells = simplex_grid_cells(s.grid);
    double lip = 0.0;
    for (const auto& cell : cells) {
        for (std::size_t a = 0; a < cell.corners.size(); ++a)
            for (std::size_t b = a + 1; b < cell.corners.size(); ++b) {
                const std::size_t i = cell.corners[a], j = cell.corners[b];
                const double dist = std::sqrt(
                    sq_dist(s.grid.points[i].reduced(), s.grid.points[j].reduced()));
                if (dist <= 0.0) continue;
                lip = std::max(lip, std::fabs(s.pot.u[i] - s.pot.u[j]) / dist);
            }
    }
    return lip;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

int main() {
    std::printf("acceptance: solving reference instances...\n");
    std::fflush(stdout);

    // instance A: n=3, m=1, d=(1,2), N=400/400, exact network simplex
    const ProblemConfig cfg_m1{3, 1, {1, 2}};
    Instance A = solve(cfg_m1, 400, 400, /*exact=*/true);
    std::printf("  m=1 exact: %zu x %zu, %ld pivots, %.1f s\n", A.plan.n_source,
                A.plan.n_target, A.plan.report.iterations, A.solve_seconds);

    // instance B: same data, entropic backend
    Instance B = solve(cfg_m1, 400, 400, /*exact=*/false);
    std::printf("  m=1 entropic: %ld iterations, final eps %.4g, %.1f s\n",
                B.plan.report.iterations, B.plan.report.final_eps, B.solve_seconds);

    // instance C: n=3, m=2, d=(1,1,1), N=60/60, entropic
    const ProblemConfig cfg_m2{3, 2, {1, 1, 1}};
    Instance C = solve(cfg_m2, 60, 60, /*exact=*/false);
    std::printf("  m=2 entropic: %zu x %zu, %ld iterations, %.1f s\n", C.plan.n_source,
                C.plan.n_target, C.plan.report.iterations, C.solve_seconds);
    std::fflush(stdout);

    M1ClosedForm oracle(cfg_m1);

    // ------------------------------------------------------------------
    // 1. C1 identity on 10 random valid configs
    {
        std::mt19937_64 rng(2024);
        bool pass = true;
        double worst_rel = 0.0, worst_time = 0.0;
        for (int t = 0; t < 10; ++t) {
            ProblemConfig cfg;
            cfg.m = 1 + static_cast<int>(rng() % 2);
            cfg.n = cfg.m + 1 + static_cast<int>(rng() % (6 - cfg.m));
            for (int i = 0; i <= cfg.m; ++i)
                cfg.degrees.push_back(1 + static_cast<int>(rng() % 4));
            const auto t0 = std::chrono::steady_clock::now();
            const double cf = C1_closed_form(cfg);
            const double q = C1_quadrature(cfg, 50);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            const double rel = std::fabs(q - cf) / cf;
            worst_rel = std::max(worst_rel, rel);
            worst_time = std::max(worst_time, secs);
            if (rel > 1e-6 || secs >= 1.0) pass = false;
        }
        report(1, pass,
               "C1 quadrature vs closed form: worst rel err " + fmt(worst_rel) +
                   " (<= 1e-6), worst time " + fmt(worst_time) + " s (< 1 s)");
    }

    // ------------------------------------------------------------------
    // 2. m=1 oracle match for both backends
    {
        auto sup_err = [&](const Instance& s) {
            double sup = 0.0;
            for (std::size_t i = 0; i < s.grid.points.size(); ++i) {
                const double x0 = s.grid.points[i].x[0];
                if (x0 < 0.02 || x0 > 0.98) continue;
                sup = std::max(sup, std::fabs(-s.map.t_phat[i][0] - oracle.uprime(x0)));
            }
            return sup;
        };
        const double e_exact = sup_err(A);
        const double e_ent = sup_err(B);
        const bool pass =
            e_exact <= 0.03 && e_ent <= 0.05 && A.solve_seconds <= 300.0;
        report(2, pass,
               "sup|T - u'| interior: exact " + fmt(e_exact) + " (<= 0.03), entropic " +
                   fmt(e_ent) + " (<= 0.05), exact solve " + fmt(A.solve_seconds) +
                   " s (<= 300)");
    }

    // ------------------------------------------------------------------
    // 3. wall location within one grid cell of 2/3
    {
        const double wall = wall_location_m1(A.grid, A.map);
        const double err = std::fabs(wall - 2.0 / 3.0);
        report(3, err <= 1.0 / 400.0,
               "wall at x0 = " + fmt(wall) + ", |err| = " + fmt(err) + " (<= 1/400)");
    }

    // ------------------------------------------------------------------
    // 4. pushforward TV on both instances
    {
        DualGrid bins1 = DualGrid::make(cfg_m1, 5);
        DualGrid bins2 = DualGrid::make(cfg_m2, 5);
        const double tv1 = pushforward_histogram(A.map, A.mu, A.dual, A.nu, bins1).tv;
        const double tv2 = pushforward_histogram(C.map, C.mu, C.dual, C.nu, bins2).tv;
        report(4, tv1 <= 0.05 && tv2 <= 0.08,
               "TV(T#mu, nu): m=1 " + fmt(tv1) + " (<= 0.05), m=2 " + fmt(tv2) +
                   " (<= 0.08)");
    }

    // ------------------------------------------------------------------
    // 5. MA-type equation: total and per-cell density
    {
        const auto cells = simplex_grid_cells(A.grid);
        const double c1 = C1_closed_form(cfg_m1);
        const double total = ma_measure(A.pot, cells, A.map, cfg_m1);
        const double total_rel = std::fabs(total - c1) / c1;

        const double cell_mass = c1 / 400.0;
        double rel_sum = 0.0;
        std::size_t count = 0;
        for (const auto& cell : cells) {
            bool interior = true;
            for (std::size_t c : cell.corners) {
                const double x0 = A.grid.points[c].x[0];
                if (x0 < 0.02 || x0 > 0.98) interior = false;
            }
            if (!interior) continue;
            const double v = ma_measure(A.pot, {cell}, A.map, cfg_m1);
            rel_sum += std::fabs(v - cell_mass) / cell_mass;
            ++count;
        }
        const double per_cell = rel_sum / static_cast<double>(count);
        report(5, total_rel <= 0.02 && per_cell <= 0.05,
               "Mu(Delta) rel err " + fmt(total_rel) + " (<= 0.02), per-cell mean " +
                   fmt(per_cell) + " (<= 0.05, " + std::to_string(count) +
                   " interior cells)");
    }

    // ------------------------------------------------------------------
    // 6. double Legendre idempotence on the grid
    {
        auto max_err = [](const Instance& s) {
            double worst = 0.0;
            for (std::size_t i = 0; i < s.grid.points.size(); ++i)
                worst = std::max(
                    worst, std::fabs(s.pot.double_legendre(s.grid.points[i].x) - s.pot.u[i]));
            return worst;
        };
        const double e1 = max_err(A);
        const double e2 = max_err(C);
        report(6, e1 <= 5e-3 && e2 <= 2e-2,
               "max|u** - u|: m=1 " + fmt(e1) + " (<= 5e-3), m=2 " + fmt(e2) +
                   " (<= 2e-2)");
    }

    // ------------------------------------------------------------------
    // 7. FS approximant sandwich and decay ratio on both instances
    {
        bool sandwich_ok = true;
        bool ratio_ok = true;
        std::string detail;
        for (const Instance* sp : {&A, &C}) {
            const Instance& s = *sp;
            const double lip = lipschitz_ustar(s);
            const double slack = 2.0 * lipschitz_u(s) / s.grid.N;
            Vec deficits;
            for (int k : {4, 8, 16, 32}) {
                const Vec phi = fs_approximant_grid(s.pot, k);
                double deficit = 0.0, excess = 0.0;
                for (std::size_t i = 0; i < phi.size(); ++i) {
                    deficit = std::max(deficit, s.pot.u[i] - phi[i]);
                    excess = std::max(excess, phi[i] - s.pot.u[i]);
                }
                if (deficit > lip / k + slack || excess > slack) sandwich_ok = false;
                deficits.push_back(deficit);
            }
            detail += std::string(s.cfg.m == 1 ? "m=1" : "m=2") + " deficits";
            for (double d : deficits) detail += " " + fmt(d);
            detail += " ratios";
            for (std::size_t t = 0; t + 1 < deficits.size(); ++t) {
                const double r = deficits[t] / deficits[t + 1];
                detail += " " + fmt(r);
                if (r < 1.5 || r > 3.0) ratio_ok = false;
            }
            detail += "; ";
        }
        report(7, sandwich_ok && ratio_ok,
               "sandwich " + std::string(sandwich_ok ? "ok" : "violated") +
                   ", decay ratios in [1.5,3] " + std::string(ratio_ok ? "ok" : "violated") +
                   ": " + detail);
    }

    // ------------------------------------------------------------------
    // 8. symmetry of the m=2 instance
    {
        const auto perms = degree_preserving_permutations(cfg_m2);
        double sup = 0.0;
        for (const auto& sigma : perms)
            sup = std::max(sup, symmetry_check(C.pot, sigma, cfg_m2));

        // chamber labels permute along: with y_t = x_{sigma(t)}, the mapped
        // cell index transports through sigma^{-1}
        std::size_t agree = 0, total = 0;
        for (const auto& sigma : perms) {
            if (std::is_sorted(sigma.begin(), sigma.end())) continue;
            for (std::size_t i = 0; i < C.grid.points.size(); ++i) {
                if (C.cmap.labels[i].kind != LabelKind::Chamber) continue;
                auto k = C.grid.lattice_tuple(i);
                std::vector<int> kp(k.size());
                for (std::size_t t = 0; t < k.size(); ++t) kp[t] = k[sigma[t]];
                const auto j = C.grid.index_of(kp);
                ++total;
                if (C.cmap.labels[j].kind == LabelKind::Chamber) {
                    int expect = 0;
                    for (int t = 0; t <= cfg_m2.m; ++t)
                        if (sigma[t] == C.cmap.labels[i].chamber) expect = t;
                    if (C.cmap.labels[j].chamber == expect) ++agree;
                }
            }
        }
        const double frac = static_cast<double>(agree) / static_cast<double>(total);
        report(8, sup <= 2e-2 && frac >= 0.95,
               "sup|u o sigma - u| = " + fmt(sup) + " (<= 2e-2), label agreement " +
                   fmt(frac) + " (>= 0.95)");
    }

    // ------------------------------------------------------------------
    // 9. chamber-interior coordinate independence (m=1 instance)
    {
        const double slack = 5e-3 + A.dual.spacing();
        double worst = 0.0;
        for (int k = 0; k <= 1; ++k)
            worst = std::max(worst, independence_check(A.pot, A.cmap, k, {0.05, -0.05}));
        report(9, worst <= slack,
               "max deviation over chambers " + fmt(worst) + " (<= " + fmt(slack) + ")");
    }

    // ------------------------------------------------------------------
    // 10. solver cross-validation on a 50x50 instance + cyclical monotonicity
    {
        Instance denseA = solve(cfg_m1, 49, 16, /*exact=*/true);
        Instance denseB = solve(cfg_m1, 49, 16, /*exact=*/false);
        const double diff =
            std::fabs(denseA.plan.achieved_cost - denseB.plan.achieved_cost);
        const double bound = denseB.plan.report.final_eps *
                                 std::log(static_cast<double>(denseA.plan.n_source) *
                                          static_cast<double>(denseA.plan.n_target)) +
                             1e-6;
        const double violation = cyclical_monotonicity_check(A.plan, A.cost, 10000, 7);
        report(10, diff <= bound && violation >= -1e-9,
               "|cost_exact - cost_entropic| " + fmt(diff) + " (<= " + fmt(bound) +
                   ") on " + std::to_string(denseA.plan.n_source) + "x" +
                   std::to_string(denseA.plan.n_target) +
                   ", monotonicity violation " + fmt(violation) + " (>= -1e-9)");
    }

    // ------------------------------------------------------------------
    // 11. m=1 ODE identity on the oracle itself
    {
        const double d0 = 1.0, d1 = 2.0, n = 3.0;
        const double rhs = 1.0 / (n * d0) + 1.0 / (n * d1);
        const double h = 1e-5;
        double worst = 0.0;
        for (double x = 0.05; x <= oracle.kink() - 0.02; x += 5e-4) {
            const double upp = (oracle.uprime(x + h) - oracle.uprime(x - h)) / (2.0 * h);
            const double lhs = std::pow(1.0 + d0 * oracle.uprime(x), n - 1.0) * upp;
            worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
        }
        for (double x = oracle.kink() + 0.02; x <= 0.95; x += 5e-4) {
            const double upp = (oracle.uprime(x + h) - oracle.uprime(x - h)) / (2.0 * h);
            const double lhs = std::pow(1.0 - d1 * oracle.uprime(x), n - 1.0) * upp;
            worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
        }
        report(11, worst <= 0.01,
               "max relative ODE residual " + fmt(worst) + " (<= 0.01)");
    }

    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
