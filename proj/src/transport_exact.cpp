#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "otlim/transport.hpp"

// Transportation network simplex on the dense bipartite instance. The basis
// is a spanning tree over source and sink nodes; entering arcs are chosen by
// most negative reduced cost with lexicographic tie-breaking, leaving arcs by
// lowest index among the blocking set, which keeps runs reproducible.

namespace otlim {

namespace {

struct TreeSolver {
    std::size_t ns, nt, nn;
    Vec cmat;  // dense ns x nt cost matrix
    Vec supply, demand;

    double cost(std::size_t i, std::size_t j) const { return cmat[i * nt + j]; }

    // basic arcs as (source i, sink j, flow); adjacency over tree
    struct Arc {
        std::size_t i, j;
        double flow;
    };
    std::vector<Arc> basis;
    std::vector<std::vector<std::size_t>> adj;  // node -> arc ids
    std::vector<std::ptrdiff_t> parent_arc;     // node -> arc id toward root
    std::vector<std::size_t> parent;            // node -> parent node
    std::vector<int> depth;
    Vec pot;  // node potentials: f on sources, g on sinks

    explicit TreeSolver(const CostSpec& c, Vec mu, Vec nu)
        : ns(mu.size()), nt(nu.size()), nn(ns + nt),
          supply(std::move(mu)), demand(std::move(nu)) {
        cmat.resize(ns * nt);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < nt; ++j) cmat[i * nt + j] = c(i, j);
    }

    std::size_t sink_node(std::size_t j) const { return ns + j; }

    void northwest_start() {
        Vec s = supply, d = demand;
        std::size_t i = 0, j = 0;
        while (i < ns && j < nt) {
            const double t = std::min(s[i], d[j]);
            basis.push_back({i, j, t});
            s[i] -= t;
            d[j] -= t;
            const bool src_done = s[i] <= 1e-18;
            const bool snk_done = d[j] <= 1e-18;
            if (src_done && snk_done) {
                // degenerate: advance one side only, keeping the tree connected
                if (i + 1 < ns)
                    ++i;
                else
                    ++j;
            } else if (src_done) {
                ++i;
            } else {
                ++j;
            }
        }
        // pad with zero arcs if the walk exited early
        while (basis.size() < ns + nt - 1) {
            const auto& last = basis.back();
            if (last.i + 1 < ns)
                basis.push_back({last.i + 1, last.j, 0.0});
            else
                basis.push_back({last.i, last.j + 1, 0.0});
        }
    }

    void rebuild_tree() {
        adj.assign(nn, {});
        for (std::size_t a = 0; a < basis.size(); ++a) {
            adj[basis[a].i].push_back(a);
            adj[sink_node(basis[a].j)].push_back(a);
        }
        parent.assign(nn, 0);
        parent_arc.assign(nn, -1);
        depth.assign(nn, -1);
        pot.assign(nn, 0.0);
        // BFS from node 0 (source 0)
        std::vector<std::size_t> queue = {0};
        depth[0] = 0;
        pot[0] = 0.0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const std::size_t v = queue[qi];
            for (std::size_t a : adj[v]) {
                const std::size_t other =
                    (basis[a].i == v) ? sink_node(basis[a].j) : basis[a].i;
                if (depth[other] >= 0) continue;
                depth[other] = depth[v] + 1;
                parent[other] = v;
                parent_arc[other] = static_cast<std::ptrdiff_t>(a);
                const double c = cost(basis[a].i, basis[a].j);
                pot[other] = c - pot[v];  // f_i + g_j = c_ij on basic arcs
                queue.push_back(other);
            }
        }
        if (queue.size() != nn)
            throw ResourceLimitError("solve_exact: basis tree disconnected");
    }

    // Returns the arc ids of the tree path from node a to node b.
    std::vector<std::size_t> tree_path(std::size_t a, std::size_t b) const {
        std::vector<std::size_t> up_a, up_b;
        while (a != b) {
            if (depth[a] >= depth[b]) {
                up_a.push_back(static_cast<std::size_t>(parent_arc[a]));
                a = parent[a];
            } else {
                up_b.push_back(static_cast<std::size_t>(parent_arc[b]));
                b = parent[b];
            }
        }
        up_a.insert(up_a.end(), up_b.rbegin(), up_b.rend());
        return up_a;
    }

    TransportPlan solve() {
        northwest_start();
        rebuild_tree();

        double cmax = 0.0;
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < nt; ++j) cmax = std::max(cmax, cost(i, j));
        const double opt_tol = 1e-12 * (1.0 + cmax);

        const long pivot_cap = 400L * static_cast<long>(nn) + 10'000;
        long pivots = 0;
        while (true) {
            // pricing: most negative reduced cost, lexicographic tie-break
            double best = -opt_tol;
            std::size_t bi = 0, bj = 0;
            bool found = false;
            for (std::size_t i = 0; i < ns; ++i) {
                const double fi = pot[i];
                for (std::size_t j = 0; j < nt; ++j) {
                    const double r = cost(i, j) - fi - pot[sink_node(j)];
                    if (r < best) {
                        best = r;
                        bi = i;
                        bj = j;
                        found = true;
                    }
                }
            }
            if (!found) break;
            if (++pivots > pivot_cap)
                throw ResourceLimitError("solve_exact: pivot cap exceeded");

            // cycle = entering arc + tree path sink(bj) -> bi
            const auto path = tree_path(sink_node(bj), bi);
            // signs alternate starting at -1 for the arc adjacent to sink(bj)
            double theta = std::numeric_limits<double>::infinity();
            std::size_t leave = basis.size();
            {
                int sign = -1;
                for (std::size_t a : path) {
                    if (sign < 0 && (basis[a].flow < theta ||
                                     (basis[a].flow == theta && a < leave))) {
                        theta = basis[a].flow;
                        leave = a;
                    }
                    sign = -sign;
                }
            }
            {
                int sign = -1;
                for (std::size_t a : path) {
                    basis[a].flow += sign * theta;
                    sign = -sign;
                }
            }
            basis[leave] = {bi, bj, theta};
            rebuild_tree();
        }

        TransportPlan plan;
        plan.n_source = ns;
        plan.n_target = nt;
        plan.mu_weights = supply;
        plan.nu_weights = demand;
        plan.report.backend = "exact";
        plan.report.iterations = pivots;

        std::vector<std::vector<std::pair<std::size_t, double>>> rows(ns);
        for (const auto& a : basis)
            if (a.flow > 0.0) rows[a.i].push_back({a.j, a.flow});
        plan.row_offsets.assign(ns + 1, 0);
        for (std::size_t i = 0; i < ns; ++i) {
            std::sort(rows[i].begin(), rows[i].end());
            plan.row_offsets[i + 1] = plan.row_offsets[i] + rows[i].size();
        }
        double total_cost = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            for (const auto& [j, v] : rows[i]) {
                plan.cols.push_back(j);
                plan.mass.push_back(v);
                total_cost += v * cost(i, j);
            }
        }
        plan.achieved_cost = total_cost;
        plan.f.assign(pot.begin(), pot.begin() + ns);
        plan.g.assign(pot.begin() + ns, pot.end());
        return plan;
    }
};

}  // namespace

TransportPlan solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          const CostSpec& cost) {
    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t ns_all = mu.weights.size();
    const std::size_t nt_all = nu.weights.size();
    if (ns_all != cost.n_source() || nt_all != cost.n_target())
        throw InfeasibleError("solve_exact: measure/cost size mismatch");
    if (ns_all * nt_all > kExactSizeCap)
        throw ResourceLimitError("solve_exact: instance exceeds size cap");

    const double mass_mu = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
    const double mass_nu = std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0);
    if (std::fabs(mass_mu - mass_nu) > 1e-9 * std::max(mass_mu, mass_nu))
        throw InfeasibleError("solve_exact: total masses differ");

    // compact away zero-weight atoms; their duals are tightened afterwards
    std::vector<std::size_t> src_ids, tgt_ids;
    Vec s, d;
    for (std::size_t i = 0; i < ns_all; ++i)
        if (mu.weights[i] > 0.0) {
            src_ids.push_back(i);
            s.push_back(mu.weights[i]);
        }
    for (std::size_t j = 0; j < nt_all; ++j)
        if (nu.weights[j] > 0.0) {
            tgt_ids.push_back(j);
            d.push_back(nu.weights[j]);
        }
    if (s.empty() || d.empty()) throw InfeasibleError("solve_exact: empty measure");

    // force exact balance (FP residue goes to the largest demand entry)
    const double sum_s = std::accumulate(s.begin(), s.end(), 0.0);
    const double sum_d = std::accumulate(d.begin(), d.end(), 0.0);
    d[std::max_element(d.begin(), d.end()) - d.begin()] += sum_s - sum_d;

    CostSpec compact;
    compact.source_xhat.reserve(src_ids.size());
    for (std::size_t i : src_ids) compact.source_xhat.push_back(cost.source_xhat[i]);
    compact.target_phat.reserve(tgt_ids.size());
    for (std::size_t j : tgt_ids) {
        compact.target_phat.push_back(cost.target_phat[j]);
        compact.target_p0.push_back(cost.target_p0[j]);
    }

    TreeSolver solver(compact, s, d);
    TransportPlan inner = solver.solve();

    // re-expand to the full index space
    TransportPlan plan;
    plan.n_source = ns_all;
    plan.n_target = nt_all;
    plan.mu_weights = mu.weights;
    plan.nu_weights = nu.weights;
    plan.report = inner.report;
    plan.row_offsets.assign(ns_all + 1, 0);
    std::vector<std::size_t> inv_src(ns_all, SIZE_MAX);
    for (std::size_t t = 0; t < src_ids.size(); ++t) inv_src[src_ids[t]] = t;
    for (std::size_t i = 0; i < ns_all; ++i) {
        std::size_t cnt = 0;
        if (inv_src[i] != SIZE_MAX) {
            const std::size_t ci = inv_src[i];
            cnt = inner.row_offsets[ci + 1] - inner.row_offsets[ci];
        }
        plan.row_offsets[i + 1] = plan.row_offsets[i] + cnt;
    }
    plan.cols.reserve(inner.cols.size());
    plan.mass.reserve(inner.mass.size());
    for (std::size_t i = 0; i < ns_all; ++i) {
        if (inv_src[i] == SIZE_MAX) continue;
        const std::size_t ci = inv_src[i];
        for (std::size_t t = inner.row_offsets[ci]; t < inner.row_offsets[ci + 1]; ++t) {
            plan.cols.push_back(tgt_ids[inner.cols[t]]);
            plan.mass.push_back(inner.mass[t]);
        }
    }
    plan.achieved_cost = inner.achieved_cost;

    plan.f.assign(ns_all, 0.0);
    plan.g.assign(nt_all, 0.0);
    for (std::size_t t = 0; t < src_ids.size(); ++t) plan.f[src_ids[t]] = inner.f[t];
    for (std::size_t t = 0; t < tgt_ids.size(); ++t) plan.g[tgt_ids[t]] = inner.g[t];
    // tighten duals on dropped atoms by c-transform so f + g <= c holds
    // everywhere and u* stays informative on weightless boundary points
    for (std::size_t j = 0; j < nt_all; ++j) {
        if (nu.weights[j] > 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < src_ids.size(); ++t)
            best = std::min(best, cost(src_ids[t], j) - plan.f[src_ids[t]]);
        plan.g[j] = best;
    }
    for (std::size_t i = 0; i < ns_all; ++i) {
        if (mu.weights[i] > 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < tgt_ids.size(); ++t)
            best = std::min(best, cost(i, tgt_ids[t]) - plan.g[tgt_ids[t]]);
        plan.f[i] = best;
    }

    // duality gap against the dual objective (zero at optimum up to FP)
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < ns_all; ++i) dual_obj += plan.f[i] * mu.weights[i];
    for (std::size_t j = 0; j < nt_all; ++j) dual_obj += plan.g[j] * nu.weights[j];
    plan.report.duality_gap = plan.achieved_cost - dual_obj;

    Vec rs = plan.row_sums(), cs = plan.col_sums();
    double merr = 0.0;
    for (std::size_t i = 0; i < ns_all; ++i) merr += std::fabs(rs[i] - mu.weights[i]);
    for (std::size_t j = 0; j < nt_all; ++j) merr += std::fabs(cs[j] - nu.weights[j]);
    plan.report.marginal_error_l1 = merr;
    plan.report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return plan;
}

}  // namespace otlim
