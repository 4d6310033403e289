#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "otlim/transport.hpp"

// Log-domain Sinkhorn with epsilon scaling. Potentials live in cost units;
// the plan is pi_ij = exp((f_i + g_j - C_ij)/eps) mu_i nu_j, rounded onto the
// feasible polytope at the end by row/column rescaling plus a rank-one patch.

namespace otlim {

void EpsSchedule::validate() const {
    if (!(eps_final > 0.0)) throw ConfigError("EpsSchedule: final eps must be > 0");
    if (!(eps_start >= eps_final)) throw ConfigError("EpsSchedule: start < final");
    if (!(factor > 1.0)) throw ConfigError("EpsSchedule: factor must be > 1");
    if (max_iterations_per_level < 1) throw ConfigError("EpsSchedule: iteration cap < 1");
}

std::vector<double> EpsSchedule::levels() const {
    validate();
    std::vector<double> out;
    double e = eps_start;
    while (e > eps_final * (1.0 + 1e-12)) {
        out.push_back(e);
        e /= factor;
    }
    out.push_back(eps_final);
    return out;
}

namespace {

// chunked parallel-for; results are index-wise independent so scheduling
// cannot change the output
template <typename F>
void parallel_rows(std::size_t n, const F& body) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n > 512 ? hw : 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi]() {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// online logsumexp over a strided slice of exponents
struct Lse {
    double mx = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    void add(double t) {
        if (t <= mx) {
            sum += std::exp(t - mx);
        } else {
            sum = sum * std::exp(mx - t) + 1.0;
            mx = t;
        }
    }
    double value() const { return mx + std::log(sum); }
};

}  // namespace

TransportPlan solve_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostSpec& cost, const EpsSchedule& schedule) {
    const auto t_start = std::chrono::steady_clock::now();
    schedule.validate();
    const std::size_t ns_all = mu.weights.size();
    const std::size_t nt_all = nu.weights.size();
    if (ns_all != cost.n_source() || nt_all != cost.n_target())
        throw InfeasibleError("solve_entropic: measure/cost size mismatch");
    const double mass_mu = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
    const double mass_nu = std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0);
    if (std::fabs(mass_mu - mass_nu) > 1e-9 * std::max(mass_mu, mass_nu))
        throw InfeasibleError("solve_entropic: total masses differ");

    // compact away zero-mass atoms (their log-weights would be -inf)
    std::vector<std::size_t> src_ids, tgt_ids;
    for (std::size_t i = 0; i < ns_all; ++i)
        if (mu.weights[i] > 0.0) src_ids.push_back(i);
    for (std::size_t j = 0; j < nt_all; ++j)
        if (nu.weights[j] > 0.0) tgt_ids.push_back(j);
    const std::size_t ns = src_ids.size(), nt = tgt_ids.size();
    if (ns == 0 || nt == 0) throw InfeasibleError("solve_entropic: empty measure");

    Vec a(ns), b(nt), loga(ns), logb(nt);
    for (std::size_t i = 0; i < ns; ++i) {
        a[i] = mu.weights[src_ids[i]];
        loga[i] = std::log(a[i]);
    }
    for (std::size_t j = 0; j < nt; ++j) {
        b[j] = nu.weights[tgt_ids[j]];
        logb[j] = std::log(b[j]);
    }

    // dense cost matrix
    Vec C(ns * nt);
    parallel_rows(ns, [&](std::size_t i) {
        for (std::size_t j = 0; j < nt; ++j)
            C[i * nt + j] = cost(src_ids[i], tgt_ids[j]);
    });

    Vec f(ns, 0.0), g(nt, 0.0), f_new(ns, 0.0);
    long total_iters = 0;
    double final_eps = schedule.eps_final;

    for (const double eps : schedule.levels()) {
        const double inv_eps = 1.0 / eps;
        long it = 0;
        bool converged = false;
        auto f_update = [&]() {
            // f_new_i = -eps * LSE_j[(g_j - C_ij)/eps + log b_j]
            parallel_rows(ns, [&](std::size_t i) {
                Lse lse;
                const double* crow = &C[i * nt];
                for (std::size_t j = 0; j < nt; ++j)
                    lse.add((g[j] - crow[j]) * inv_eps + logb[j]);
                f_new[i] = -eps * lse.value();
            });
        };
        while (true) {
            f_update();
            if (it >= 1) {
                // rows of the current (f, g) plan: a_i * exp((f_i - f_new_i)/eps)
                double row_err = 0.0;
                for (std::size_t i = 0; i < ns; ++i)
                    row_err += a[i] * std::fabs(std::exp((f[i] - f_new[i]) * inv_eps) - 1.0);
                if (!std::isfinite(row_err))
                    throw NumericalUnderflowError(
                        "solve_entropic: non-finite marginal at eps=" + std::to_string(eps));
                if (row_err < schedule.marginal_tol_l1) {
                    converged = true;  // keep (f, g): columns exact, rows within tol
                    break;
                }
            }
            if (it >= schedule.max_iterations_per_level) break;
            ++it;
            f.swap(f_new);
            // g_j = -eps * LSE_i[(f_i - C_ij)/eps + log a_i]  (column pass)
            std::vector<Lse> col(nt);
            for (std::size_t i = 0; i < ns; ++i) {
                const double* crow = &C[i * nt];
                const double fi = f[i], la = loga[i];
                for (std::size_t j = 0; j < nt; ++j)
                    col[j].add((fi - crow[j]) * inv_eps + la);
            }
            for (std::size_t j = 0; j < nt; ++j) g[j] = -eps * col[j].value();
        }
        total_iters += it;
        if (!converged)
            throw NonConvergenceError("solve_entropic: iteration cap at eps=" +
                                      std::to_string(eps));
        final_eps = eps;
    }

    // dense plan at the final eps, then round to the feasible polytope
    const double inv_eps = 1.0 / final_eps;
    Vec P(ns * nt);
    parallel_rows(ns, [&](std::size_t i) {
        const double* crow = &C[i * nt];
        double* prow = &P[i * nt];
        const double base = f[i] * inv_eps + loga[i];
        for (std::size_t j = 0; j < nt; ++j)
            prow[j] = std::exp(base + (g[j] - crow[j]) * inv_eps + logb[j]);
    });
    // row scaling
    parallel_rows(ns, [&](std::size_t i) {
        double s = 0.0;
        double* prow = &P[i * nt];
        for (std::size_t j = 0; j < nt; ++j) s += prow[j];
        const double scale = (s > a[i]) ? a[i] / s : 1.0;
        for (std::size_t j = 0; j < nt; ++j) prow[j] *= scale;
    });
    // column scaling
    Vec colsum(nt, 0.0);
    for (std::size_t i = 0; i < ns; ++i) {
        const double* prow = &P[i * nt];
        for (std::size_t j = 0; j < nt; ++j) colsum[j] += prow[j];
    }
    Vec colscale(nt);
    for (std::size_t j = 0; j < nt; ++j)
        colscale[j] = (colsum[j] > b[j]) ? b[j] / colsum[j] : 1.0;
    parallel_rows(ns, [&](std::size_t i) {
        double* prow = &P[i * nt];
        for (std::size_t j = 0; j < nt; ++j) prow[j] *= colscale[j];
    });
    // rank-one patch with the residual marginals
    Vec dr(ns, 0.0), dc(nt, 0.0);
    double dr_total = 0.0;
    {
        Vec cs(nt, 0.0);
        for (std::size_t i = 0; i < ns; ++i) {
            double s = 0.0;
            const double* prow = &P[i * nt];
            for (std::size_t j = 0; j < nt; ++j) {
                s += prow[j];
                cs[j] += prow[j];
            }
            dr[i] = a[i] - s;
            dr_total += dr[i];
        }
        for (std::size_t j = 0; j < nt; ++j) dc[j] = b[j] - cs[j];
    }
    if (dr_total > 0.0) {
        parallel_rows(ns, [&](std::size_t i) {
            if (dr[i] <= 0.0) return;
            double* prow = &P[i * nt];
            const double s = dr[i] / dr_total;
            for (std::size_t j = 0; j < nt; ++j) prow[j] += s * dc[j];
        });
    }

    TransportPlan plan;
    plan.n_source = ns_all;
    plan.n_target = nt_all;
    plan.mu_weights = mu.weights;
    plan.nu_weights = nu.weights;
    plan.report.backend = "entropic";
    plan.report.iterations = total_iters;
    plan.report.final_eps = final_eps;

    // sparsify: keep entries above a mass floor whose total loss stays far
    // below the marginal tolerance
    const double floor_mass = 1e-16 / static_cast<double>(nt);
    plan.row_offsets.assign(ns_all + 1, 0);
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(ns_all);
    double total_cost = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        const double* prow = &P[i * nt];
        auto& row = rows[src_ids[i]];
        for (std::size_t j = 0; j < nt; ++j) {
            if (prow[j] > floor_mass) {
                row.push_back({tgt_ids[j], prow[j]});
                total_cost += prow[j] * C[i * nt + j];
            }
        }
    }
    for (std::size_t i = 0; i < ns_all; ++i)
        plan.row_offsets[i + 1] = plan.row_offsets[i] + rows[i].size();
    for (std::size_t i = 0; i < ns_all; ++i)
        for (const auto& [j, v] : rows[i]) {
            plan.cols.push_back(j);
            plan.mass.push_back(v);
        }
    plan.achieved_cost = total_cost;

    // duals: entropic potentials at the final eps; dropped atoms tightened by
    // the c-transform so f + g <= c holds there as well
    plan.f.assign(ns_all, 0.0);
    plan.g.assign(nt_all, 0.0);
    for (std::size_t i = 0; i < ns; ++i) plan.f[src_ids[i]] = f[i];
    for (std::size_t j = 0; j < nt; ++j) plan.g[tgt_ids[j]] = g[j];
    for (std::size_t j = 0; j < nt_all; ++j) {
        if (nu.weights[j] > 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ns; ++i)
            best = std::min(best, cost(src_ids[i], j) - f[i]);
        plan.g[j] = best;
    }
    for (std::size_t i = 0; i < ns_all; ++i) {
        if (mu.weights[i] > 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nt; ++j)
            best = std::min(best, cost(i, tgt_ids[j]) - g[j]);
        plan.f[i] = best;
    }

    // duality gap against the c-transform-tightened dual pair: a weak-duality
    // valid bound (raw entropic duals can overshoot the primal)
    {
        Vec g_tight(nt_all, std::numeric_limits<double>::infinity());
        for (std::size_t j = 0; j < nt_all; ++j) {
            for (std::size_t i = 0; i < ns; ++i)
                g_tight[j] =
                    std::min(g_tight[j], cost(src_ids[i], j) - plan.f[src_ids[i]]);
        }
        double dual_obj = 0.0;
        for (std::size_t i = 0; i < ns; ++i) dual_obj += plan.f[src_ids[i]] * a[i];
        for (std::size_t j = 0; j < nt_all; ++j)
            dual_obj += g_tight[j] * nu.weights[j];
        plan.report.duality_gap = plan.achieved_cost - dual_obj;
    }

    Vec rs = plan.row_sums(), cs2 = plan.col_sums();
    double merr = 0.0;
    for (std::size_t i = 0; i < ns_all; ++i) merr += std::fabs(rs[i] - mu.weights[i]);
    for (std::size_t j = 0; j < nt_all; ++j) merr += std::fabs(cs2[j] - nu.weights[j]);
    plan.report.marginal_error_l1 = merr;
    plan.report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return plan;
}

}  // namespace otlim
