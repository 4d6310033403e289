#pragma once

// Discrete Kantorovich problem between the source and target measures with
// quadratic cost in reduced coordinates, solved either by a transportation
// network simplex (exact) or by log-domain Sinkhorn with epsilon scaling.

#include <cstdint>
#include <string>
#include <vector>

#include "otlim/geometry.hpp"
#include "otlim/measures.hpp"

namespace otlim {

struct InfeasibleError : Error {
    using Error::Error;
};
struct ResourceLimitError : Error {
    using Error::Error;
};
struct NonConvergenceError : Error {
    using Error::Error;
};
struct NumericalUnderflowError : Error {
    using Error::Error;
};

// c(x,p) = 1/2 |xhat - phat|^2. The affine bookkeeping term p_0 per target
// atom is stored alongside and restored when converting duals to u*.
struct CostSpec {
    std::vector<Vec> source_xhat;
    std::vector<Vec> target_phat;
    Vec target_p0;

    static CostSpec make(const SimplexGrid& grid, const DualGrid& dual);

    double operator()(std::size_t i, std::size_t j) const {
        return 0.5 * sq_dist(source_xhat[i], target_phat[j]);
    }
    std::size_t n_source() const { return source_xhat.size(); }
    std::size_t n_target() const { return target_phat.size(); }
};

struct SolverReport {
    std::string backend;
    long iterations = 0;      // Sinkhorn iterations or simplex pivots
    double final_eps = 0.0;   // entropic only
    double duality_gap = 0.0; // achieved_cost minus best dual bound
    double marginal_error_l1 = 0.0;
    double runtime_seconds = 0.0;
};

struct TransportPlan {
    std::size_t n_source = 0;
    std::size_t n_target = 0;

    // sparse coupling, CSR by source row
    std::vector<std::size_t> row_offsets;  // size n_source+1
    std::vector<std::size_t> cols;
    Vec mass;

    double achieved_cost = 0.0;
    Vec f;  // dual on source points
    Vec g;  // dual on target points
    Vec mu_weights;
    Vec nu_weights;
    SolverReport report;

    Vec row_sums() const;
    Vec col_sums() const;
};

// Maximum bipartite instance size accepted by the exact backend.
inline constexpr std::size_t kExactSizeCap = 25'000'000;

TransportPlan solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          const CostSpec& cost);

struct EpsSchedule {
    double eps_start = 0.1;
    double eps_final = 1e-3;
    double factor = 2.0;
    long max_iterations_per_level = 10'000;
    double marginal_tol_l1 = 1e-8;

    void validate() const;
    std::vector<double> levels() const;
};

TransportPlan solve_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostSpec& cost, const EpsSchedule& schedule);

// Barycentric projection of the plan, re-canonicalized through the quotient
// section. Rows with zero mass are skipped and reported.
struct BrenierMap {
    std::vector<Vec> t_phat;             // per source point, reduced coordinates
    std::vector<DualPoint> t_canonical;  // canonical lifts
    std::vector<std::size_t> skipped_rows;
};

BrenierMap brenier_map(const TransportPlan& plan, const CostSpec& cost,
                       const ProblemConfig& cfg);

// Samples pairs from supp(pi) and returns the most negative swap gain
// c(x,p') + c(x',p) - c(x,p) - c(x',p'), clamped at zero above. Optimal plans
// return >= -tolerance.
double cyclical_monotonicity_check(const TransportPlan& plan, const CostSpec& cost,
                                   int trials, std::uint64_t seed);

}  // namespace otlim
