#include "otlim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace otlim {

Vec TransportPlan::row_sums() const {
    Vec r(n_source, 0.0);
    for (std::size_t i = 0; i < n_source; ++i)
        for (std::size_t t = row_offsets[i]; t < row_offsets[i + 1]; ++t) r[i] += mass[t];
    return r;
}

Vec TransportPlan::col_sums() const {
    Vec c(n_target, 0.0);
    for (std::size_t i = 0; i < n_source; ++i)
        for (std::size_t t = row_offsets[i]; t < row_offsets[i + 1]; ++t)
            c[cols[t]] += mass[t];
    return c;
}

CostSpec CostSpec::make(const SimplexGrid& grid, const DualGrid& dual) {
    CostSpec c;
    c.source_xhat.reserve(grid.points.size());
    for (const auto& x : grid.points) c.source_xhat.push_back(x.reduced());
    c.target_phat.reserve(dual.points.size());
    c.target_p0.reserve(dual.points.size());
    for (const auto& p : dual.points) {
        c.target_phat.push_back(p.reduced());
        c.target_p0.push_back(p.p0());
    }
    return c;
}

BrenierMap brenier_map(const TransportPlan& plan, const CostSpec& cost,
                       const ProblemConfig& cfg) {
    BrenierMap map;
    const std::size_t m = cost.target_phat.empty() ? 0 : cost.target_phat[0].size();
    map.t_phat.resize(plan.n_source, Vec(m, 0.0));
    map.t_canonical.resize(plan.n_source);
    for (std::size_t i = 0; i < plan.n_source; ++i) {
        double rowmass = 0.0;
        Vec acc(m, 0.0);
        for (std::size_t t = plan.row_offsets[i]; t < plan.row_offsets[i + 1]; ++t) {
            rowmass += plan.mass[t];
            const Vec& ph = cost.target_phat[plan.cols[t]];
            for (std::size_t c = 0; c < m; ++c) acc[c] += plan.mass[t] * ph[c];
        }
        if (rowmass <= 0.0) {
            map.skipped_rows.push_back(i);
            map.t_canonical[i] = lift_reduced(Vec(m, 0.0), cfg);
            continue;
        }
        for (std::size_t c = 0; c < m; ++c) acc[c] /= rowmass;
        map.t_phat[i] = acc;
        map.t_canonical[i] = lift_reduced(acc, cfg, 1e-6);
    }
    return map;
}

double cyclical_monotonicity_check(const TransportPlan& plan, const CostSpec& cost,
                                   int trials, std::uint64_t seed) {
    if (plan.mass.empty()) return 0.0;
    // flatten support with mass-weighted sampling
    std::vector<std::size_t> row_of(plan.mass.size());
    for (std::size_t i = 0; i < plan.n_source; ++i)
        for (std::size_t t = plan.row_offsets[i]; t < plan.row_offsets[i + 1]; ++t)
            row_of[t] = i;
    Vec cdf(plan.mass.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < plan.mass.size(); ++t) {
        acc += plan.mass[t];
        cdf[t] = acc;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, acc);
    auto draw = [&]() {
        const double r = unif(rng);
        return static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    };
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::size_t a = draw();
        const std::size_t b = draw();
        const std::size_t i = row_of[a], j = plan.cols[a];
        const std::size_t i2 = row_of[b], j2 = plan.cols[b];
        const double gain = cost(i, j2) + cost(i2, j) - cost(i, j) - cost(i2, j2);
        worst = std::min(worst, gain);
    }
    return worst;
}

}  // namespace otlim
