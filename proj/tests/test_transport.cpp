#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "otlim/transport.hpp"

using namespace otlim;

namespace {

// free-standing 1D instance builder
CostSpec line_cost(const Vec& xs, const Vec& ps) {
    CostSpec c;
    for (double x : xs) c.source_xhat.push_back({x});
    for (double p : ps) {
        c.target_phat.push_back({p});
        c.target_p0.push_back(0.0);
    }
    return c;
}

DiscreteMeasure uniform_measure(std::size_t n) {
    DiscreteMeasure mu;
    mu.weights.assign(n, 1.0 / static_cast<double>(n));
    mu.total_mass = 1.0;
    return mu;
}

Vec linspace(double a, double b, std::size_t n) {
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

void check_feasible(const TransportPlan& plan) {
    const Vec rs = plan.row_sums();
    const Vec cs = plan.col_sums();
    for (std::size_t i = 0; i < plan.n_source; ++i)
        CHECK(std::fabs(rs[i] - plan.mu_weights[i]) <=
              1e-8 * std::max(1.0, plan.mu_weights[i]));
    for (std::size_t j = 0; j < plan.n_target; ++j)
        CHECK(std::fabs(cs[j] - plan.nu_weights[j]) <=
              1e-8 * std::max(1.0, plan.nu_weights[j]));
    for (double v : plan.mass) CHECK(v >= 0.0);
}

}  // namespace

TEST_SUITE_BEGIN("transport");

TEST_CASE("exact solve, single atom") {
    auto cost = line_cost({0.3}, {0.8});
    auto plan = solve_exact(uniform_measure(1), uniform_measure(1), cost);
    REQUIRE(plan.mass.size() == 1);
    CHECK(plan.mass[0] == doctest::Approx(1.0));
    CHECK(plan.achieved_cost == doctest::Approx(0.5 * 0.25));
}

TEST_CASE("exact solve, two equal atoms at identical locations") {
    auto cost = line_cost({0.2, 0.7}, {0.2, 0.7});
    auto plan = solve_exact(uniform_measure(2), uniform_measure(2), cost);
    CHECK(plan.achieved_cost == doctest::Approx(0.0));
    check_feasible(plan);
}

TEST_CASE("exact solve, uniform to uniform is the monotone coupling") {
    const std::size_t n = 40;
    auto xs = linspace(0.0, 1.0, n);
    auto cost = line_cost(xs, xs);
    auto plan = solve_exact(uniform_measure(n), uniform_measure(n), cost);
    check_feasible(plan);

    // CDF-inversion oracle: identical uniform marginals give the identity map
    auto map = brenier_map(plan, cost, ProblemConfig{2, 1, {1, 1}});
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::fabs(map.t_phat[i][0] - xs[i]) <= 1.0 / n);
}

TEST_CASE("exact solve duals certify optimality") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t ns = 23, nt = 31;
    Vec xs(ns), ps(nt);
    for (auto& v : xs) v = u(rng);
    for (auto& v : ps) v = 2.0 * u(rng) - 1.0;
    std::sort(xs.begin(), xs.end());
    std::sort(ps.begin(), ps.end());
    DiscreteMeasure mu, nu;
    for (std::size_t i = 0; i < ns; ++i) mu.weights.push_back(u(rng) + 0.1);
    for (std::size_t j = 0; j < nt; ++j) nu.weights.push_back(u(rng) + 0.1);
    const double ms = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
    const double mt = std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0);
    for (auto& w : mu.weights) w /= ms;
    for (auto& w : nu.weights) w /= mt;
    mu.total_mass = nu.total_mass = 1.0;

    auto cost = line_cost(xs, ps);
    auto plan = solve_exact(mu, nu, cost);
    check_feasible(plan);

    // f + g <= c everywhere, equality on the support
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            CHECK(plan.f[i] + plan.g[j] <= cost(i, j) + 1e-10);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t t = plan.row_offsets[i]; t < plan.row_offsets[i + 1]; ++t)
            CHECK(plan.f[i] + plan.g[plan.cols[t]] ==
                  doctest::Approx(cost(i, plan.cols[t])).epsilon(1e-10));
    CHECK(plan.report.duality_gap >= -1e-10);
    CHECK(std::fabs(plan.report.duality_gap) <= 1e-9 * std::max(plan.achieved_cost, 1e-3));
}

TEST_CASE("exact solve permutation equivariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 17;
    Vec xs(n), ps(n);
    for (auto& v : xs) v = u(rng);
    for (auto& v : ps) v = u(rng);
    auto cost = line_cost(xs, ps);
    auto plan = solve_exact(uniform_measure(n), uniform_measure(n), cost);

    Vec xs2(xs.rbegin(), xs.rend());
    Vec ps2(ps.rbegin(), ps.rend());
    auto cost2 = line_cost(xs2, ps2);
    auto plan2 = solve_exact(uniform_measure(n), uniform_measure(n), cost2);
    CHECK(plan.achieved_cost == doctest::Approx(plan2.achieved_cost).epsilon(1e-12));
}

TEST_CASE("exact solve error paths") {
    auto cost = line_cost({0.0, 1.0}, {0.5});
    DiscreteMeasure mu = uniform_measure(2);
    DiscreteMeasure nu;
    nu.weights = {0.7};
    nu.total_mass = 0.7;
    CHECK_THROWS_AS(solve_exact(mu, nu, cost), InfeasibleError);

    // size cap trips before any allocation-heavy work
    CostSpec big;
    big.source_xhat.assign(5001, Vec{0.0});
    big.target_phat.assign(5001, Vec{0.0});
    big.target_p0.assign(5001, 0.0);
    CHECK_THROWS_AS(solve_exact(uniform_measure(5001), uniform_measure(5001), big),
                    ResourceLimitError);
}

TEST_CASE("entropic solve matches the trivial instance") {
    auto cost = line_cost({0.3}, {0.8});
    EpsSchedule sched;
    auto plan = solve_entropic(uniform_measure(1), uniform_measure(1), cost, sched);
    REQUIRE(plan.mass.size() == 1);
    CHECK(plan.mass[0] == doctest::Approx(1.0));
    CHECK(plan.achieved_cost == doctest::Approx(0.5 * 0.25));
}

TEST_CASE("entropic solve, uniform to uniform within blur of identity") {
    const std::size_t n = 50;
    auto xs = linspace(0.0, 1.0, n);
    auto cost = line_cost(xs, xs);
    EpsSchedule sched;
    auto plan = solve_entropic(uniform_measure(n), uniform_measure(n), cost, sched);
    CHECK(plan.report.marginal_error_l1 <= 1e-7);

    auto map = brenier_map(plan, cost, ProblemConfig{2, 1, {1, 1}});
    const double tol = std::max(1.0 / n, 3.0 * std::sqrt(sched.eps_final));
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::fabs(map.t_phat[i][0] - xs[i]) <= tol);
}

TEST_CASE("entropic cost close to exact cost on a 50x50 instance") {
    const std::size_t n = 50;
    Vec xs = linspace(0.0, 1.0, n);
    Vec ps = linspace(-0.5, 1.0, n);
    auto cost = line_cost(xs, ps);
    DiscreteMeasure nu;  // smooth positive density on the target line
    for (double p : ps) nu.weights.push_back(0.1 + (1.2 - std::fabs(p)) * (1.2 - std::fabs(p)));
    const double mass = std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0);
    for (auto& w : nu.weights) w /= mass;
    nu.total_mass = 1.0;

    auto exact = solve_exact(uniform_measure(n), nu, cost);
    EpsSchedule sched;
    auto ent = solve_entropic(uniform_measure(n), nu, cost, sched);

    // rounded entropic plan is feasible, hence suboptimal
    CHECK(ent.achieved_cost >= exact.achieved_cost - 1e-10);
    const double bound =
        sched.eps_final * std::log(static_cast<double>(n) * static_cast<double>(n));
    CHECK(ent.achieved_cost - exact.achieved_cost <= bound + 1e-6);
}

TEST_CASE("entropic schedule validation and failure modes") {
    EpsSchedule bad;
    bad.eps_final = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = EpsSchedule{};
    bad.factor = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = EpsSchedule{};
    bad.eps_start = 1e-4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // skewed two-atom instance with a tiny iteration budget
    auto cost = line_cost({0.0, 1.0}, {1.0, 0.0});
    EpsSchedule tight;
    tight.eps_start = 1e-3;
    tight.eps_final = 1e-3;
    tight.max_iterations_per_level = 1;
    DiscreteMeasure mu;
    mu.weights = {0.9, 0.1};
    mu.total_mass = 1.0;
    DiscreteMeasure nu;
    nu.weights = {0.25, 0.75};
    nu.total_mass = 1.0;
    CHECK_THROWS_AS(solve_entropic(mu, nu, cost, tight), NonConvergenceError);
}

TEST_CASE("brenier map basics") {
    // identity coupling: T equals the target exactly
    auto cost = line_cost({0.1, 0.9}, {-0.2, 0.4});
    DiscreteMeasure mu = uniform_measure(2);
    auto plan = solve_exact(mu, mu, cost);
    ProblemConfig cfg{3, 1, {1, 2}};
    auto map = brenier_map(plan, cost, cfg);
    CHECK(map.t_phat[0][0] == doctest::Approx(-0.2));
    CHECK(map.t_phat[1][0] == doctest::Approx(0.4));
    // canonical lifts: cell 0 for phat <= 0, cell 1 for phat > 0
    CHECK(map.t_canonical[0].p[0] == doctest::Approx(0.0));
    CHECK(map.t_canonical[0].p[1] == doctest::Approx(-0.2));
    CHECK(map.t_canonical[1].p[0] == doctest::Approx(-0.4));
    CHECK(map.t_canonical[1].p[1] == doctest::Approx(0.0));

    // zero-mass source atom is skipped and reported
    DiscreteMeasure mu0;
    mu0.weights = {0.0, 1.0};
    mu0.total_mass = 1.0;
    DiscreteMeasure nu0;
    nu0.weights = {0.0, 1.0};
    nu0.total_mass = 1.0;
    auto plan0 = solve_exact(mu0, nu0, cost);
    auto map0 = brenier_map(plan0, cost, cfg);
    REQUIRE(map0.skipped_rows.size() == 1);
    CHECK(map0.skipped_rows[0] == 0);
}

TEST_CASE("brenier images stay in the dual hull") {
    ProblemConfig cfg{3, 2, {1, 1, 1}};
    auto grid = SimplexGrid::make(2, 10);
    auto dual = DualGrid::make(cfg, 10);
    auto mu = source_measure(grid);
    auto nu = target_measure(dual);
    auto cost = CostSpec::make(grid, dual);
    EpsSchedule sched;
    sched.eps_final = 0.01;
    auto plan = solve_entropic(mu, nu, cost, sched);
    auto map = brenier_map(plan, cost, cfg);
    const auto facets = simplex_halfspaces(dual_hull_vertices_reduced(cfg));
    for (const auto& t : map.t_phat) CHECK(simplex_depth(t, facets) >= -1e-10);
}

TEST_CASE("cyclical monotonicity") {
    // identity coupling has zero violation
    auto cost = line_cost({0.0, 1.0}, {0.0, 1.0});
    auto plan = solve_exact(uniform_measure(2), uniform_measure(2), cost);
    CHECK(cyclical_monotonicity_check(plan, cost, 1000, 42) >= -1e-15);

    // deliberately swapped coupling on distinct atoms is detected:
    // c(0,0)+c(1,1) - c(0,1) - c(1,0) = -1
    TransportPlan swapped;
    swapped.n_source = swapped.n_target = 2;
    swapped.row_offsets = {0, 1, 2};
    swapped.cols = {1, 0};
    swapped.mass = {0.5, 0.5};
    swapped.mu_weights = {0.5, 0.5};
    swapped.nu_weights = {0.5, 0.5};
    const double v = cyclical_monotonicity_check(swapped, cost, 1000, 42);
    CHECK(v == doctest::Approx(-1.0));
}

TEST_SUITE_END();
