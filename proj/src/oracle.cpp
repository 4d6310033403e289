#include "otlim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace otlim {

M1ClosedForm::M1ClosedForm(ProblemConfig c) : cfg(std::move(c)) {
    cfg.validate();
    if (cfg.m != 1) throw ConfigError("M1ClosedForm: requires m = 1");
}

double M1ClosedForm::kink() const {
    return static_cast<double>(cfg.degrees[1]) / (cfg.degrees[0] + cfg.degrees[1]);
}

double M1ClosedForm::uprime(double x) const {
    if (x < -kExactTol || x > 1.0 + kExactTol)
        throw DomainError("m1_uprime: x outside [0,1]");
    x = std::clamp(x, 0.0, 1.0);
    const double d0 = cfg.degrees[0], d1 = cfg.degrees[1];
    const double xs = kink();
    if (x <= xs)
        return (1.0 / d0) * (-1.0 + std::pow((d0 + d1) * x / d1, 1.0 / cfg.n));
    return (1.0 / d1) * (1.0 - std::pow((d0 + d1) * (1.0 - x) / d0, 1.0 / cfg.n));
}

double M1ClosedForm::u(double x, int quad_n) const {
    if (x < -kExactTol || x > 1.0 + kExactTol)
        throw DomainError("m1_u: x outside [0,1]");
    x = std::clamp(x, 0.0, 1.0);
    const double xs = kink();
    const double a = xs, b = x;
    if (a == b) return 0.0;
    // composite Simpson from the kink to x; u' is smooth on one branch here
    const int n = std::max(2, quad_n + (quad_n % 2));
    const double h = (b - a) / n;
    double s = uprime(a) + uprime(b);
    for (int i = 1; i < n; ++i) s += uprime(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

PushforwardResult pushforward_histogram(const BrenierMap& map, const DiscreteMeasure& mu,
                                        const DualGrid& nu_grid, const DiscreteMeasure& nu,
                                        const DualGrid& bins) {
    std::vector<Vec> bin_phat;
    bin_phat.reserve(bins.points.size());
    for (const auto& p : bins.points) bin_phat.push_back(p.reduced());

    auto nearest = [&](const Vec& q) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t b = 0; b < bin_phat.size(); ++b) {
            const double d = sq_dist(q, bin_phat[b]);
            if (d < best) {
                best = d;
                arg = b;
            }
        }
        return arg;
    };

    PushforwardResult out;
    out.binned_map.assign(bin_phat.size(), 0.0);
    out.binned_target.assign(bin_phat.size(), 0.0);
    for (std::size_t i = 0; i < map.t_phat.size(); ++i)
        out.binned_map[nearest(map.t_phat[i])] += mu.weights[i];
    for (std::size_t j = 0; j < nu_grid.points.size(); ++j)
        out.binned_target[nearest(nu_grid.points[j].reduced())] += nu.weights[j];
    double l1 = 0.0;
    for (std::size_t b = 0; b < bin_phat.size(); ++b)
        l1 += std::fabs(out.binned_map[b] - out.binned_target[b]);
    out.tv = 0.5 * l1;
    return out;
}

double symmetry_check(const ConvexPotential& pot, const std::vector<int>& sigma,
                      const ProblemConfig& cfg) {
    if (static_cast<int>(sigma.size()) != cfg.m + 1)
        throw DegreeMismatchError("symmetry_check: permutation arity mismatch");
    for (int i = 0; i <= cfg.m; ++i)
        if (cfg.degrees[sigma[i]] != cfg.degrees[i])
            throw DegreeMismatchError("symmetry_check: permutation does not preserve degrees");

    const auto& grid = pot.grid;
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const auto k = grid.lattice_tuple(i);
        std::vector<int> kp(k.size());
        for (std::size_t t = 0; t < k.size(); ++t) kp[t] = k[sigma[t]];
        const auto j = grid.index_of(kp);
        sup = std::max(sup, std::fabs(pot.u[static_cast<std::size_t>(j)] - pot.u[i]));
    }
    return sup;
}

std::vector<std::vector<int>> degree_preserving_permutations(const ProblemConfig& cfg) {
    std::vector<int> sigma(cfg.m + 1);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        bool ok = true;
        for (int i = 0; i <= cfg.m && ok; ++i)
            if (cfg.degrees[sigma[i]] != cfg.degrees[i]) ok = false;
        if (ok) out.push_back(sigma);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return out;
}

}  // namespace otlim
