#pragma once

// Independent ground truths: the closed-form m=1 solution, pushforward
// histogram checks, and grid symmetry comparators.

#include <vector>

#include "otlim/geometry.hpp"
#include "otlim/measures.hpp"
#include "otlim/potential.hpp"
#include "otlim/transport.hpp"

namespace otlim {

struct DomainError : Error {
    using Error::Error;
};
struct DegreeMismatchError : Error {
    using Error::Error;
};

// Explicit m=1 solution: two-branch formula for u' with the kink at
// x* = d_1/(d_0+d_1) and the boundary values u'(0) = -1/d_0, u'(1) = 1/d_1.
struct M1ClosedForm {
    ProblemConfig cfg;

    explicit M1ClosedForm(ProblemConfig c);

    double kink() const;
    // derivative with respect to x = x_0 in [0,1]
    double uprime(double x) const;
    // u with u(x*) = 0 (equals the min-0 normalization since u' changes sign
    // at x*), by composite Simpson with the kink pinned at an endpoint
    double u(double x, int quad_n = 256) const;
};

struct PushforwardResult {
    Vec binned_map;     // mass of T_# mu per bin
    Vec binned_target;  // nu aggregated to the same bins
    double tv = 0.0;    // total variation distance (half L1)
};

// Bins the mu-weighted map images to the nearest bin point in reduced
// coordinates and compares against nu aggregated the same way.
PushforwardResult pushforward_histogram(const BrenierMap& map, const DiscreteMeasure& mu,
                                        const DualGrid& nu_grid, const DiscreteMeasure& nu,
                                        const DualGrid& bins);

// sup over the grid of |u(sigma x) - u(x)| for a degree-preserving coordinate
// permutation sigma (throws DegreeMismatchError otherwise).
double symmetry_check(const ConvexPotential& pot, const std::vector<int>& sigma,
                      const ProblemConfig& cfg);

// all permutations of 0..m preserving the degree vector, identity included
std::vector<std::vector<int>> degree_preserving_permutations(const ProblemConfig& cfg);

}  // namespace otlim
