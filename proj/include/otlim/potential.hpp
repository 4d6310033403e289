#pragma once

// The convex potential u on the simplex grid, its Legendre dual u* on the
// dual grid, the gradient-weighted measure Mu, non-archimedean Fubini-Study
// approximants, and tropical evaluation of monomial term lists.

#include <cstdint>
#include <vector>

#include "otlim/geometry.hpp"
#include "otlim/measures.hpp"
#include "otlim/transport.hpp"

namespace otlim {

struct MissingDualsError : Error {
    using Error::Error;
};
struct EmptyTermsError : Error {
    using Error::Error;
};
struct MalformedTermError : Error {
    using Error::Error;
};

class ConvexPotential {
  public:
    SimplexGrid grid;
    DualGrid dual;
    Vec u;       // on grid.points, min = 0
    Vec u_star;  // on dual.points, shifted consistently with u
    double normalization_shift = 0.0;

    // u from the source dual f via u = |xhat|^2/2 - f; u* from the target
    // dual g via u* = |phat|^2/2 - g + p_0; then one double-Legendre
    // round-trip on the u side and a common additive normalization.
    static ConvexPotential from_duals(const TransportPlan& plan, const SimplexGrid& grid,
                                      const DualGrid& dual);

    // direct construction (tests, synthetic potentials)
    static ConvexPotential from_values(SimplexGrid grid, DualGrid dual, Vec u, Vec u_star);

    // exact discrete conjugate: max over simplex grid of <x,p> - u(x)
    double legendre_dual(const Vec& p_full) const;
    double legendre_dual(const DualPoint& p) const { return legendre_dual(p.p); }

    // max over the materialized dual grid of <p,x> - u*(p); x need not lie
    // in the simplex
    double double_legendre(const Vec& x_full) const;

    // index of the dual grid point attaining double_legendre at x
    std::size_t double_legendre_argmax(const Vec& x_full) const;
};

// Mu(E) = integral of W over the image of E under the map: quadrature of W
// over the union of simplices spanned by the mapped cell corners, split
// along the dual cell decomposition. Supports m <= 2.
double ma_measure(const ConvexPotential& pot, const std::vector<GridCell>& region,
                  const BrenierMap& map, const ProblemConfig& cfg);

// phi_k(x) = max over p in Delta^vee cap (1/k) Z^{m+1} of <p,x> - u*(p),
// with u* evaluated by the exact discrete conjugate.
double fs_approximant(const ConvexPotential& pot, int k, const SimplexPoint& x);

// batched version over the whole simplex grid (amortizes the lattice u*)
Vec fs_approximant_grid(const ConvexPotential& pot, int k);

// lattice Delta^vee cap (1/k) Z^{m+1} as canonical points
std::vector<DualPoint> fs_lattice(const ProblemConfig& cfg, int k);

// Monomial term of a section restricted to the skeleton: -log|term| is the
// affine function <l, x> + a.
struct TropicalTerm {
    std::vector<std::int64_t> l;  // non-negative, at least one zero entry
    std::int64_t a = 0;
};

// min over terms of <l,x> + a. With degree_bound >= 0, terms must satisfy
// sum d_i l_i <= degree_bound.
double tropical_valuation(const std::vector<TropicalTerm>& terms, const SimplexPoint& x,
                          const ProblemConfig* cfg = nullptr,
                          std::int64_t degree_bound = -1);

// One Fubini-Study contribution: a monomial term list and a constant c.
struct FsTermGroup {
    std::vector<TropicalTerm> terms;
    double c = 0.0;
};

// (1/l) max over all (term, group) of (-<l_vec, x> + c - a); on the skeleton
// log|F_i| = -x_i.
double fs_potential_from_terms(const std::vector<FsTermGroup>& groups, std::int64_t l,
                               const SimplexPoint& x, const ProblemConfig* cfg = nullptr);

}  // namespace otlim
