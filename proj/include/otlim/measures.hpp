#pragma once

// Source measure on the simplex, target measure on the dual complex, and the
// normalization constant C1 = integral of W over Delta^vee.

#include <functional>
#include <vector>

#include "otlim/geometry.hpp"

namespace otlim {

struct EmptyGridError : Error {
    using Error::Error;
};
struct ZeroMassError : Error {
    using Error::Error;
};

// Weighted point cloud over an externally owned grid.
struct DiscreteMeasure {
    Vec weights;
    double total_mass = 0.0;
};

// (d_0+..+d_m)/(d_0*..*d_m) * (n-m)!/n!
double C1_closed_form(const ProblemConfig& cfg);

// Composite quadrature of W cell by cell: each dual cell is split into
// resolution^m unimodular subsimplices carrying an exact-degree rule, so the
// result agrees with the closed form to machine precision for polynomial W.
double C1_quadrature(const ProblemConfig& cfg, int resolution);

// Probability measure with trapezoid-type lattice weights (mass-lumped cell
// volumes; boundary points carry reduced weight).
DiscreteMeasure source_measure(const SimplexGrid& grid);

// weights ~ W(p) * lumped cell volume, normalized to mass 1. Points on the
// face W = 0 get weight zero.
DiscreteMeasure target_measure(const DualGrid& grid);

// Lumped (clipped Voronoi box) volume per dual grid point, accumulated over
// every cell the point belongs to. Exposed for quadrature alignment checks.
Vec dual_lumped_volumes(const DualGrid& grid);

// Exact-degree quadrature over the simplex conv(verts) in R^dim via a
// collapsed tensor Gauss-Legendre rule; exact for polynomials of total
// degree <= degree.
double simplex_quadrature(const std::vector<Vec>& verts, int degree,
                          const std::function<double(const Vec&)>& f);

}  // namespace otlim
