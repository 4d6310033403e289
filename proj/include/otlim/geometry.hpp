#pragma once

// Simplex Delta, the dual simplicial complex Delta^vee = union_k Delta^vee_k,
// quotient coordinates, and the weight function W.
//
// Conventions fixed here and used everywhere else:
//   * reduced simplex coordinates  xhat = (x_1..x_m)   (x_0 eliminated via sum = 1)
//   * reduced dual coordinates     phat_i = p_i - p_0  (quotient by R*(1,..,1))
//   * canonical dual representative: all entries <= 0, max entry exactly 0.
// With these, <x,p> = p_0 + <xhat, phat> on the simplex.

#include <cstdint>
#include <vector>

#include "otlim/common.hpp"

namespace otlim {

struct OutOfConeError : Error {
    using Error::Error;
};
struct IndexRangeError : Error {
    using Error::Error;
};

// Degeneration data (n, m, d_0..d_m); drives every formula downstream.
struct ProblemConfig {
    int n = 0;
    int m = 0;
    std::vector<int> degrees;

    // Throws ConfigError unless 1 <= m <= n-1 and all d_i >= 1.
    void validate() const;

    int degree_sum() const;
    double degree_product() const;
    int max_degree() const;
};

struct SimplexPoint {
    Vec x;  // (x_0..x_m), entries >= 0, sum = 1

    Vec reduced() const { return Vec(x.begin() + 1, x.end()); }
};

struct DualPoint {
    Vec p;         // canonical representative
    int cell = 0;  // smallest k with p_k == 0

    double p0() const { return p[0]; }
    Vec reduced() const {
        Vec r(p.size() - 1);
        for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = p[i] - p[0];
        return r;
    }
};

// Shift q by -max(q_i) onto the canonical slice and check membership in
// Delta^vee. Idempotent. Throws OutOfConeError if sum d_i p_i < -1 - tol.
DualPoint canonicalize(const Vec& q, const ProblemConfig& cfg, double tol = kFloatTol);

// Canonical lift of a reduced point phat (inverse of DualPoint::reduced).
DualPoint lift_reduced(const Vec& phat, const ProblemConfig& cfg, double tol = kFloatTol);

// W(p) = (1 + sum d_i p_i)^(n-m); zero exactly on the outer face.
double weight_W(const DualPoint& p, const ProblemConfig& cfg);

// i-th vertex (0,..,-1/d_i,..,0) of the dual complex as a canonical point.
DualPoint dual_vertex(int i, const ProblemConfig& cfg);

// { x in Delta : N x integral }, size C(N+m, m), lexicographic in the
// barycentric tuple with x_0 descending.
std::vector<SimplexPoint> barycentric_grid(int m, int N);

// Lattice sample of every cell Delta^vee_k at spacing 1/(N d_max) per free
// coordinate, deduplicated on shared faces; cell index = smallest k.
std::vector<DualPoint> dual_grid(const ProblemConfig& cfg, int N);

// Simplex grid bundled with its lattice resolution and index lookup.
struct SimplexGrid {
    int m = 0;
    int N = 0;
    std::vector<SimplexPoint> points;

    static SimplexGrid make(int m, int N);

    // index of the barycentric tuple k (sum = N); -1 if absent
    std::ptrdiff_t index_of(const std::vector<int>& k) const;
    std::vector<int> lattice_tuple(std::size_t i) const;

  private:
    std::vector<std::int64_t> keys_;  // sorted encoded tuples
    std::vector<std::size_t> order_;
    std::int64_t encode(const std::vector<int>& k) const;
};

struct DualGrid {
    ProblemConfig cfg;
    int N = 0;
    std::vector<DualPoint> points;

    static DualGrid make(const ProblemConfig& cfg, int N);
    double spacing() const { return 1.0 / (static_cast<double>(N) * cfg.max_degree()); }
};

// Unimodular simplicial decomposition of the barycentric grid into N^m cells
// (corner indices refer to barycentric_grid order).
struct GridCell {
    std::vector<std::size_t> corners;  // m+1 grid indices
};
std::vector<GridCell> simplex_grid_cells(const SimplexGrid& grid);

// Vertices of the image cell bar(Delta^vee_k) in reduced coordinates:
// the origin image plus vhat_i for i != k, where vhat_0 = (1/d_0)*(1,..,1)
// and vhat_i = -e_i/d_i.
std::vector<Vec> dual_cell_vertices_reduced(int k, const ProblemConfig& cfg);

// Vertices of the full image simplex bar(Delta^vee).
std::vector<Vec> dual_hull_vertices_reduced(const ProblemConfig& cfg);

// Facet description of a full-dimensional simplex: inside <=> n . q >= b for
// every facet, with unit inward normals.
struct Halfspace {
    Vec normal;
    double offset;
};
std::vector<Halfspace> simplex_halfspaces(const std::vector<Vec>& verts);

// Signed distance from q to the boundary of the simplex conv(verts) in R^m;
// positive inside, negative outside.
double simplex_depth(const Vec& q, const std::vector<Vec>& verts);
double simplex_depth(const Vec& q, const std::vector<Halfspace>& facets);

}  // namespace otlim
