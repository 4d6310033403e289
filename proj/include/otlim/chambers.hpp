#pragma once

// Wall-chamber structure: classify skeleton points by which dual cell their
// gradient occupies, extract walls, and verify the chamber-interior
// coordinate independence of the extended potential.

#include <vector>

#include "otlim/geometry.hpp"
#include "otlim/measures.hpp"
#include "otlim/potential.hpp"
#include "otlim/transport.hpp"

namespace otlim {

struct EmptyChamberError : Error {
    using Error::Error;
};

enum class LabelKind { Chamber, Wall, Unresolved };

struct PointLabel {
    LabelKind kind = LabelKind::Unresolved;
    int chamber = -1;               // valid when kind == Chamber
    std::vector<int> adjacent;      // cells within delta_wall (Wall labels)
};

struct ChamberMap {
    std::vector<PointLabel> labels;
    std::vector<std::size_t> wall_cells;  // grid cells with differing corner labels
    double delta_wall = 0.0;
    std::vector<std::size_t> chamber_counts;  // per cell k
    std::size_t wall_count = 0;
    std::size_t unresolved_count = 0;
};

// Each point is labeled by the unique cell containing the mapped gradient at
// depth >= delta_wall, Wall when within delta_wall of a cell boundary, and
// Unresolved when outside the dual complex by more than delta_wall.
ChamberMap classify(const SimplexGrid& grid, const BrenierMap& map, double delta_wall,
                    const ProblemConfig& cfg);

// mu_0-mass of Wall and Unresolved labels.
double wall_fraction(const ChamberMap& cmap, const DiscreteMeasure& mu);

// m=1 only: sub-grid wall position from the sign crossing of the mapped
// gradient through the shared cell boundary, as a coordinate x_0.
double wall_location_m1(const SimplexGrid& grid, const BrenierMap& map);

// max over chamber-k interior points of |u**(x + s e_k) - u**(x)| over the
// probe offsets; the extension must not depend on x_k there.
double independence_check(const ConvexPotential& pot, const ChamberMap& cmap, int k,
                          const Vec& offsets);

}  // namespace otlim
