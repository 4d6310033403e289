#include "otlim/chambers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otlim {

ChamberMap classify(const SimplexGrid& grid, const BrenierMap& map, double delta_wall,
                    const ProblemConfig& cfg) {
    const int m = cfg.m;
    ChamberMap out;
    out.delta_wall = delta_wall;
    out.labels.resize(grid.points.size());
    out.chamber_counts.assign(m + 1, 0);

    std::vector<std::vector<Halfspace>> cell_facets;
    for (int k = 0; k <= m; ++k)
        cell_facets.push_back(simplex_halfspaces(dual_cell_vertices_reduced(k, cfg)));
    const auto hull_facets = simplex_halfspaces(dual_hull_vertices_reduced(cfg));

    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const Vec& q = map.t_phat[i];
        PointLabel lbl;
        if (simplex_depth(q, hull_facets) < -delta_wall) {
            lbl.kind = LabelKind::Unresolved;
            ++out.unresolved_count;
            out.labels[i] = std::move(lbl);
            continue;
        }
        int deep_cell = -1;
        for (int k = 0; k <= m; ++k) {
            const double dk = simplex_depth(q, cell_facets[k]);
            if (dk >= delta_wall) deep_cell = k;
            if (dk > -delta_wall) lbl.adjacent.push_back(k);
        }
        if (deep_cell >= 0) {
            lbl.kind = LabelKind::Chamber;
            lbl.chamber = deep_cell;
            lbl.adjacent.clear();
            ++out.chamber_counts[deep_cell];
        } else {
            lbl.kind = LabelKind::Wall;
            ++out.wall_count;
        }
        out.labels[i] = std::move(lbl);
    }

    const auto cells = simplex_grid_cells(grid);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& corners = cells[c].corners;
        bool differs = false;
        for (std::size_t t = 1; t < corners.size() && !differs; ++t) {
            const auto& a = out.labels[corners[0]];
            const auto& b = out.labels[corners[t]];
            differs = a.kind != b.kind ||
                      (a.kind == LabelKind::Chamber && a.chamber != b.chamber);
        }
        if (differs) out.wall_cells.push_back(c);
    }
    return out;
}

double wall_fraction(const ChamberMap& cmap, const DiscreteMeasure& mu) {
    double mass = 0.0;
    for (std::size_t i = 0; i < cmap.labels.size(); ++i)
        if (cmap.labels[i].kind != LabelKind::Chamber) mass += mu.weights[i];
    return mass;
}

double wall_location_m1(const SimplexGrid& grid, const BrenierMap& map) {
    if (grid.m != 1) throw ConfigError("wall_location_m1: requires m = 1");
    // the mapped gradient phat crosses 0 at the wall; interpolate the sign
    // change (the grid enumerates x_0 descending, phat ascending)
    for (std::size_t i = 0; i + 1 < grid.points.size(); ++i) {
        const double a = map.t_phat[i][0];
        const double b = map.t_phat[i + 1][0];
        if (a == 0.0) return grid.points[i].x[0];
        if ((a > 0.0) != (b > 0.0)) {
            const double s = a / (a - b);
            return grid.points[i].x[0] +
                   s * (grid.points[i + 1].x[0] - grid.points[i].x[0]);
        }
    }
    throw EmptyChamberError("wall_location_m1: no sign crossing found");
}

double independence_check(const ConvexPotential& pot, const ChamberMap& cmap, int k,
                          const Vec& offsets) {
    const auto& grid = pot.grid;
    double dev = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const auto& lbl = cmap.labels[i];
        if (lbl.kind != LabelKind::Chamber || lbl.chamber != k) continue;
        any = true;
        const Vec& x = grid.points[i].x;
        const double base = pot.double_legendre(x);
        for (double s : offsets) {
            Vec probe = x;
            probe[k] += s;
            dev = std::max(dev, std::fabs(pot.double_legendre(probe) - base));
        }
    }
    if (!any) throw EmptyChamberError("independence_check: chamber " + std::to_string(k) +
                                      " is empty");
    return dev;
}

}  // namespace otlim
