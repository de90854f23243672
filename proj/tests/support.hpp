#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "forge/floorplan.hpp"
#include "forge/occupancy.hpp"

namespace forge::testing {

/// Closed room polygon from open vertices and per-edge categories
/// (all walls when `cats` is empty).
inline Room make_room(std::vector<Point> vertices, std::vector<SegmentCategory> cats = {})
{
    Room r;
    if (cats.empty()) cats.assign(vertices.size(), SegmentCategory::Wall);
    r.edge_categories = std::move(cats);
    r.vertices = std::move(vertices);
    r.vertices.push_back(r.vertices.front());
    return r;
}

inline Room rect_room(double x0, double y0, double x1, double y1)
{
    return make_room({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

/// Grid from rows of characters: '?' Unknown, '.' Free, '#' Occupied, 'w' Window.
inline OccupancyGrid grid_from_rows(const std::vector<std::string>& rows, double scale = 1.0)
{
    OccupancyGrid g(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), scale);
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            g.at(r, c) = ch == '.'   ? CellLabel::Free
                         : ch == '#' ? CellLabel::Occupied
                         : ch == 'w' ? CellLabel::Window
                                     : CellLabel::Unknown;
        }
    }
    return g;
}

/// Distance from a point to a polyline by dense sampling of its edges.
inline double sampled_polyline_distance(Point p, const std::vector<Point>& poly, int per_edge = 20000)
{
    double best = INFINITY;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
        for (int k = 0; k <= per_edge; ++k) {
            const double t = static_cast<double>(k) / per_edge;
            best = std::min(best, distance(p, poly[i] + t * (poly[i + 1] - poly[i])));
        }
    return best;
}

}  // namespace forge::testing
