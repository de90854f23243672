#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "forge/geometry.hpp"

namespace forge {

/// Cell labels, ordered so that a larger value never gets overwritten by a
/// smaller one during scan integration.
enum class CellLabel : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2, Window = 3 };

inline constexpr std::size_t kLabelCount = 4;

inline bool is_known(CellLabel l) { return l != CellLabel::Unknown; }
inline bool is_solid(CellLabel l) { return l == CellLabel::Occupied || l == CellLabel::Window; }

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(Cell, Cell) = default;
    friend auto operator<=>(Cell, Cell) = default;
};

/// Robot-centred labelled raster. Local metric frame: x right, y up, origin at
/// the grid centre. Row 0 is the top (largest y) row.
///
/// A world point p maps to the local frame as R(-alpha) (p - center).
class OccupancyGrid {
public:
    OccupancyGrid() = default;

    OccupancyGrid(int rows, int cols, double scale, Point center = {}, double alpha = 0.0)
        : rows_(rows), cols_(cols), scale_(scale), center_(center), alpha_(alpha),
          cells_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), CellLabel::Unknown)
    {
        if (rows <= 0 || cols <= 0 || !(scale > 0.0))
            throw std::invalid_argument("occupancy grid needs positive size and scale");
    }

    /// Square grid covering `area` metres per side.
    static OccupancyGrid square(int size, double area, Point center = {}, double alpha = 0.0)
    {
        return {size, size, size / area, center, alpha};
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return cells_.size(); }
    /// Cells per metre (s_x = s_y).
    double scale() const { return scale_; }
    double cell_size() const { return 1.0 / scale_; }
    Point center() const { return center_; }
    double alpha() const { return alpha_; }

    bool in_bounds(int r, int c) const { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }
    std::size_t index(int r, int c) const
    {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
    }
    Cell cell(std::size_t index) const
    {
        return {static_cast<int>(index / static_cast<std::size_t>(cols_)),
                static_cast<int>(index % static_cast<std::size_t>(cols_))};
    }

    CellLabel at(int r, int c) const { return cells_[index(r, c)]; }
    CellLabel& at(int r, int c) { return cells_[index(r, c)]; }
    CellLabel operator[](std::size_t i) const { return cells_[i]; }
    CellLabel& operator[](std::size_t i) { return cells_[i]; }
    const std::vector<CellLabel>& cells() const { return cells_; }

    void fill(CellLabel l) { std::fill(cells_.begin(), cells_.end(), l); }

    Point world_to_local(Point p) const { return rotate(p - center_, -alpha_); }
    Point local_to_world(Point p) const { return rotate(p, alpha_) + center_; }

    /// Continuous (column, row) raster coordinates of a local point.
    Point local_to_raster(Point p) const { return {0.5 * cols_ + scale_ * p.x, 0.5 * rows_ - scale_ * p.y}; }
    Point raster_to_local(Point g) const { return {(g.x - 0.5 * cols_) / scale_, (0.5 * rows_ - g.y) / scale_}; }

    std::optional<Cell> cell_at(Point local) const
    {
        const Point g = local_to_raster(local);
        const int c = static_cast<int>(std::floor(g.x));
        const int r = static_cast<int>(std::floor(g.y));
        if (!in_bounds(r, c)) return std::nullopt;
        return Cell{r, c};
    }

    Point cell_center(int r, int c) const { return raster_to_local({c + 0.5, r + 0.5}); }

    std::size_t count(CellLabel l) const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), l)); }
    std::size_t known_count() const { return size() - count(CellLabel::Unknown); }

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    double scale_ = 1.0;
    Point center_;
    double alpha_ = 0.0;
    std::vector<CellLabel> cells_;
};

using PseudoColor = std::array<std::int8_t, 3>;

inline constexpr PseudoColor pseudo_color(CellLabel l)
{
    switch (l) {
    case CellLabel::Free: return {-1, +1, -1};
    case CellLabel::Occupied: return {-1, -1, +1};
    case CellLabel::Window: return {+1, -1, +1};
    case CellLabel::Unknown: break;
    }
    return {-1, -1, -1};
}

/// Row-major 3-channel pseudo-colour image of the grid.
inline std::vector<PseudoColor> chromatize(const OccupancyGrid& grid)
{
    std::vector<PseudoColor> out;
    out.reserve(grid.size());
    for (CellLabel l : grid.cells()) out.push_back(pseudo_color(l));
    return out;
}

/// Run-length encoding over the row-major cell order: (label, run) pairs.
inline std::vector<std::pair<CellLabel, std::size_t>> run_length_encode(const OccupancyGrid& grid)
{
    std::vector<std::pair<CellLabel, std::size_t>> runs;
    for (CellLabel l : grid.cells()) {
        if (!runs.empty() && runs.back().first == l)
            ++runs.back().second;
        else
            runs.emplace_back(l, 1);
    }
    return runs;
}

/// How a ray updates labels it touches.
enum class MarkPolicy {
    /// label = max(label, new); Occupied/Window are never downgraded.
    Sticky,
    /// Only Unknown cells change.
    UnknownOnly,
};

namespace detail {

inline void apply_label(CellLabel& cell, CellLabel label, MarkPolicy policy)
{
    if (policy == MarkPolicy::UnknownOnly) {
        if (cell == CellLabel::Unknown) cell = label;
    } else if (static_cast<int>(label) > static_cast<int>(cell)) {
        cell = label;
    }
}

}  // namespace detail

/// Visit every raster cell crossed by the local-frame segment from `from` to
/// `to`, in order (grid DDA). The part outside the raster is clipped. The
/// callback receives the cell and whether it contains the segment end.
template <typename Visitor>
void march_ray(const OccupancyGrid& grid, Point from, Point to, Visitor&& visit)
{
    const Point g0 = grid.local_to_raster(from);
    const Point g1 = grid.local_to_raster(to);
    const Point d = g1 - g0;

    // Liang-Barsky clip to [0, cols] x [0, rows].
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {g0.x, grid.cols() - g0.x, g0.y, grid.rows() - g0.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return;
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, t);
        else
            t1 = std::min(t1, t);
    }
    if (t0 > t1) return;
    const bool end_inside = t1 >= 1.0;

    const Point start = g0 + t0 * d;
    int c = std::clamp(static_cast<int>(std::floor(start.x)), 0, grid.cols() - 1);
    int r = std::clamp(static_cast<int>(std::floor(start.y)), 0, grid.rows() - 1);
    if (d.x < 0.0 && start.x == std::floor(start.x) && c > 0 && start.x == c) --c;
    if (d.y < 0.0 && start.y == std::floor(start.y) && r > 0 && start.y == r) --r;

    const int step_c = d.x > 0.0 ? 1 : (d.x < 0.0 ? -1 : 0);
    const int step_r = d.y > 0.0 ? 1 : (d.y < 0.0 ? -1 : 0);
    const double delta_c = step_c != 0 ? 1.0 / std::abs(d.x) : INFINITY;
    const double delta_r = step_r != 0 ? 1.0 / std::abs(d.y) : INFINITY;
    double next_c = step_c > 0 ? (c + 1 - g0.x) / d.x : (step_c < 0 ? (c - g0.x) / d.x : INFINITY);
    double next_r = step_r > 0 ? (r + 1 - g0.y) / d.y : (step_r < 0 ? (r - g0.y) / d.y : INFINITY);

    while (true) {
        const double t_next = std::min(next_c, next_r);
        const bool last = t_next >= t1;
        visit(Cell{r, c}, last && end_inside);
        if (last) return;
        if (next_c < next_r) {
            c += step_c;
            next_c += delta_c;
        } else {
            r += step_r;
            next_r += delta_r;
        }
        if (!grid.in_bounds(r, c)) return;
    }
}

/// Mark one ray in local coordinates: traversed cells become Free and, for a
/// hit, the cell containing the end point gets `hit_label`.
inline void mark_ray(OccupancyGrid& grid, Point from, Point to, bool hit, CellLabel hit_label,
                     MarkPolicy policy = MarkPolicy::Sticky)
{
    march_ray(grid, from, to, [&](Cell cell, bool is_end) {
        const CellLabel label = hit && is_end ? hit_label : CellLabel::Free;
        detail::apply_label(grid.at(cell.row, cell.col), label, policy);
    });
}

}  // namespace forge
