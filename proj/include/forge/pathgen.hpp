#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forge/floorplan.hpp"
#include "forge/geometry.hpp"

namespace forge {

struct NavGridConfig {
    double resolution = 0.1;
    /// Cells closer than this to an impassable segment are blocked.
    double robot_radius = 0.25;
    /// Minimum wall distance for waypoint candidates.
    double clearance = 0.3;
    /// Wall distance beyond which the clearance cost vanishes.
    double truncation = 1.0;
    double weight = 10.0;
    /// Border added around the plan's bounding box.
    double margin = 0.5;
};

/// cost = 1 + weight * max(0, truncation - d_wall)
inline double clearance_cost(double wall_distance, const NavGridConfig& cfg)
{
    return 1.0 + cfg.weight * std::max(0.0, cfg.truncation - wall_distance);
}

/// Navigation raster. Cell (r, c) has its centre at
/// origin + resolution * (c + 0.5, r + 0.5); rows grow with y.
struct NavGrid {
    Point origin;
    double resolution = 0.1;
    int rows = 0;
    int cols = 0;
    std::vector<double> wall_distance;
    std::vector<std::uint8_t> free;
    /// Finite on free cells, +inf on blocked cells.
    std::vector<double> cost;

    std::size_t size() const { return free.size(); }
    std::size_t index(int r, int c) const
    {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c);
    }
    bool in_bounds(int r, int c) const { return r >= 0 && c >= 0 && r < rows && c < cols; }
    Point center(std::size_t i) const
    {
        const auto r = static_cast<double>(i / static_cast<std::size_t>(cols));
        const auto c = static_cast<double>(i % static_cast<std::size_t>(cols));
        return origin + resolution * Point{c + 0.5, r + 0.5};
    }
    std::optional<std::size_t> cell_at(Point p) const
    {
        const int c = static_cast<int>(std::floor((p.x - origin.x) / resolution));
        const int r = static_cast<int>(std::floor((p.y - origin.y) / resolution));
        if (!in_bounds(r, c)) return std::nullopt;
        return index(r, c);
    }
    bool is_free(Point p) const
    {
        const auto i = cell_at(p);
        return i && free[*i];
    }

    /// All-free grid with a uniform cost of 1.
    static NavGrid uniform(int rows, int cols, double resolution = 1.0, Point origin = {})
    {
        const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
        return {origin, resolution, rows, cols, std::vector<double>(n, INFINITY), std::vector<std::uint8_t>(n, 1),
                std::vector<double>(n, 1.0)};
    }
};

inline NavGrid build_navgrid(const FloorPlan& plan, const NavGridConfig& cfg = {})
{
    if (!(cfg.resolution > 0.0)) throw std::invalid_argument("navgrid resolution must be positive");
    if (!(cfg.clearance >= 0.0 && cfg.truncation >= cfg.clearance))
        throw std::invalid_argument("navgrid requires truncation >= clearance >= 0");

    const auto walls = plan.impassable();
    Point lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
    for (const auto& s : plan.segments) {
        for (Point p : {s.segment.a, s.segment.b}) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
    }
    NavGrid grid;
    grid.resolution = cfg.resolution;
    if (plan.segments.empty()) return grid;
    grid.origin = lo - Point{cfg.margin, cfg.margin};
    grid.cols = static_cast<int>(std::ceil((hi.x - lo.x + 2 * cfg.margin) / cfg.resolution));
    grid.rows = static_cast<int>(std::ceil((hi.y - lo.y + 2 * cfg.margin) / cfg.resolution));
    const auto n = static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols);
    grid.wall_distance.assign(n, INFINITY);
    grid.free.assign(n, 0);
    grid.cost.assign(n, INFINITY);

    const bool has_rooms = !plan.rooms.empty();
    for (std::size_t i = 0; i < n; ++i) {
        const Point p = grid.center(i);
        double d = INFINITY;
        for (const auto& w : walls) d = std::min(d, point_segment_distance(p, w));
        grid.wall_distance[i] = d;
        if (d < cfg.robot_radius) continue;
        if (has_rooms && !plan.contains(p)) continue;
        grid.free[i] = 1;
        grid.cost[i] = clearance_cost(d, cfg);
    }
    return grid;
}

/// Greedy max-min (farthest point) selection starting from `first`. Returns
/// indices into `candidates`; at most candidates.size() of them. Ties go to
/// the lowest index.
inline std::vector<std::size_t> farthest_point_sampling(std::span<const Point> candidates, std::size_t k,
                                                        std::size_t first)
{
    std::vector<std::size_t> chosen;
    if (candidates.empty() || k == 0) return chosen;
    k = std::min(k, candidates.size());
    std::vector<double> min_dist(candidates.size(), INFINITY);
    std::size_t next = first;
    while (chosen.size() < k) {
        chosen.push_back(next);
        min_dist[next] = -1.0;
        std::size_t best = candidates.size();
        double best_d = -1.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (min_dist[i] < 0.0) continue;
            min_dist[i] = std::min(min_dist[i], distance(candidates[i], candidates[next]));
            if (min_dist[i] > best_d) {
                best_d = min_dist[i];
                best = i;
            }
        }
        if (best == candidates.size()) break;
        next = best;
    }
    return chosen;
}

/// Farthest-point-sampled waypoints over the free cells of `grid` that keep
/// the configured clearance (all free cells if none do). The seed picks the
/// first waypoint.
inline std::vector<Point> sample_waypoints(const NavGrid& grid, std::size_t k, std::uint64_t seed,
                                           double clearance = 0.3)
{
    std::vector<Point> candidates, fallback;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.free[i]) continue;
        fallback.push_back(grid.center(i));
        if (grid.wall_distance[i] >= clearance) candidates.push_back(grid.center(i));
    }
    if (candidates.empty()) candidates = std::move(fallback);
    if (candidates.empty()) throw std::runtime_error("cannot sample waypoints: free space is empty");
    std::mt19937_64 rng(seed);
    const std::size_t first = rng() % candidates.size();
    std::vector<Point> out;
    for (auto i : farthest_point_sampling(candidates, k, first)) out.push_back(candidates[i]);
    return out;
}

class UnreachableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Path {
    std::vector<Point> points;
    double length = 0.0;
    int turns = 0;
    /// Accumulated grid cost.
    double cost = 0.0;
};

inline double polyline_length(std::span<const Point> poly)
{
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) len += distance(poly[i], poly[i + 1]);
    return len;
}

inline std::vector<Point> douglas_peucker(std::span<const Point> poly, double tolerance)
{
    if (poly.size() <= 2) return {poly.begin(), poly.end()};
    std::vector<bool> keep(poly.size(), false);
    keep.front() = keep.back() = true;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, poly.size() - 1}};
    while (!stack.empty()) {
        const auto [lo, hi] = stack.back();
        stack.pop_back();
        double worst = -1.0;
        std::size_t at = lo;
        for (std::size_t i = lo + 1; i < hi; ++i) {
            const double d = point_segment_distance(poly[i], {poly[lo], poly[hi]});
            if (d > worst) {
                worst = d;
                at = i;
            }
        }
        if (worst > tolerance) {
            keep[at] = true;
            stack.emplace_back(lo, at);
            stack.emplace_back(at, hi);
        }
    }
    std::vector<Point> out;
    for (std::size_t i = 0; i < poly.size(); ++i)
        if (keep[i]) out.push_back(poly[i]);
    return out;
}

struct TurnConfig {
    double simplify_tolerance = 0.2;
    double min_heading_change = deg2rad(30.0);
};

/// Vertices of the simplified polyline where the heading changes by more
/// than the threshold.
inline int count_turns(std::span<const Point> poly, const TurnConfig& cfg = {})
{
    const auto simple = douglas_peucker(poly, cfg.simplify_tolerance);
    int turns = 0;
    for (std::size_t i = 1; i + 1 < simple.size(); ++i) {
        const Point u = simple[i] - simple[i - 1];
        const Point v = simple[i + 1] - simple[i];
        if (norm(u) == 0.0 || norm(v) == 0.0) continue;
        const double change = std::abs(std::atan2(cross(u, v), dot(u, v)));
        if (change > cfg.min_heading_change) ++turns;
    }
    return turns;
}

/// Single-source Dijkstra over the 8-connected free cells. The step between
/// neighbouring cells costs the mean of their costs times the step length in
/// cells (1 or sqrt 2).
class DijkstraTree {
public:
    DijkstraTree(const NavGrid& grid, std::size_t source) : grid_(&grid), source_(source)
    {
        const std::size_t n = grid.size();
        dist_.assign(n, INFINITY);
        parent_.assign(n, n);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
        dist_[source] = 0.0;
        open.emplace(0.0, source);
        constexpr int dr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
        constexpr int dc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
        while (!open.empty()) {
            const auto [d, u] = open.top();
            open.pop();
            if (d > dist_[u]) continue;
            const int r = static_cast<int>(u / static_cast<std::size_t>(grid.cols));
            const int c = static_cast<int>(u % static_cast<std::size_t>(grid.cols));
            for (int k = 0; k < 8; ++k) {
                const int rr = r + dr[k], cc = c + dc[k];
                if (!grid.in_bounds(rr, cc)) continue;
                const std::size_t v = grid.index(rr, cc);
                if (!grid.free[v]) continue;
                const double len = (dr[k] != 0 && dc[k] != 0) ? std::numbers::sqrt2 : 1.0;
                const double nd = d + 0.5 * (grid.cost[u] + grid.cost[v]) * len;
                if (nd < dist_[v]) {
                    dist_[v] = nd;
                    parent_[v] = u;
                    open.emplace(nd, v);
                }
            }
        }
    }

    double cost_to(std::size_t target) const { return dist_[target]; }

    /// Cell sequence from the source to `target`; empty if unreachable.
    std::vector<std::size_t> cells_to(std::size_t target) const
    {
        if (!std::isfinite(dist_[target])) return {};
        std::vector<std::size_t> out{target};
        while (out.back() != source_) out.push_back(parent_[out.back()]);
        std::reverse(out.begin(), out.end());
        return out;
    }

    Path path_to(std::size_t target, const TurnConfig& turns = {}) const
    {
        const auto cells = cells_to(target);
        Path path;
        if (cells.empty()) return path;
        // Keep only the cells where the step direction changes.
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0 && i + 1 < cells.size()) {
                const auto step = [&](std::size_t a, std::size_t b) {
                    const auto ca = static_cast<long>(cells[a]), cb = static_cast<long>(cells[b]);
                    return cb - ca;
                };
                if (step(i - 1, i) == step(i, i + 1)) continue;
            }
            path.points.push_back(grid_->center(cells[i]));
        }
        path.length = polyline_length(path.points);
        path.turns = count_turns(path.points, turns);
        path.cost = dist_[target];
        return path;
    }

private:
    const NavGrid* grid_;
    std::size_t source_;
    std::vector<double> dist_;
    std::vector<std::size_t> parent_;
};

inline std::string format_point(Point p)
{
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

/// Minimum-cost 8-connected path between two free points.
inline Path shortest_path(const NavGrid& grid, Point a, Point b, const TurnConfig& turns = {})
{
    const auto ia = grid.cell_at(a);
    const auto ib = grid.cell_at(b);
    if (!ia || !grid.free[*ia] || !ib || !grid.free[*ib])
        throw UnreachableError("no path from " + format_point(a) + " to " + format_point(b) +
                               ": endpoint outside free space");
    const DijkstraTree tree(grid, *ia);
    if (!std::isfinite(tree.cost_to(*ib)))
        throw UnreachableError("no path from " + format_point(a) + " to " + format_point(b));
    return tree.path_to(*ib, turns);
}

struct PathFilter {
    double min_length = 5.0;
    double max_length = 100.0;
    int min_turns = 3;
};

inline bool accept_path(const Path& p, const PathFilter& f = {})
{
    return p.length >= f.min_length && p.length <= f.max_length && p.turns >= f.min_turns;
}

inline std::vector<Path> filter_paths(std::vector<Path> paths, const PathFilter& f = {})
{
    std::erase_if(paths, [&f](const Path& p) { return !accept_path(p, f); });
    return paths;
}

struct WaypointPath {
    std::size_t from = 0;
    std::size_t to = 0;
    Path path;
};

/// Paths between every pair of waypoints (i < j) that pass the filter.
inline std::vector<WaypointPath> generate_paths(const NavGrid& grid, std::span<const Point> waypoints,
                                                const PathFilter& filter = {})
{
    std::vector<WaypointPath> out;
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        const auto src = grid.cell_at(waypoints[i]);
        if (!src || !grid.free[*src]) continue;
        const DijkstraTree tree(grid, *src);
        for (std::size_t j = i + 1; j < waypoints.size(); ++j) {
            const auto dst = grid.cell_at(waypoints[j]);
            if (!dst || !std::isfinite(tree.cost_to(*dst))) continue;
            Path p = tree.path_to(*dst);
            if (accept_path(p, filter)) out.push_back({i, j, std::move(p)});
        }
    }
    return out;
}

}  // namespace forge
