#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "forge/geometry.hpp"
#include "forge/occupancy.hpp"

namespace forge {

namespace detail {

// Marching-squares edge midpoints of the square whose top-left corner is the
// centre of cell (r, c), in doubled raster coordinates (centre of (r, c) is
// (2c + 1, 2r + 1)).
enum class SquareEdge { Top, Right, Bottom, Left };

inline std::pair<int, int> edge_midpoint(int r, int c, SquareEdge e)
{
    switch (e) {
    case SquareEdge::Top: return {2 * c + 2, 2 * r + 1};
    case SquareEdge::Right: return {2 * c + 3, 2 * r + 2};
    case SquareEdge::Bottom: return {2 * c + 2, 2 * r + 3};
    case SquareEdge::Left: break;
    }
    return {2 * c + 1, 2 * r + 2};
}

struct EdgePair {
    SquareEdge from, to;
};

// Case index bits: top-left 8, top-right 4, bottom-right 2, bottom-left 1.
// Saddles (5, 10) connect the two solid corners through the square centre.
inline std::span<const EdgePair> marching_case(int index)
{
    using E = SquareEdge;
    static const std::vector<EdgePair> table[16] = {
        {},
        {{E::Left, E::Bottom}},
        {{E::Bottom, E::Right}},
        {{E::Left, E::Right}},
        {{E::Top, E::Right}},
        {{E::Left, E::Top}, {E::Bottom, E::Right}},
        {{E::Top, E::Bottom}},
        {{E::Left, E::Top}},
        {{E::Left, E::Top}},
        {{E::Top, E::Bottom}},
        {{E::Top, E::Right}, {E::Left, E::Bottom}},
        {{E::Top, E::Right}},
        {{E::Left, E::Right}},
        {{E::Bottom, E::Right}},
        {{E::Left, E::Bottom}},
        {},
    };
    return table[index];
}

}  // namespace detail

/// Contour segments between solid (Occupied or Window) and Free cells, found
/// by marching squares over cell centres. Squares touching an Unknown cell
/// emit nothing. Unit contour pieces are joined into maximal collinear runs.
/// Coordinates are in the grid's local metric frame.
inline SegmentSet recover_visible_segments(const OccupancyGrid& grid)
{
    // Direction class -> line key -> intervals along x (or y for verticals).
    enum Dir { Horizontal, Vertical, Diagonal, AntiDiagonal };
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> runs;

    for (int r = 0; r + 1 < grid.rows(); ++r) {
        for (int c = 0; c + 1 < grid.cols(); ++c) {
            const CellLabel tl = grid.at(r, c), tr = grid.at(r, c + 1);
            const CellLabel br = grid.at(r + 1, c + 1), bl = grid.at(r + 1, c);
            if (!is_known(tl) || !is_known(tr) || !is_known(br) || !is_known(bl)) continue;
            const int index = (is_solid(tl) ? 8 : 0) | (is_solid(tr) ? 4 : 0) | (is_solid(br) ? 2 : 0) |
                              (is_solid(bl) ? 1 : 0);
            for (const auto& e : detail::marching_case(index)) {
                auto [x0, y0] = detail::edge_midpoint(r, c, e.from);
                auto [x1, y1] = detail::edge_midpoint(r, c, e.to);
                if (std::tie(x1, y1) < std::tie(x0, y0)) {
                    std::swap(x0, x1);
                    std::swap(y0, y1);
                }
                if (y0 == y1)
                    runs[{Horizontal, y0}].emplace_back(x0, x1);
                else if (x0 == x1)
                    runs[{Vertical, x0}].emplace_back(y0, y1);
                else if (y1 - y0 == x1 - x0)
                    runs[{Diagonal, x0 - y0}].emplace_back(x0, x1);
                else
                    runs[{AntiDiagonal, x0 + y0}].emplace_back(x0, x1);
            }
        }
    }

    auto to_local = [&grid](int x2, int y2) { return grid.raster_to_local({0.5 * x2, 0.5 * y2}); };
    SegmentSet out;
    for (auto& [key, intervals] : runs) {
        std::sort(intervals.begin(), intervals.end());
        std::vector<std::pair<int, int>> merged;
        for (const auto& iv : intervals) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        const auto [dir, k] = key;
        for (const auto& [lo, hi] : merged) {
            switch (dir) {
            case Horizontal: out.push_back({to_local(lo, k), to_local(hi, k)}); break;
            case Vertical: out.push_back({to_local(k, lo), to_local(k, hi)}); break;
            case Diagonal: out.push_back({to_local(lo, lo - k), to_local(hi, hi - k)}); break;
            default: out.push_back({to_local(lo, k - lo), to_local(hi, k - hi)}); break;
            }
        }
    }
    return out;
}

/// Free cells with at least one Free and at least one Unknown 4-neighbour.
/// Returned as sorted row-major indices.
inline std::vector<std::size_t> detect_frontier_cells(const OccupancyGrid& grid)
{
    std::vector<std::size_t> out;
    constexpr int dr[4] = {-1, 1, 0, 0};
    constexpr int dc[4] = {0, 0, -1, 1};
    for (int r = 0; r < grid.rows(); ++r) {
        for (int c = 0; c < grid.cols(); ++c) {
            if (grid.at(r, c) != CellLabel::Free) continue;
            bool has_free = false, has_unknown = false;
            for (int k = 0; k < 4; ++k) {
                const int rr = r + dr[k], cc = c + dc[k];
                if (!grid.in_bounds(rr, cc)) continue;
                has_free |= grid.at(rr, cc) == CellLabel::Free;
                has_unknown |= grid.at(rr, cc) == CellLabel::Unknown;
            }
            if (has_free && has_unknown) out.push_back(grid.index(r, c));
        }
    }
    return out;
}

inline constexpr int kNoise = -1;

/// DBSCAN labels: cluster id >= 0 or kNoise. `min_pts` counts the point itself.
inline std::vector<int> dbscan(std::span<const Point> points, double eps, std::size_t min_pts)
{
    const std::size_t n = points.size();
    std::vector<int> labels(n, kNoise);
    std::vector<bool> visited(n, false);
    auto neighbours = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j)
            if (distance(points[i], points[j]) <= eps) out.push_back(j);
        return out;
    };

    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (visited[i]) continue;
        visited[i] = true;
        auto seeds = neighbours(i);
        if (seeds.size() < min_pts) continue;
        labels[i] = cluster;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const std::size_t j = seeds[k];
            if (labels[j] == kNoise) labels[j] = cluster;
            if (visited[j]) continue;
            visited[j] = true;
            auto more = neighbours(j);
            if (more.size() >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
        }
        ++cluster;
    }
    return labels;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Point centroid(std::span<const Point> pts)
{
    Point c;
    for (Point p : pts) c = c + p;
    return (1.0 / static_cast<double>(pts.size())) * c;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding. Returns the centroid index of
/// every point; ties go to the lowest centroid index.
inline std::vector<std::size_t> kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                                       int max_iterations = 20)
{
    const std::size_t n = points.size();
    std::vector<std::size_t> assign(n, 0);
    if (n == 0 || k <= 1) return assign;
    k = std::min(k, n);

    std::mt19937_64 rng(seed);
    std::vector<Point> centers{points[rng() % n]};
    std::vector<double> d2(n);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = INFINITY;
            for (Point c : centers) best = std::min(best, dot(points[i] - c, points[i] - c));
            d2[i] = best;
            total += best;
        }
        if (total == 0.0) break;
        double u = detail::unit_double(rng) * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (u < d2[i]) {
                pick = i;
                break;
            }
            u -= d2[i];
        }
        centers.push_back(points[pick]);
    }

    for (int it = 0; it < max_iterations; ++it) {
        bool changed = it == 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = INFINITY;
            for (std::size_t c = 0; c < centers.size(); ++c) {
                const double d = dot(points[i] - centers[c], points[i] - centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) changed = true;
            assign[i] = best;
        }
        if (!changed) break;
        std::vector<Point> sums(centers.size());
        std::vector<std::size_t> counts(centers.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums[assign[i]] = sums[assign[i]] + points[i];
            ++counts[assign[i]];
        }
        // Empty clusters keep their previous centre.
        for (std::size_t c = 0; c < centers.size(); ++c)
            if (counts[c] > 0) centers[c] = (1.0 / static_cast<double>(counts[c])) * sums[c];
    }
    return assign;
}

struct FrontierCluster {
    /// Sorted row-major cell indices.
    std::vector<std::size_t> cells;
    /// Representative cell: the member closest to the member centroid.
    std::size_t location = 0;

    std::size_t size() const { return cells.size(); }
};

struct ClusterConfig {
    double eps = 1.5;
    std::size_t min_pts = 3;
    std::size_t min_size = 3;
    std::size_t max_size = 30;
    int edge_margin = 5;
};

namespace detail {

inline Point cell_point(std::size_t index, int cols)
{
    return {static_cast<double>(index % static_cast<std::size_t>(cols)),
            static_cast<double>(index / static_cast<std::size_t>(cols))};
}

inline std::uint64_t centroid_seed(Point c)
{
    return splitmix64(std::bit_cast<std::uint64_t>(c.x) ^ splitmix64(std::bit_cast<std::uint64_t>(c.y)));
}

}  // namespace detail

/// Member cell closest to the average member location; ties go to the lowest index.
inline std::size_t cluster_location(std::span<const std::size_t> cells, int cols)
{
    std::vector<Point> pts;
    for (auto i : cells) pts.push_back(detail::cell_point(i, cols));
    const Point c = detail::centroid(pts);
    std::size_t best = cells.front();
    double best_d = INFINITY;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const double d = distance(pts[k], c);
        if (d < best_d || (d == best_d && cells[k] < best)) {
            best_d = d;
            best = cells[k];
        }
    }
    return best;
}

/// Split a cluster into ceil(size / max_size) k-means pieces. The pieces
/// partition the input cells; empty pieces are dropped.
inline std::vector<std::vector<std::size_t>> split_cluster(std::span<const std::size_t> cells, int cols,
                                                           std::size_t max_size)
{
    if (cells.size() <= max_size) return {std::vector<std::size_t>(cells.begin(), cells.end())};
    std::vector<Point> pts;
    for (auto i : cells) pts.push_back(detail::cell_point(i, cols));
    const std::size_t k = (cells.size() + max_size - 1) / max_size;
    const auto assign = kmeans(pts, k, detail::centroid_seed(detail::centroid(pts)));
    std::vector<std::vector<std::size_t>> pieces(k);
    for (std::size_t i = 0; i < cells.size(); ++i) pieces[assign[i]].push_back(cells[i]);
    std::erase_if(pieces, [](const auto& p) { return p.empty(); });
    for (auto& p : pieces) std::sort(p.begin(), p.end());
    return pieces;
}

/// Group frontier cells with DBSCAN, split oversized groups with k-means and
/// keep the clusters eligible for evaluation (size and edge-distance rules).
inline std::vector<FrontierCluster> cluster_frontiers(std::span<const std::size_t> frontier, int rows, int cols,
                                                      const ClusterConfig& cfg = {})
{
    std::vector<Point> pts;
    for (auto i : frontier) pts.push_back(detail::cell_point(i, cols));
    const auto labels = dbscan(pts, cfg.eps, cfg.min_pts);
    const int n_clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(std::max(n_clusters, 0)));
    for (std::size_t i = 0; i < frontier.size(); ++i)
        if (labels[i] != kNoise) groups[static_cast<std::size_t>(labels[i])].push_back(frontier[i]);

    std::vector<FrontierCluster> out;
    for (auto& g : groups) {
        if (g.size() < cfg.min_size) continue;
        std::sort(g.begin(), g.end());
        for (auto& piece : split_cluster(g, cols, cfg.max_size)) {
            if (piece.size() < cfg.min_size) continue;
            FrontierCluster fc{std::move(piece), 0};
            fc.location = cluster_location(fc.cells, cols);
            const int r = static_cast<int>(fc.location / static_cast<std::size_t>(cols));
            const int c = static_cast<int>(fc.location % static_cast<std::size_t>(cols));
            const int edge = std::min({r, c, rows - 1 - r, cols - 1 - c});
            if (edge < cfg.edge_margin) continue;
            out.push_back(std::move(fc));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.location < b.location; });
    return out;
}

inline std::vector<FrontierCluster> cluster_frontiers(const OccupancyGrid& grid, const ClusterConfig& cfg = {})
{
    const auto cells = detect_frontier_cells(grid);
    return cluster_frontiers(cells, grid.rows(), grid.cols(), cfg);
}

}  // namespace forge
