#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "forge/floorplan.hpp"
#include "forge/geometry.hpp"
#include "forge/mapops.hpp"
#include "forge/occupancy.hpp"

namespace forge {

struct LidarRay {
    /// Hit point, or the point at maximum range for a miss.
    Point end;
    bool hit = false;
    /// Hit lies within the window tolerance of an exterior window.
    bool window = false;
};

struct LidarScan {
    Point origin;
    double max_range = 0.0;
    /// One entry per ray, uniformly spaced over 360 degrees starting at +x.
    std::vector<LidarRay> rays;

    std::size_t hit_count() const
    {
        return static_cast<std::size_t>(std::count_if(rays.begin(), rays.end(), [](const auto& r) { return r.hit; }));
    }
};

inline constexpr double kWindowHitTolerance = 0.01;

/// Cast `n_rays` rays from `origin` against `occluders`. A hit within
/// kWindowHitTolerance of a segment in `windows` is flagged as a window hit.
inline LidarScan cast_scan(std::span<const Segment> occluders, Point origin, double max_range, int n_rays,
                           std::span<const Segment> windows = {})
{
    LidarScan scan{origin, max_range, {}};
    scan.rays.reserve(static_cast<std::size_t>(std::max(n_rays, 0)));
    for (int i = 0; i < n_rays; ++i) {
        const double angle = 2.0 * std::numbers::pi * i / n_rays;
        const Point dir{std::cos(angle), std::sin(angle)};
        double best = INFINITY;
        for (const auto& s : occluders)
            if (auto t = ray_segment_intersection(origin, dir, s); t && *t < best) best = *t;
        LidarRay ray;
        if (best <= max_range) {
            ray.end = origin + best * dir;
            ray.hit = true;
            for (const auto& w : windows) {
                if (point_segment_distance(ray.end, w) <= kWindowHitTolerance) {
                    ray.window = true;
                    break;
                }
            }
        } else {
            ray.end = origin + max_range * dir;
        }
        scan.rays.push_back(ray);
    }
    return scan;
}

inline LidarScan cast_scan(const FloorPlan& plan, Point origin, double max_range, int n_rays = 720,
                           WindowTermination mode = WindowTermination::Exterior)
{
    const auto occluders = plan.termination_set(mode);
    const auto windows = plan.exterior_windows();
    return cast_scan(occluders, origin, max_range, n_rays, windows);
}

struct AlignmentEstimate {
    /// Robot-to-surroundings rotation in [0, pi/2).
    double alpha = 0.0;
    /// False when fewer than two neighbouring hit pairs were available.
    bool confident = false;
};

struct AlignmentConfig {
    int bins = 90;
    /// Maximum distance between consecutive hits that form a pair.
    double max_pair_distance = 0.3;
};

/// Histogram of line angles (mod 90 degrees) through neighbouring hit pairs.
/// Neighbouring means consecutive rays (cyclically) that both hit.
inline std::vector<double> alignment_histogram(std::span<const LidarScan> scans, const AlignmentConfig& cfg = {})
{
    std::vector<double> hist(static_cast<std::size_t>(cfg.bins), 0.0);
    const double quarter = std::numbers::pi / 2.0;
    for (const auto& scan : scans) {
        const std::size_t n = scan.rays.size();
        if (n < 2) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = scan.rays[i];
            const auto& b = scan.rays[(i + 1) % n];
            if (!a.hit || !b.hit) continue;
            const Point d = b.end - a.end;
            const double len = norm(d);
            if (len == 0.0 || len > cfg.max_pair_distance) continue;
            double angle = std::fmod(std::atan2(d.y, d.x), quarter);
            if (angle < 0.0) angle += quarter;
            auto bin = static_cast<int>(angle / quarter * cfg.bins);
            bin = std::clamp(bin, 0, cfg.bins - 1);
            hist[static_cast<std::size_t>(bin)] += 1.0;
        }
    }
    return hist;
}

/// Estimate the rotation that aligns the dominant wall directions with the
/// grid axes: frequency-weighted circular mean of the histogram mode and its
/// two neighbouring bins (period 90 degrees).
inline AlignmentEstimate estimate_alignment(std::span<const LidarScan> scans, const AlignmentConfig& cfg = {})
{
    const auto hist = alignment_histogram(scans, cfg);
    const auto mode = static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());
    const double quarter = std::numbers::pi / 2.0;
    const double width = quarter / cfg.bins;

    double sx = 0.0, sy = 0.0, total = 0.0;
    for (int k = -1; k <= 1; ++k) {
        const int b = ((mode + k) % cfg.bins + cfg.bins) % cfg.bins;
        const double w = hist[static_cast<std::size_t>(b)];
        // Map the 90-degree period onto the full circle.
        const double phase = 4.0 * (b + 0.5) * width;
        sx += w * std::cos(phase);
        sy += w * std::sin(phase);
        total += w;
    }
    if (total < 1.0 || (sx == 0.0 && sy == 0.0)) return {0.0, false};
    double alpha = std::atan2(sy, sx) / 4.0;
    if (alpha < 0.0) alpha += quarter;
    if (alpha >= quarter) alpha -= quarter;
    return {alpha, true};
}

inline AlignmentEstimate estimate_alignment(const LidarScan& scan, const AlignmentConfig& cfg = {})
{
    return estimate_alignment(std::span<const LidarScan>(&scan, 1), cfg);
}

/// Integrate a world-frame scan into `grid`. Traversed cells become Free and
/// hit cells Occupied (or Window for window hits); solid labels are sticky.
inline void integrate_scan(OccupancyGrid& grid, const LidarScan& scan, MarkPolicy policy = MarkPolicy::Sticky)
{
    const Point origin = grid.world_to_local(scan.origin);
    for (const auto& ray : scan.rays) {
        mark_ray(grid, origin, grid.world_to_local(ray.end), ray.hit,
                 ray.window ? CellLabel::Window : CellLabel::Occupied, policy);
    }
}

/// As above, with window hits re-derived from the plan's exterior windows.
inline void integrate_scan(OccupancyGrid& grid, LidarScan scan, const FloorPlan& plan)
{
    const auto windows = plan.exterior_windows();
    for (auto& ray : scan.rays) {
        ray.window = false;
        if (!ray.hit) continue;
        for (const auto& w : windows)
            if (point_segment_distance(ray.end, w) <= kWindowHitTolerance) ray.window = true;
    }
    integrate_scan(grid, scan);
}

struct SensorConfig {
    int grid_size = 121;
    double area = 15.0;
    double range = 4.5;
    double step = 0.8;
    int rays = 720;
    WindowTermination window_termination = WindowTermination::Exterior;
};

/// One training example: an occupancy grid with its visible and target
/// segments, all in the grid's aligned robot-centred frame.
struct Sample {
    std::string id;
    std::string plan_id;
    std::size_t step_index = 0;
    /// World pose of the robot (grid centre).
    Point pose;
    OccupancyGrid grid;
    SegmentSet visible_segments;
    SegmentSet target_segments;
    /// Poses visited so far, local frame.
    std::vector<Point> trajectory;
};

/// Render an aligned grid centred on `center` from all `scans`.
inline OccupancyGrid render_grid(const SensorConfig& cfg, Point center, double alpha, std::span<const LidarScan> scans)
{
    auto grid = OccupancyGrid::square(cfg.grid_size, cfg.area, center, alpha);
    for (const auto& s : scans) integrate_scan(grid, s);
    return grid;
}

/// Clip a segment to the axis-aligned square [-half, half]^2.
inline std::optional<Segment> clip_to_square(const Segment& s, double half)
{
    const Point d = s.b - s.a;
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {s.a.x + half, half - s.a.x, s.a.y + half, half - s.a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return std::nullopt;
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, t);
        else
            t1 = std::min(t1, t);
    }
    if (t0 >= t1) return std::nullopt;
    return Segment{s.at(t0), s.at(t1)};
}

/// Remove the parts of local-frame target segments that lie inside solid
/// cells (a piece between consecutive cell-boundary crossings is removed when
/// its midpoint is in an Occupied or Window cell). Pieces shorter than
/// `min_length` are dropped.
inline SegmentSet clip_targets(const OccupancyGrid& grid, std::span<const Segment> targets, double min_length = 0.01)
{
    SegmentSet out;
    const double half = 0.5 * grid.cols() / grid.scale();
    for (const auto& raw : targets) {
        auto clipped = clip_to_square(raw, half);
        if (!clipped) continue;
        const Segment s = *clipped;
        const Point g0 = grid.local_to_raster(s.a);
        const Point g1 = grid.local_to_raster(s.b);
        std::vector<double> cuts{0.0, 1.0};
        auto add_crossings = [&cuts](double a, double b) {
            if (a == b) return;
            const double lo = std::min(a, b), hi = std::max(a, b);
            for (double k = std::ceil(lo); k <= std::floor(hi); k += 1.0) {
                const double t = (k - a) / (b - a);
                if (t > 0.0 && t < 1.0) cuts.push_back(t);
            }
        };
        add_crossings(g0.x, g1.x);
        add_crossings(g0.y, g1.y);
        std::sort(cuts.begin(), cuts.end());

        std::optional<double> run_start;
        auto flush = [&](double t_end) {
            if (!run_start) return;
            const Segment piece{s.at(*run_start), s.at(t_end)};
            if (piece.length() >= min_length) out.push_back(piece);
            run_start.reset();
        };
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
            const auto cell = grid.cell_at(s.at(mid));
            const bool solid = cell && is_solid(grid.at(cell->row, cell->col));
            if (solid)
                flush(cuts[k]);
            else if (!run_start)
                run_start = cuts[k];
        }
        flush(1.0);
    }
    return out;
}

/// Points at arc lengths 0, step, 2 step, ... along a polyline, plus its end
/// point if that is not already included.
inline std::vector<Point> resample_polyline(std::span<const Point> poly, double step)
{
    std::vector<Point> out;
    if (poly.empty()) return out;
    out.push_back(poly.front());
    double travelled = 0.0;
    double next = step;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const Point a = poly[i], b = poly[i + 1];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        while (next <= travelled + len + 1e-9) {
            out.push_back(a + (std::min(next - travelled, len) / len) * (b - a));
            next += step;
        }
        travelled += len;
    }
    if (distance(out.back(), poly.back()) > 1e-6) out.push_back(poly.back());
    return out;
}

/// Drive the virtual sensor along `path` (world frame), producing one Sample
/// per step. Each sample's grid is re-rendered from all scans so far after
/// re-estimating the alignment from all accumulated hits.
template <typename Sink>
void simulate_trajectory(const FloorPlan& plan, std::span<const Point> path, const SensorConfig& cfg, Sink&& emit)
{
    const auto occluders = plan.termination_set(cfg.window_termination);
    const auto windows = plan.exterior_windows();
    const auto poses = resample_polyline(path, cfg.step);
    const double half = 0.5 * cfg.area;

    std::vector<LidarScan> scans;
    for (std::size_t step = 0; step < poses.size(); ++step) {
        const Point pose = poses[step];
        scans.push_back(cast_scan(occluders, pose, cfg.range, cfg.rays, windows));
        const auto alignment = estimate_alignment(scans);

        Sample sample;
        sample.step_index = step;
        sample.pose = pose;
        sample.grid = render_grid(cfg, pose, alignment.alpha, scans);
        sample.visible_segments = recover_visible_segments(sample.grid);

        SegmentSet local_targets;
        for (const auto& s : occluders) {
            const Segment local{sample.grid.world_to_local(s.a), sample.grid.world_to_local(s.b)};
            if (clip_to_square(local, half)) local_targets.push_back(local);
        }
        sample.target_segments = clip_targets(sample.grid, local_targets);
        for (std::size_t k = 0; k <= step; ++k) sample.trajectory.push_back(sample.grid.world_to_local(poses[k]));
        emit(std::move(sample));
    }
}

inline std::vector<Sample> simulate_trajectory(const FloorPlan& plan, std::span<const Point> path,
                                               const SensorConfig& cfg = {})
{
    std::vector<Sample> out;
    simulate_trajectory(plan, path, cfg, [&out](Sample s) { out.push_back(std::move(s)); });
    return out;
}

}  // namespace forge
