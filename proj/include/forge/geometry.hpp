#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace forge {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
    friend auto operator<=>(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

inline Point rotate(Point p, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// A line segment from `a` to `b`. Orientation carries no meaning geometrically.
struct Segment {
    Point a;
    Point b;

    double length() const { return distance(a, b); }
    Point midpoint() const { return 0.5 * (a + b); }
    Point at(double t) const { return a + t * (b - a); }

    friend bool operator==(const Segment&, const Segment&) = default;
};

using SegmentSet = std::vector<Segment>;

inline double total_length(std::span<const Segment> segments)
{
    double sum = 0.0;
    for (const auto& s : segments) sum += s.length();
    return sum;
}

/// Closest point on `s` to `p`.
inline Point closest_point(const Segment& s, Point p)
{
    const Point d = s.b - s.a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return s.a;
    const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return s.at(t);
}

inline double point_segment_distance(Point p, const Segment& s)
{
    return distance(p, closest_point(s, p));
}

/// Distance from `p` to an open or closed polyline given by its vertices.
inline double point_polyline_distance(Point p, std::span<const Point> polyline)
{
    if (polyline.empty()) return INFINITY;
    if (polyline.size() == 1) return distance(p, polyline.front());
    double best = INFINITY;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i)
        best = std::min(best, point_segment_distance(p, {polyline[i], polyline[i + 1]}));
    return best;
}

/// Ray parameter `t` (distance along the unit direction `dir`) of the first
/// intersection of the ray with `s`, if any.
inline std::optional<double> ray_segment_intersection(Point origin, Point dir, const Segment& s)
{
    const Point e = s.b - s.a;
    const double denom = cross(dir, e);
    const Point w = s.a - origin;
    if (std::abs(denom) < 1e-15) {
        // Parallel. Collinear overlap counts as a hit at the nearest endpoint ahead.
        if (std::abs(cross(w, dir)) > 1e-12) return std::nullopt;
        const double ta = dot(s.a - origin, dir);
        const double tb = dot(s.b - origin, dir);
        if (ta < 0.0 && tb < 0.0) return std::nullopt;
        if (ta <= 0.0 || tb <= 0.0) return 0.0;
        return std::min(ta, tb);
    }
    const double t = cross(w, e) / denom;
    const double u = cross(w, dir) / denom;
    if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
    return t;
}

/// Parameters along `s` (in (0,1)) where it properly crosses or touches `other`.
inline std::optional<double> segment_intersection_param(const Segment& s, const Segment& other)
{
    const Point d = s.b - s.a;
    const Point e = other.b - other.a;
    const double denom = cross(d, e);
    if (std::abs(denom) < 1e-15) return std::nullopt;
    const Point w = other.a - s.a;
    const double t = cross(w, e) / denom;
    const double u = cross(w, d) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

/// Even-odd point-in-polygon. The polygon may or may not repeat its first vertex.
inline bool point_in_polygon(Point p, std::span<const Point> poly)
{
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = poly[i];
        const Point b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

/// Signed shoelace area; positive for counter-clockwise vertex order.
inline double signed_area(std::span<const Point> poly)
{
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point p = poly[i];
        const Point q = poly[(i + 1) % n];
        a += cross(p, q);
    }
    return 0.5 * a;
}

/// Angle between the undirected lines through two nonzero vectors, in [0, pi/2].
inline double line_angle(Point u, Point v)
{
    const double c = std::abs(dot(u, v)) / (norm(u) * norm(v));
    return std::acos(std::clamp(c, 0.0, 1.0));
}

/// Symmetric Hausdorff distance between two segment sets, approximated by
/// sampling both sets at spacing `step`.
inline double hausdorff_distance(std::span<const Segment> a, std::span<const Segment> b, double step)
{
    auto sample = [step](std::span<const Segment> set) {
        std::vector<Point> pts;
        for (const auto& s : set) {
            const int n = std::max(1, static_cast<int>(std::ceil(s.length() / step)));
            for (int i = 0; i <= n; ++i) pts.push_back(s.at(static_cast<double>(i) / n));
        }
        return pts;
    };
    auto directed = [](const std::vector<Point>& pts, std::span<const Segment> set) {
        double worst = 0.0;
        for (Point p : pts) {
            double best = INFINITY;
            for (const auto& s : set) best = std::min(best, point_segment_distance(p, s));
            worst = std::max(worst, best);
        }
        return worst;
    };
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return INFINITY;
    return std::max(directed(sample(a), b), directed(sample(b), a));
}

}  // namespace forge
