#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "forge/geometry.hpp"

namespace forge {

enum class SegmentCategory { Wall, Door, Window };

struct CategoryTraits {
    bool transparent;
    bool passable;
};

constexpr CategoryTraits traits(SegmentCategory c)
{
    switch (c) {
    case SegmentCategory::Door: return {true, true};
    case SegmentCategory::Window: return {true, false};
    case SegmentCategory::Wall: break;
    }
    return {false, false};
}

inline std::string_view to_string(SegmentCategory c)
{
    switch (c) {
    case SegmentCategory::Door: return "door";
    case SegmentCategory::Window: return "window";
    case SegmentCategory::Wall: break;
    }
    return "wall";
}

/// Raised when a floor-plan document is malformed or fails validation.
class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LabeledSegment {
    Segment segment;
    SegmentCategory category = SegmentCategory::Wall;
    bool exterior = false;  // only meaningful for windows

    friend bool operator==(const LabeledSegment&, const LabeledSegment&) = default;
};

/// A room polygon. `vertices` is closed: front() == back(), and
/// edge_categories[i] labels the edge vertices[i] -> vertices[i + 1].
struct Room {
    std::vector<Point> vertices;
    std::vector<SegmentCategory> edge_categories;

    std::size_t edge_count() const { return edge_categories.size(); }
    Segment edge(std::size_t i) const { return {vertices[i], vertices[i + 1]}; }
};

struct RawFloorPlan {
    std::vector<Room> rooms;
    /// Segments that do not belong to a room polygon, e.g. inserted doorway walls.
    std::vector<LabeledSegment> extra_segments;
    /// Quadrilaterals spanned by matched door pairs (closed polygons).
    std::vector<std::vector<Point>> doorways;
};

/// Which window segments stop LIDAR rays.
enum class WindowTermination { Exterior, None, All };

struct FloorPlan {
    std::vector<LabeledSegment> segments;
    /// Closed outer boundary of the union of rooms (front() == back()).
    std::vector<Point> perimeter;
    std::vector<std::vector<Point>> rooms;
    std::vector<std::vector<Point>> doorways;
    /// Zero-length segments dropped during canonicalization.
    std::size_t dropped_segments = 0;

    SegmentSet select(auto&& predicate) const
    {
        SegmentSet out;
        for (const auto& s : segments)
            if (predicate(s)) out.push_back(s.segment);
        return out;
    }

    SegmentSet impassable() const
    {
        return select([](const LabeledSegment& s) { return !traits(s.category).passable; });
    }

    SegmentSet nontransparent() const
    {
        return select([](const LabeledSegment& s) { return !traits(s.category).transparent; });
    }

    /// Segments that terminate sensor rays: walls plus the selected windows.
    SegmentSet termination_set(WindowTermination mode = WindowTermination::Exterior) const
    {
        return select([mode](const LabeledSegment& s) {
            if (s.category == SegmentCategory::Wall) return true;
            if (s.category != SegmentCategory::Window) return false;
            return mode == WindowTermination::All ||
                   (mode == WindowTermination::Exterior && s.exterior);
        });
    }

    SegmentSet exterior_windows() const
    {
        return select([](const LabeledSegment& s) {
            return s.category == SegmentCategory::Window && s.exterior;
        });
    }

    /// True if `p` lies inside some room or matched doorway.
    bool contains(Point p) const
    {
        for (const auto& r : rooms)
            if (point_in_polygon(p, r)) return true;
        for (const auto& d : doorways)
            if (point_in_polygon(p, d)) return true;
        return false;
    }
};

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

inline SegmentCategory parse_category(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_string()) throw PlanError(where + ": category must be a string");
    const auto s = j.get<std::string>();
    if (s == "wall") return SegmentCategory::Wall;
    if (s == "door") return SegmentCategory::Door;
    if (s == "window") return SegmentCategory::Window;
    throw PlanError(where + ": unknown category \"" + s + "\" (expected wall, door or window)");
}

inline Point parse_point(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw PlanError(where + ": expected [x, y] number pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Parse the floor-plan JSON document
/// `{"rooms": [{"vertices": [[x,y],...], "edge_categories": [...]}]}`.
/// The returned polygons are closed and every edge carries one category.
inline RawFloorPlan parse_floorplan(std::string_view document)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw PlanError("line " + std::to_string(detail::line_of_offset(document, e.byte)) +
                        ": malformed JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("rooms") || !doc["rooms"].is_array())
        throw PlanError("document: missing \"rooms\" array");

    RawFloorPlan plan;
    const auto& rooms = doc["rooms"];
    for (std::size_t r = 0; r < rooms.size(); ++r) {
        const std::string where = "rooms[" + std::to_string(r) + "]";
        const auto& jr = rooms[r];
        if (!jr.is_object() || !jr.contains("vertices") || !jr["vertices"].is_array())
            throw PlanError(where + ": missing \"vertices\" array");
        if (!jr.contains("edge_categories") || !jr["edge_categories"].is_array())
            throw PlanError(where + ": missing \"edge_categories\" array");

        Room room;
        for (std::size_t i = 0; i < jr["vertices"].size(); ++i)
            room.vertices.push_back(detail::parse_point(
                jr["vertices"][i], where + ".vertices[" + std::to_string(i) + "]"));
        if (room.vertices.size() >= 2 && room.vertices.front() == room.vertices.back())
            room.vertices.pop_back();
        if (room.vertices.size() < 3)
            throw PlanError(where + ".vertices: a room needs at least 3 distinct vertices");

        const auto& cats = jr["edge_categories"];
        if (cats.size() != room.vertices.size())
            throw PlanError(where + ".edge_categories: expected " +
                            std::to_string(room.vertices.size()) + " entries, got " +
                            std::to_string(cats.size()));
        for (std::size_t i = 0; i < cats.size(); ++i)
            room.edge_categories.push_back(detail::parse_category(
                cats[i], where + ".edge_categories[" + std::to_string(i) + "]"));
        room.vertices.push_back(room.vertices.front());
        plan.rooms.push_back(std::move(room));
    }
    return plan;
}

inline nlohmann::json to_json(const RawFloorPlan& plan)
{
    nlohmann::json rooms = nlohmann::json::array();
    for (const auto& room : plan.rooms) {
        nlohmann::json verts = nlohmann::json::array();
        for (std::size_t i = 0; i + 1 < room.vertices.size(); ++i)
            verts.push_back({room.vertices[i].x, room.vertices[i].y});
        nlohmann::json cats = nlohmann::json::array();
        for (auto c : room.edge_categories) cats.push_back(std::string(to_string(c)));
        rooms.push_back({{"vertices", verts}, {"edge_categories", cats}});
    }
    return {{"rooms", rooms}};
}

/// Insert wall segments between matched door pairs so that doorways become
/// closed quadrilaterals. Doors are matched greedily by the smallest
/// ‖uu'‖ + ‖vv'‖ over both endpoint pairings; ties go to the lower indices.
inline RawFloorPlan close_doorways(RawFloorPlan plan, double max_gap = 2.0)
{
    std::vector<Segment> doors;
    for (const auto& room : plan.rooms)
        for (std::size_t i = 0; i < room.edge_count(); ++i)
            if (room.edge_categories[i] == SegmentCategory::Door) doors.push_back(room.edge(i));
    for (const auto& s : plan.extra_segments)
        if (s.category == SegmentCategory::Door) doors.push_back(s.segment);

    struct Candidate {
        double cost;
        std::size_t i, j;
        bool flipped;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < doors.size(); ++i) {
        for (std::size_t j = i + 1; j < doors.size(); ++j) {
            const double straight = distance(doors[i].a, doors[j].a) + distance(doors[i].b, doors[j].b);
            const double flipped = distance(doors[i].a, doors[j].b) + distance(doors[i].b, doors[j].a);
            candidates.push_back(flipped < straight ? Candidate{flipped, i, j, true}
                                                    : Candidate{straight, i, j, false});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& l, const auto& r) {
        return std::tie(l.cost, l.i, l.j) < std::tie(r.cost, r.i, r.j);
    });

    std::vector<bool> matched(doors.size(), false);
    for (const auto& c : candidates) {
        if (c.cost >= max_gap) break;
        if (matched[c.i] || matched[c.j]) continue;
        matched[c.i] = matched[c.j] = true;
        const Segment& d = doors[c.i];
        const Point u2 = c.flipped ? doors[c.j].b : doors[c.j].a;
        const Point v2 = c.flipped ? doors[c.j].a : doors[c.j].b;
        plan.extra_segments.push_back({{d.a, u2}, SegmentCategory::Wall});
        plan.extra_segments.push_back({{d.b, v2}, SegmentCategory::Wall});
        plan.doorways.push_back({d.a, d.b, v2, u2, d.a});
    }
    return plan;
}

/// Outer boundary of the union of the room polygons: the boundary cycle
/// enclosing the largest area. Returned closed (front() == back()).
inline std::vector<Point> compute_perimeter(const std::vector<std::vector<Point>>& rooms)
{
    std::vector<Segment> edges;
    for (const auto& r : rooms)
        for (std::size_t i = 0; i + 1 < r.size(); ++i)
            if (r[i] != r[i + 1]) edges.push_back({r[i], r[i + 1]});

    auto inside_any = [&rooms](Point p) {
        for (const auto& r : rooms)
            if (point_in_polygon(p, r)) return true;
        return false;
    };

    constexpr double kSnap = 1e-3;
    constexpr double kSide = 5e-3;
    std::vector<Segment> boundary;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Segment& e = edges[i];
        const double len = e.length();
        std::vector<double> cuts{0.0, 1.0};
        for (std::size_t j = 0; j < edges.size(); ++j) {
            if (j == i) continue;
            if (auto t = segment_intersection_param(e, edges[j])) cuts.push_back(*t);
            for (Point p : {edges[j].a, edges[j].b}) {
                if (point_segment_distance(p, e) > kSnap) continue;
                cuts.push_back(dot(p - e.a, e.b - e.a) / (len * len));
            }
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double t0 = std::clamp(cuts[k], 0.0, 1.0);
            const double t1 = std::clamp(cuts[k + 1], 0.0, 1.0);
            if ((t1 - t0) * len < kSnap) continue;
            const Segment piece{e.at(t0), e.at(t1)};
            const Point dir = (1.0 / piece.length()) * (piece.b - piece.a);
            const Point left{-dir.y, dir.x};
            const bool in_left = inside_any(piece.midpoint() + kSide * left);
            const bool in_right = inside_any(piece.midpoint() - kSide * left);
            if (in_left == in_right) continue;
            boundary.push_back(in_left ? piece : Segment{piece.b, piece.a});
        }
    }

    // Chain the counter-clockwise oriented pieces into cycles.
    std::vector<bool> used(boundary.size(), false);
    std::vector<Point> best;
    double best_area = 0.0;
    for (std::size_t start = 0; start < boundary.size(); ++start) {
        if (used[start]) continue;
        std::vector<Point> cycle{boundary[start].a};
        used[start] = true;
        Point cursor = boundary[start].b;
        bool closed = false;
        for (std::size_t guard = 0; guard <= boundary.size(); ++guard) {
            if (distance(cursor, cycle.front()) < kSnap) {
                closed = true;
                break;
            }
            cycle.push_back(cursor);
            std::size_t next = boundary.size();
            for (std::size_t k = 0; k < boundary.size(); ++k) {
                if (!used[k] && distance(boundary[k].a, cursor) < kSnap) {
                    next = k;
                    break;
                }
            }
            if (next == boundary.size()) break;
            used[next] = true;
            cursor = boundary[next].b;
        }
        if (!closed || cycle.size() < 3) continue;
        const double area = signed_area(cycle);
        if (area > best_area) {
            best_area = area;
            best = std::move(cycle);
        }
    }
    if (!best.empty()) best.push_back(best.front());
    return best;
}

namespace detail {

constexpr double kVertexMergeTolerance = 1e-3;
constexpr double kCollinearAngle = 0.1 * std::numbers::pi / 180.0;

inline Segment lex_ordered(Segment s)
{
    if (s.b < s.a) std::swap(s.a, s.b);
    return s;
}

/// Replace every endpoint by the lexicographically smallest endpoint of its
/// 1 mm connected cluster.
inline void merge_vertices(std::vector<LabeledSegment>& segs)
{
    std::vector<Point> pts;
    for (const auto& s : segs) {
        pts.push_back(s.segment.a);
        pts.push_back(s.segment.b);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::vector<std::size_t> parent(pts.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    // Points are x-sorted, so candidates lie in a sliding window.
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size() && pts[j].x - pts[i].x <= kVertexMergeTolerance; ++j) {
            if (distance(pts[i], pts[j]) <= kVertexMergeTolerance) {
                const std::size_t a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    auto snap = [&](Point p) {
        const auto it = std::lower_bound(pts.begin(), pts.end(), p);
        return pts[find(static_cast<std::size_t>(it - pts.begin()))];
    };
    for (auto& s : segs) {
        s.segment.a = snap(s.segment.a);
        s.segment.b = snap(s.segment.b);
    }
}

inline bool collinear(const Segment& s, const Segment& t)
{
    if (line_angle(s.b - s.a, t.b - t.a) > kCollinearAngle) return false;
    const Segment line = s;
    const Point d = line.b - line.a;
    const double len = norm(d);
    auto line_dist = [&](Point p) { return std::abs(cross(d, p - line.a)) / len; };
    return line_dist(t.a) <= kVertexMergeTolerance && line_dist(t.b) <= kVertexMergeTolerance;
}

/// Join overlapping collinear segments of equal category. Segments that only
/// touch at an endpoint are left to corner removal.
inline bool join_overlaps(std::vector<LabeledSegment>& segs)
{
    bool any = false;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t j = i + 1; j < segs.size();) {
            const Segment& s = segs[i].segment;
            const Segment& t = segs[j].segment;
            if (segs[i].category != segs[j].category || !collinear(s, t)) {
                ++j;
                continue;
            }
            const Point dir = (1.0 / s.length()) * (s.b - s.a);
            auto proj = [&](Point p) { return dot(p - s.a, dir); };
            const double s0 = 0.0, s1 = s.length();
            const double t0 = std::min(proj(t.a), proj(t.b));
            const double t1 = std::max(proj(t.a), proj(t.b));
            const double overlap = std::min(s1, t1) - std::max(s0, t0);
            if (overlap <= kVertexMergeTolerance) {
                ++j;
                continue;
            }
            std::array<Point, 4> ends{s.a, s.b, t.a, t.b};
            const auto [lo, hi] = std::minmax_element(
                ends.begin(), ends.end(), [&](Point p, Point q) { return proj(p) < proj(q); });
            segs[i].segment = {*lo, *hi};
            segs[i].exterior = segs[i].exterior || segs[j].exterior;
            segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(j));
            any = true;
            j = i + 1;
        }
    }
    return any;
}

/// Remove vertices with exactly two incident segments that continue straight
/// through them with the same category.
inline bool remove_straight_vertices(std::vector<LabeledSegment>& segs)
{
    std::map<Point, std::vector<std::size_t>> incident;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        incident[segs[i].segment.a].push_back(i);
        incident[segs[i].segment.b].push_back(i);
    }
    for (const auto& [v, ids] : incident) {
        if (ids.size() != 2 || ids[0] == ids[1]) continue;
        const auto& s1 = segs[ids[0]];
        const auto& s2 = segs[ids[1]];
        if (s1.category != s2.category) continue;
        const Point u = s1.segment.a == v ? s1.segment.b : s1.segment.a;
        const Point w = s2.segment.a == v ? s2.segment.b : s2.segment.a;
        if (dot(u - v, w - v) >= 0.0) continue;
        if (line_angle(u - v, w - v) > kCollinearAngle) continue;
        if (point_segment_distance(v, {u, w}) > kVertexMergeTolerance) continue;
        LabeledSegment joined{{u, w}, s1.category, s1.exterior || s2.exterior};
        const std::size_t hi = std::max(ids[0], ids[1]);
        const std::size_t lo = std::min(ids[0], ids[1]);
        segs[lo] = joined;
        segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(hi));
        return true;
    }
    return false;
}

}  // namespace detail

/// Bring a segment soup into canonical form: vertices within 1 mm merged,
/// zero-length segments dropped, overlapping collinear segments joined and
/// non-corner vertices removed. Rows are vertex-ordered and sorted.
inline FloorPlan canonicalize(std::vector<LabeledSegment> segs)
{
    FloorPlan plan;
    detail::merge_vertices(segs);
    std::erase_if(segs, [&plan](const LabeledSegment& s) {
        if (s.segment.a != s.segment.b) return false;
        ++plan.dropped_segments;
        return true;
    });
    while (detail::join_overlaps(segs) || detail::remove_straight_vertices(segs)) {
    }
    for (auto& s : segs) s.segment = detail::lex_ordered(s.segment);
    std::sort(segs.begin(), segs.end(), [](const LabeledSegment& l, const LabeledSegment& r) {
        return std::tie(l.segment.a, l.segment.b, l.category) <
               std::tie(r.segment.a, r.segment.b, r.category);
    });
    plan.segments = std::move(segs);
    return plan;
}

inline FloorPlan canonicalize(const RawFloorPlan& raw)
{
    std::vector<LabeledSegment> segs;
    for (const auto& room : raw.rooms)
        for (std::size_t i = 0; i < room.edge_count(); ++i)
            segs.push_back({room.edge(i), room.edge_categories[i]});
    segs.insert(segs.end(), raw.extra_segments.begin(), raw.extra_segments.end());

    FloorPlan plan = canonicalize(std::move(segs));
    for (const auto& room : raw.rooms) plan.rooms.push_back(room.vertices);
    plan.doorways = raw.doorways;
    plan.perimeter = compute_perimeter(plan.rooms);
    return plan;
}

/// Flag windows whose two vertices both lie within `threshold` of the perimeter.
inline FloorPlan classify_exterior_windows(FloorPlan plan, double threshold = 0.1)
{
    for (auto& s : plan.segments) {
        s.exterior = s.category == SegmentCategory::Window &&
                     point_polyline_distance(s.segment.a, plan.perimeter) <= threshold &&
                     point_polyline_distance(s.segment.b, plan.perimeter) <= threshold;
    }
    return plan;
}

/// Full ingest: doorway closure, canonicalization and exterior-window labels.
inline FloorPlan prepare_floorplan(const RawFloorPlan& raw)
{
    return classify_exterior_windows(canonicalize(close_doorways(raw)));
}

inline nlohmann::json to_json(const FloorPlan& plan)
{
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : plan.segments) {
        segs.push_back({{"a", {s.segment.a.x, s.segment.a.y}},
                        {"b", {s.segment.b.x, s.segment.b.y}},
                        {"category", std::string(to_string(s.category))},
                        {"exterior", s.exterior}});
    }
    nlohmann::json perim = nlohmann::json::array();
    for (Point p : plan.perimeter) perim.push_back({p.x, p.y});
    return {{"segments", segs}, {"perimeter", perim}, {"dropped_segments", plan.dropped_segments}};
}

}  // namespace forge
