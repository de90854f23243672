#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <tuple>
#include <vector>

#include "forge/floorplan.hpp"
#include "forge/geometry.hpp"

namespace forge {

struct SyntheticPlanConfig {
    double min_width = 9.0;
    double max_width = 15.0;
    double min_height = 7.0;
    double max_height = 12.0;
    double min_room = 3.0;
    double door_width = 0.9;
    double window_probability = 0.5;
    double extra_door_probability = 0.3;
    double glass_wall_probability = 0.15;
    double drop_corner_probability = 0.3;
    bool rotate = true;
};

/// Random office-like floor plan: a rectangular (or L-shaped) building cut
/// into a grid of rectangular rooms. Adjacent rooms share walls; doors
/// connect every room; exterior walls carry windows; some interior walls
/// are glass. The whole plan is rotated by a random angle.
inline RawFloorPlan generate_floorplan(std::uint64_t seed, const SyntheticPlanConfig& cfg = {})
{
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    auto chance = [&](double p) { return uniform(0.0, 1.0) < p; };

    auto cuts = [&](double length) {
        const int max_parts = std::max(1, static_cast<int>(length / cfg.min_room));
        const int parts = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(max_parts, 3)));
        std::vector<double> xs{0.0};
        double remaining = length;
        for (int k = parts; k > 1; --k) {
            const double lo = cfg.min_room, hi = remaining - cfg.min_room * (k - 1);
            const double w = lo < hi ? uniform(lo, std::min(hi, remaining / k * 1.5)) : lo;
            xs.push_back(xs.back() + w);
            remaining -= w;
        }
        xs.push_back(length);
        return xs;
    };
    const auto xs = cuts(uniform(cfg.min_width, cfg.max_width));
    const auto ys = cuts(uniform(cfg.min_height, cfg.max_height));
    const int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1;

    std::vector<std::vector<bool>> present(static_cast<std::size_t>(nx), std::vector<bool>(static_cast<std::size_t>(ny), true));
    if (nx * ny >= 3 && chance(cfg.drop_corner_probability)) {
        present[static_cast<std::size_t>(nx - 1)][static_cast<std::size_t>(ny - 1)] = false;
    }
    auto has = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < nx && j < ny && present[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    };

    // Wall pieces keyed by (vertical?, line index, span index); features are
    // intervals in metres along the piece's increasing coordinate.
    struct Feature {
        double lo, hi;
        SegmentCategory category;
    };
    using Key = std::tuple<bool, int, int>;
    std::map<Key, std::vector<Feature>> features;
    auto piece_length = [&](const Key& k) {
        const auto& [vertical, line, span] = k;
        return vertical ? ys[static_cast<std::size_t>(span) + 1] - ys[static_cast<std::size_t>(span)]
                        : xs[static_cast<std::size_t>(span) + 1] - xs[static_cast<std::size_t>(span)];
    };
    auto add_feature = [&](const Key& k, double width, SegmentCategory cat) {
        const double len = piece_length(k);
        if (len < width + 0.6) return;
        const double lo = uniform(0.3, len - width - 0.3);
        features[k].push_back({lo, lo + width, cat});
    };

    // Interior walls between adjacent rooms, connected by a random spanning tree.
    struct Adjacency {
        int a, b;
        Key wall;
    };
    std::vector<Adjacency> adjacent;
    auto room_id = [ny](int i, int j) { return i * ny + j; };
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (!has(i, j)) continue;
            if (has(i + 1, j)) adjacent.push_back({room_id(i, j), room_id(i + 1, j), {true, i + 1, j}});
            if (has(i, j + 1)) adjacent.push_back({room_id(i, j), room_id(i, j + 1), {false, j + 1, i}});
        }
    }
    std::shuffle(adjacent.begin(), adjacent.end(), rng);
    std::vector<int> parent(static_cast<std::size_t>(nx * ny));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
        return v;
    };
    for (const auto& adj : adjacent) {
        const int ra = find(adj.a), rb = find(adj.b);
        if (ra != rb) {
            parent[static_cast<std::size_t>(ra)] = rb;
            add_feature(adj.wall, cfg.door_width, SegmentCategory::Door);
        } else if (chance(cfg.extra_door_probability)) {
            add_feature(adj.wall, cfg.door_width, SegmentCategory::Door);
        } else if (chance(cfg.glass_wall_probability)) {
            features[adj.wall].push_back({0.0, piece_length(adj.wall), SegmentCategory::Window});
        }
    }

    // Exterior windows.
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (!has(i, j)) continue;
            const std::pair<bool, Key> sides[4] = {
                {!has(i - 1, j), {true, i, j}},
                {!has(i + 1, j), {true, i + 1, j}},
                {!has(i, j - 1), {false, j, i}},
                {!has(i, j + 1), {false, j + 1, i}},
            };
            for (const auto& [exterior, key] : sides)
                if (exterior && chance(cfg.window_probability))
                    add_feature(key, uniform(1.0, 2.0), SegmentCategory::Window);
        }
    }

    auto piece_endpoints = [&](const Key& k) -> std::pair<Point, Point> {
        const auto& [vertical, line, span] = k;
        const auto l = static_cast<std::size_t>(line), s = static_cast<std::size_t>(span);
        if (vertical) return {{xs[l], ys[s]}, {xs[l], ys[s + 1]}};
        return {{xs[s], ys[l]}, {xs[s + 1], ys[l]}};
    };

    const double theta = cfg.rotate ? uniform(0.0, 2.0 * std::numbers::pi) : 0.0;
    const Point shift{uniform(-5.0, 5.0), uniform(-5.0, 5.0)};
    auto place = [&](Point p) { return rotate(p, theta) + shift; };

    RawFloorPlan plan;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (!has(i, j)) continue;
            // Counter-clockwise: bottom, right, top, left; `reversed` when the
            // walk runs against the piece's increasing coordinate.
            const std::pair<Key, bool> edges[4] = {
                {{false, j, i}, false},
                {{true, i + 1, j}, false},
                {{false, j + 1, i}, true},
                {{true, i, j}, true},
            };
            Room room;
            for (const auto& [key, reversed] : edges) {
                auto [a, b] = piece_endpoints(key);
                auto feats = features[key];
                std::sort(feats.begin(), feats.end(), [](const Feature& l, const Feature& r) { return l.lo < r.lo; });
                const double len = distance(a, b);
                std::vector<std::pair<double, SegmentCategory>> marks;  // (start offset, category)
                double cursor = 0.0;
                for (const auto& f : feats) {
                    if (f.lo > cursor) marks.emplace_back(cursor, SegmentCategory::Wall);
                    marks.emplace_back(f.lo, f.category);
                    cursor = f.hi;
                }
                if (cursor < len) marks.emplace_back(cursor, SegmentCategory::Wall);
                std::vector<std::pair<Point, SegmentCategory>> pieces;
                for (std::size_t k = 0; k < marks.size(); ++k)
                    pieces.emplace_back(a + (marks[k].first / len) * (b - a), marks[k].second);
                if (reversed) {
                    // Walk b -> a: start points become the next mark's position.
                    std::vector<std::pair<Point, SegmentCategory>> rev;
                    for (std::size_t k = pieces.size(); k-- > 0;) {
                        const Point end = k + 1 < pieces.size() ? pieces[k + 1].first : b;
                        rev.emplace_back(end, pieces[k].second);
                    }
                    pieces = std::move(rev);
                }
                for (const auto& [p, cat] : pieces) {
                    room.vertices.push_back(place(p));
                    room.edge_categories.push_back(cat);
                }
            }
            room.vertices.push_back(room.vertices.front());
            plan.rooms.push_back(std::move(room));
        }
    }
    return plan;
}

}  // namespace forge
