#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "forge/floorplan.hpp"
#include "forge/synthetic.hpp"
#include "support.hpp"

using namespace forge;
using forge::testing::make_room;
using forge::testing::rect_room;

namespace {

constexpr auto W = SegmentCategory::Wall;
constexpr auto D = SegmentCategory::Door;
constexpr auto G = SegmentCategory::Window;

std::vector<Segment> sorted_segments(const FloorPlan& p)
{
    std::vector<Segment> out;
    for (const auto& s : p.segments) out.push_back(s.segment);
    std::sort(out.begin(), out.end(), [](const Segment& l, const Segment& r) {
        return std::tie(l.a, l.b) < std::tie(r.a, r.b);
    });
    return out;
}

}  // namespace

TEST(CategoryTraits, FixedMapping)
{
    EXPECT_TRUE(traits(D).transparent);
    EXPECT_TRUE(traits(D).passable);
    EXPECT_TRUE(traits(G).transparent);
    EXPECT_FALSE(traits(G).passable);
    EXPECT_FALSE(traits(W).transparent);
    EXPECT_FALSE(traits(W).passable);
}

TEST(ParseFloorplan, MinimalRoom)
{
    const auto plan = parse_floorplan(R"({"rooms": [{"vertices": [[0,0],[4,0],[4,3],[0,3]],
        "edge_categories": ["wall","wall","wall","wall"]}]})");
    ASSERT_EQ(plan.rooms.size(), 1u);
    EXPECT_EQ(plan.rooms[0].edge_count(), 4u);
    EXPECT_EQ(plan.rooms[0].vertices.front(), plan.rooms[0].vertices.back());
    EXPECT_EQ(plan.rooms[0].vertices.size(), 5u);
}

TEST(ParseFloorplan, DoorEdge)
{
    const auto plan = parse_floorplan(R"({"rooms": [{"vertices": [[0,0],[4,0],[4,3],[2.9,3],[2,3],[0,3]],
        "edge_categories": ["wall","wall","wall","door","wall","wall"]}]})");
    const std::vector<SegmentCategory> expected{W, W, W, D, W, W};
    EXPECT_EQ(plan.rooms[0].edge_categories, expected);
    EXPECT_NEAR(plan.rooms[0].edge(3).length(), 0.9, 1e-12);
}

TEST(ParseFloorplan, AlreadyClosedPolygonIsAccepted)
{
    const auto plan = parse_floorplan(R"({"rooms": [{"vertices": [[0,0],[1,0],[1,1],[0,0]],
        "edge_categories": ["wall","wall","window"]}]})");
    EXPECT_EQ(plan.rooms[0].edge_count(), 3u);
}

TEST(ParseFloorplan, UnknownCategoryIsRejected)
{
    try {
        parse_floorplan(R"({"rooms": [{"vertices": [[0,0],[1,0],[1,1]], "edge_categories": ["wall","glass","wall"]}]})");
        FAIL() << "expected PlanError";
    } catch (const PlanError& e) {
        EXPECT_NE(std::string(e.what()).find("edge_categories[1]"), std::string::npos) << e.what();
    }
}

TEST(ParseFloorplan, MalformedJsonReportsLine)
{
    try {
        parse_floorplan("{\"rooms\": [\n  {\"vertices\": [[0,0],\n ]}");
        FAIL() << "expected PlanError";
    } catch (const PlanError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ParseFloorplan, StructuralErrors)
{
    EXPECT_THROW(parse_floorplan(R"({"room": []})"), PlanError);
    EXPECT_THROW(parse_floorplan(R"({"rooms": [{"vertices": [[0,0],[1,0]], "edge_categories": ["wall","wall"]}]})"),
                 PlanError);
    EXPECT_THROW(parse_floorplan(R"({"rooms": [{"vertices": [[0,0],[1,0],[1,1]], "edge_categories": ["wall"]}]})"),
                 PlanError);
    EXPECT_THROW(parse_floorplan(R"({"rooms": [{"vertices": [[0,0],[1,"a"],[1,1]],
        "edge_categories": ["wall","wall","wall"]}]})"),
                 PlanError);
}

TEST(ParseFloorplan, JsonRoundTrip)
{
    RawFloorPlan raw;
    raw.rooms.push_back(make_room({{0, 0}, {4, 0}, {4, 3}, {0, 3}}, {W, G, D, W}));
    const auto again = parse_floorplan(to_json(raw).dump());
    ASSERT_EQ(again.rooms.size(), 1u);
    EXPECT_EQ(again.rooms[0].vertices, raw.rooms[0].vertices);
    EXPECT_EQ(again.rooms[0].edge_categories, raw.rooms[0].edge_categories);
}

TEST(CloseDoorways, ParallelDoorsGetJambs)
{
    RawFloorPlan raw;
    raw.extra_segments = {{{{0, 0}, {1, 0}}, D}, {{{0, 0.3}, {1, 0.3}}, D}};
    const auto closed = close_doorways(raw);
    ASSERT_EQ(closed.extra_segments.size(), 4u);
    EXPECT_EQ(closed.extra_segments[2].category, W);
    EXPECT_EQ(closed.extra_segments[2].segment.a, (Point{0, 0}));
    EXPECT_EQ(closed.extra_segments[2].segment.b, (Point{0, 0.3}));
    EXPECT_EQ(closed.extra_segments[3].segment.a, (Point{1, 0}));
    EXPECT_EQ(closed.extra_segments[3].segment.b, (Point{1, 0.3}));
    ASSERT_EQ(closed.doorways.size(), 1u);
    EXPECT_NEAR(std::abs(signed_area(std::span(closed.doorways[0]).first(4))), 0.3, 1e-12);
}

TEST(CloseDoorways, ReversedDoorIsPairedEndToEnd)
{
    RawFloorPlan raw;
    raw.extra_segments = {{{{0, 0}, {1, 0}}, D}, {{{1, 0.3}, {0, 0.3}}, D}};
    const auto closed = close_doorways(raw);
    ASSERT_EQ(closed.extra_segments.size(), 4u);
    EXPECT_NEAR(closed.extra_segments[2].segment.length(), 0.3, 1e-12);
    EXPECT_NEAR(closed.extra_segments[3].segment.length(), 0.3, 1e-12);
}

TEST(CloseDoorways, DistantDoorsUntouched)
{
    RawFloorPlan raw;
    raw.extra_segments = {{{{0, 0}, {1, 0}}, D}, {{{0, 3}, {1, 3}}, D}};
    const auto closed = close_doorways(raw);
    EXPECT_EQ(closed.extra_segments.size(), 2u);
    EXPECT_TRUE(closed.doorways.empty());
}

TEST(CloseDoorways, NoDoorsIsIdentity)
{
    RawFloorPlan raw;
    raw.rooms.push_back(rect_room(0, 0, 4, 3));
    const auto closed = close_doorways(raw);
    EXPECT_EQ(closed.extra_segments.size(), 0u);
    EXPECT_EQ(closed.rooms[0].vertices, raw.rooms[0].vertices);
}

TEST(CloseDoorways, AddsExactlyTwoWallsPerMatchedPair)
{
    RawFloorPlan raw;
    // Three doors: the nearest two pair up, the third stays unmatched.
    raw.extra_segments = {{{{0, 0}, {1, 0}}, D}, {{{0, 0.2}, {1, 0.2}}, D}, {{{0, 0.9}, {1, 0.9}}, D}};
    const auto closed = close_doorways(raw);
    EXPECT_EQ(closed.extra_segments.size(), 5u);
    EXPECT_EQ(closed.doorways.size(), 1u);
    EXPECT_NEAR(closed.extra_segments[3].segment.length(), 0.2, 1e-12);
}

TEST(Canonicalize, MergesNearlyIdenticalVertices)
{
    const auto plan = canonicalize(std::vector<LabeledSegment>{{{{0, 0}, {1, 0}}, W}, {{{1, 0.0005}, {2, 0}}, W}});
    ASSERT_EQ(plan.segments.size(), 1u);
    EXPECT_EQ(plan.segments[0].segment.a, (Point{0, 0}));
    EXPECT_EQ(plan.segments[0].segment.b, (Point{2, 0}));
}

TEST(Canonicalize, CornerPreserved)
{
    const auto plan = canonicalize(std::vector<LabeledSegment>{{{{0, 0}, {1, 0}}, W}, {{{1, 0}, {1, 1}}, W}});
    EXPECT_EQ(plan.segments.size(), 2u);
}

TEST(Canonicalize, EmptyPlan)
{
    const auto plan = canonicalize(std::vector<LabeledSegment>{});
    EXPECT_TRUE(plan.segments.empty());
    EXPECT_EQ(plan.dropped_segments, 0u);
}

TEST(Canonicalize, CategoryBoundaryIsKept)
{
    const auto plan = canonicalize(std::vector<LabeledSegment>{{{{0, 0}, {1, 0}}, W}, {{{1, 0}, {2, 0}}, G}});
    EXPECT_EQ(plan.segments.size(), 2u);
}

TEST(Canonicalize, OverlappingCollinearSegmentsJoin)
{
    const auto plan = canonicalize(std::vector<LabeledSegment>{{{{0, 0}, {3, 0}}, W}, {{{2, 0}, {5, 0}}, W},
                                                               {{{5, 0}, {4, 0}}, W}});
    ASSERT_EQ(plan.segments.size(), 1u);
    EXPECT_EQ(plan.segments[0].segment.a, (Point{0, 0}));
    EXPECT_EQ(plan.segments[0].segment.b, (Point{5, 0}));
}

TEST(Canonicalize, ZeroLengthSegmentsCounted)
{
    const auto plan = canonicalize(std::vector<LabeledSegment>{{{{0, 0}, {0.0004, 0}}, W}, {{{0, 0}, {1, 1}}, W}});
    EXPECT_EQ(plan.dropped_segments, 1u);
    EXPECT_EQ(plan.segments.size(), 1u);
}

TEST(Canonicalize, SharedWallOfAdjacentRoomsKeepsJunctions)
{
    RawFloorPlan raw;
    raw.rooms.push_back(rect_room(0, 0, 4, 3));
    raw.rooms.push_back(rect_room(4, 0, 8, 3));
    const auto plan = canonicalize(raw);
    // The T-junctions at (4,0) and (4,3) have three incident segments and stay.
    EXPECT_EQ(plan.segments.size(), 7u);
    EXPECT_NEAR(total_length(sorted_segments(plan)), 8 + 8 + 3 + 3 + 3, 1e-12);
}

TEST(Canonicalize, IdempotentOnSyntheticPlans)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto once = canonicalize(close_doorways(generate_floorplan(seed)));
        const auto twice = canonicalize(once.segments);
        EXPECT_EQ(sorted_segments(once), sorted_segments(twice)) << "seed " << seed;
    }
}

TEST(Canonicalize, GeometryPreservedWithinOneMillimetre)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto raw = close_doorways(generate_floorplan(seed));
        SegmentSet before;
        for (const auto& room : raw.rooms)
            for (std::size_t i = 0; i < room.edge_count(); ++i) before.push_back(room.edge(i));
        for (const auto& s : raw.extra_segments) before.push_back(s.segment);
        const auto after = sorted_segments(canonicalize(raw));
        EXPECT_LE(hausdorff_distance(before, after, 0.02), 1e-3) << "seed " << seed;
    }
}

TEST(Canonicalize, NoTwoVerticesWithinOneMillimetre)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto plan = canonicalize(close_doorways(generate_floorplan(seed)));
        std::vector<Point> vs;
        for (const auto& s : plan.segments) {
            vs.push_back(s.segment.a);
            vs.push_back(s.segment.b);
        }
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j)
                ASSERT_GT(distance(vs[i], vs[j]), 1e-3) << "seed " << seed;
    }
}

TEST(Perimeter, OuterBoundaryOfUnion)
{
    const auto perim = compute_perimeter({rect_room(0, 0, 4, 3).vertices, rect_room(4, 0, 8, 3).vertices,
                                          rect_room(0, 3, 4, 6).vertices});
    ASSERT_GE(perim.size(), 4u);
    EXPECT_EQ(perim.front(), perim.back());
    // L-shape: 8x3 plus 4x3.
    EXPECT_NEAR(std::abs(signed_area(std::span(perim).first(perim.size() - 1))), 36.0, 1e-9);
    EXPECT_NEAR(point_polyline_distance({4, 1.5}, perim), 1.5, 1e-12);
}

TEST(ExteriorWindows, Classification)
{
    RawFloorPlan raw;
    raw.rooms.push_back(make_room({{0, 0}, {2, 0}, {4, 0}, {4, 3}, {0, 3}}, {W, G, W, W, W}));
    // Glass wall across the interior, and a window hovering near the bottom wall.
    raw.extra_segments = {{{{2, 0.5}, {2, 2.5}}, G}, {{{1, 0.05}, {1.8, 0.15}}, G}};
    const auto plan = prepare_floorplan(raw);
    int exterior = 0, interior = 0;
    for (const auto& s : plan.segments) {
        if (s.category != G) {
            EXPECT_FALSE(s.exterior);
            continue;
        }
        // Oracle: brute-force distance of both endpoints to the sampled perimeter.
        const bool near = forge::testing::sampled_polyline_distance(s.segment.a, plan.perimeter) <= 0.1 &&
                          forge::testing::sampled_polyline_distance(s.segment.b, plan.perimeter) <= 0.1;
        EXPECT_EQ(s.exterior, near);
        (s.exterior ? exterior : interior)++;
    }
    EXPECT_EQ(exterior, 1);
    EXPECT_EQ(interior, 2);
}

TEST(ExteriorWindows, TerminationSets)
{
    RawFloorPlan raw;
    raw.rooms.push_back(make_room({{0, 0}, {2, 0}, {4, 0}, {4, 3}, {0, 3}}, {W, G, W, W, W}));
    raw.extra_segments = {{{{2, 0.5}, {2, 2.5}}, G}};
    const auto plan = prepare_floorplan(raw);
    const auto walls = plan.nontransparent().size();
    EXPECT_EQ(plan.termination_set(WindowTermination::None).size(), walls);
    EXPECT_EQ(plan.termination_set(WindowTermination::Exterior).size(), walls + 1);
    EXPECT_EQ(plan.termination_set(WindowTermination::All).size(), walls + 2);
    EXPECT_EQ(plan.impassable().size(), walls + 2);
}

TEST(Synthetic, PlansAreValidAndDeterministic)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = generate_floorplan(seed);
        const auto b = generate_floorplan(seed);
        EXPECT_EQ(to_json(a), to_json(b));
        const auto reparsed = parse_floorplan(to_json(a).dump());
        EXPECT_EQ(reparsed.rooms.size(), a.rooms.size());
        for (const auto& room : a.rooms)
            EXPECT_GT(signed_area(std::span(room.vertices).first(room.vertices.size() - 1)), 0.0);
    }
}
