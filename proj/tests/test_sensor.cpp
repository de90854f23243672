#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "forge/pathgen.hpp"
#include "forge/sensor.hpp"
#include "forge/synthetic.hpp"
#include "support.hpp"

using namespace forge;
using forge::testing::grid_from_rows;

namespace {

SegmentSet square_room(double half, double theta = 0.0, Point shift = {})
{
    const Point c[4] = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
    SegmentSet out;
    for (int i = 0; i < 4; ++i) out.push_back({rotate(c[i], theta) + shift, rotate(c[(i + 1) % 4], theta) + shift});
    return out;
}

double mod90_gap_deg(double a_rad, double b_deg)
{
    double d = std::fmod(rad2deg(a_rad) - b_deg, 90.0);
    if (d < 0) d += 90.0;
    return std::min(d, 90.0 - d);
}

LidarScan single_ray(Point origin, Point end, bool hit)
{
    return {origin, 10.0, {{end, hit, false}}};
}

}  // namespace

TEST(Chromatize, PseudoColorTable)
{
    EXPECT_EQ(pseudo_color(CellLabel::Unknown), (PseudoColor{-1, -1, -1}));
    EXPECT_EQ(pseudo_color(CellLabel::Free), (PseudoColor{-1, +1, -1}));
    EXPECT_EQ(pseudo_color(CellLabel::Occupied), (PseudoColor{-1, -1, +1}));
    EXPECT_EQ(pseudo_color(CellLabel::Window), (PseudoColor{+1, -1, +1}));
    std::set<PseudoColor> distinct;
    for (int l = 0; l < 4; ++l) distinct.insert(pseudo_color(static_cast<CellLabel>(l)));
    EXPECT_EQ(distinct.size(), 4u);
}

TEST(Chromatize, Rasters)
{
    auto g = OccupancyGrid::square(5, 1.0);
    for (const auto& px : chromatize(g)) EXPECT_EQ(px, (PseudoColor{-1, -1, -1}));
    g.at(2, 3) = CellLabel::Window;
    const auto img = chromatize(g);
    EXPECT_EQ(img[g.index(2, 3)], (PseudoColor{+1, -1, +1}));
    EXPECT_EQ(img[g.index(2, 2)], (PseudoColor{-1, -1, -1}));
}

TEST(OccupancyGrid, FrameConventions)
{
    const auto g = OccupancyGrid::square(121, 15.0, {3, 4}, deg2rad(30));
    EXPECT_DOUBLE_EQ(g.scale(), 121.0 / 15.0);
    const auto centre = g.cell_at({0, 0});
    ASSERT_TRUE(centre);
    EXPECT_EQ(*centre, (Cell{60, 60}));
    // Row 0 is the top row.
    EXPECT_EQ(g.cell_at({0, 7.4})->row, 0);
    EXPECT_EQ(g.cell_at({-7.4, 0})->col, 0);
    EXPECT_FALSE(g.cell_at({7.6, 0}));
    const Point p{5.5, -1.25};
    const Point back = g.world_to_local(g.local_to_world(p));
    EXPECT_NEAR(back.x, p.x, 1e-12);
    EXPECT_NEAR(back.y, p.y, 1e-12);
    const Point cc = g.cell_center(10, 20);
    EXPECT_EQ(*g.cell_at(cc), (Cell{10, 20}));
}

TEST(OccupancyGrid, RunLengthEncoding)
{
    const auto g = grid_from_rows({"??..", "##w."});
    const auto runs = run_length_encode(g);
    const std::vector<std::pair<CellLabel, std::size_t>> want{{CellLabel::Unknown, 2},
                                                              {CellLabel::Free, 2},
                                                              {CellLabel::Occupied, 2},
                                                              {CellLabel::Window, 1},
                                                              {CellLabel::Free, 1}};
    EXPECT_EQ(runs, want);
}

TEST(MarchRay, MatchesDenseSampling)
{
    const auto g = OccupancyGrid::square(21, 7.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.4, 3.4);
    for (int trial = 0; trial < 500; ++trial) {
        const Point a{u(rng), u(rng)}, b{u(rng), u(rng)};
        std::vector<Cell> visited;
        march_ray(g, a, b, [&](Cell c, bool) { visited.push_back(c); });
        // Every sampled point's cell is visited; visited cells are 4-connected steps.
        const std::set<Cell> vs(visited.begin(), visited.end());
        EXPECT_EQ(vs.size(), visited.size());
        for (int k = 0; k <= 4000; ++k) {
            const auto c = g.cell_at(a + (k / 4000.0) * (b - a));
            ASSERT_TRUE(c);
            EXPECT_TRUE(vs.contains(*c)) << "trial " << trial;
        }
        for (std::size_t i = 1; i < visited.size(); ++i)
            EXPECT_EQ(std::abs(visited[i].row - visited[i - 1].row) + std::abs(visited[i].col - visited[i - 1].col), 1);
    }
}

TEST(MarchRay, EndOnBoundaryStaysInNearCell)
{
    auto g = OccupancyGrid(3, 5, 1.0);
    // From the centre of cell (1,0) to the boundary between columns 2 and 3.
    mark_ray(g, g.cell_center(1, 0), {0.5, 0.0}, true, CellLabel::Occupied);
    EXPECT_EQ(g.at(1, 2), CellLabel::Occupied);
    EXPECT_EQ(g.at(1, 3), CellLabel::Unknown);
    EXPECT_EQ(g.at(1, 0), CellLabel::Free);
}

TEST(MarchRay, ClippedOutsideGrid)
{
    auto g = OccupancyGrid(3, 5, 1.0);
    mark_ray(g, {0.0, 0.0}, {10.0, 0.0}, true, CellLabel::Occupied);
    // Traversed part is Free, the hit is outside so no cell becomes Occupied.
    EXPECT_EQ(g.at(1, 2), CellLabel::Free);
    EXPECT_EQ(g.at(1, 4), CellLabel::Free);
    EXPECT_EQ(g.count(CellLabel::Occupied), 0u);
}

TEST(CastScan, EmptyPlanMissesEverywhere)
{
    const auto scan = cast_scan(SegmentSet{}, {0, 0}, 4.5, 720);
    ASSERT_EQ(scan.rays.size(), 720u);
    EXPECT_EQ(scan.hit_count(), 0u);
    for (const auto& r : scan.rays) EXPECT_NEAR(norm(r.end), 4.5, 1e-12);
}

TEST(CastScan, SingleWall)
{
    const SegmentSet wall{{{2, -1}, {2, 1}}};
    const auto scan = cast_scan(wall, {0, 0}, 4.5, 720);
    ASSERT_TRUE(scan.rays[0].hit);
    EXPECT_NEAR(scan.rays[0].end.x, 2.0, 1e-12);
    EXPECT_NEAR(scan.rays[0].end.y, 0.0, 1e-12);
    EXPECT_FALSE(scan.rays[360].hit);
}

TEST(CastScan, SquareRoomAnalytic)
{
    const auto scan = cast_scan(square_room(2.0), {0, 0}, 4.5, 720);
    EXPECT_EQ(scan.hit_count(), 720u);
    for (std::size_t i = 0; i < scan.rays.size(); ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / 720.0;
        const double c = std::abs(std::cos(th)), s = std::abs(std::sin(th));
        const double want = std::min(c > 0 ? 2.0 / c : INFINITY, s > 0 ? 2.0 / s : INFINITY);
        const double got = norm(scan.rays[i].end);
        EXPECT_NEAR(got, want, 1e-9);
        EXPECT_GE(got, 2.0 - 1e-12);
        EXPECT_LE(got, 2.0 * std::numbers::sqrt2 + 1e-12);
    }
}

TEST(EstimateAlignment, AxisAlignedAndRotatedRooms)
{
    const Point origin{0.3, -0.4};
    for (double deg : {0.0, 15.0, 105.0, 44.5, 89.7}) {
        const auto scan = cast_scan(square_room(2.5, deg2rad(deg)), origin, 4.5, 720);
        const auto est = estimate_alignment(scan);
        EXPECT_TRUE(est.confident);
        EXPECT_GE(est.alpha, 0.0);
        EXPECT_LT(est.alpha, std::numbers::pi / 2);
        EXPECT_LE(mod90_gap_deg(est.alpha, deg), 1.0) << deg;
    }
}

TEST(EstimateAlignment, Equivariance)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 360.0);
    const auto base = estimate_alignment(cast_scan(square_room(2.0, 0.2), {0.1, 0.2}, 4.5, 720));
    for (int i = 0; i < 20; ++i) {
        const double theta = u(rng);
        const auto rotated =
            estimate_alignment(cast_scan(square_room(2.0, 0.2 + deg2rad(theta)), rotate({0.1, 0.2}, deg2rad(theta)),
                                         4.5, 720));
        EXPECT_LE(mod90_gap_deg(rotated.alpha, rad2deg(base.alpha) + theta), 1.0) << theta;
    }
}

TEST(EstimateAlignment, TooFewHits)
{
    const SegmentSet tiny{{{2, 0}, {2, 0.001}}};
    const auto est = estimate_alignment(cast_scan(tiny, {0, 0}, 4.5, 720));
    EXPECT_FALSE(est.confident);
    EXPECT_EQ(est.alpha, 0.0);
}

TEST(IntegrateScan, SingleRay)
{
    auto g = OccupancyGrid::square(121, 15.0);
    integrate_scan(g, single_ray({0, 0}, {3, 0}, true));
    const int hit_col = static_cast<int>(std::floor(60.5 + 3.0 * 121 / 15));
    EXPECT_EQ(g.count(CellLabel::Occupied), 1u);
    EXPECT_EQ(g.at(60, hit_col), CellLabel::Occupied);
    for (int c = 60; c < hit_col; ++c) EXPECT_EQ(g.at(60, c), CellLabel::Free);
    EXPECT_EQ(g.count(CellLabel::Free), static_cast<std::size_t>(hit_col - 60));
}

TEST(IntegrateScan, WindowThreshold)
{
    const SegmentSet wall{{{3, -1}, {3, 1}}};
    for (auto [offset, want] : {std::pair{0.005, CellLabel::Window}, std::pair{0.015, CellLabel::Occupied}}) {
        const SegmentSet window{{{3 + offset, -0.5}, {3 + offset, 0.5}}};
        const auto scan = cast_scan(wall, {0, 0}, 4.5, 4, window);
        auto g = OccupancyGrid::square(121, 15.0);
        integrate_scan(g, scan);
        EXPECT_EQ(*std::max_element(g.cells().begin(), g.cells().end()), want) << offset;
    }
}

TEST(IntegrateScan, PlanDerivedWindows)
{
    RawFloorPlan raw;
    raw.rooms.push_back(forge::testing::make_room({{-2, -2}, {2, -2}, {2, 2}, {-2, 2}},
                                                  {SegmentCategory::Wall, SegmentCategory::Window,
                                                   SegmentCategory::Wall, SegmentCategory::Wall}));
    const auto plan = prepare_floorplan(raw);
    auto g = OccupancyGrid::square(121, 15.0);
    integrate_scan(g, cast_scan(plan, {0, 0}, 4.5), plan);
    EXPECT_GT(g.count(CellLabel::Window), 0u);
    EXPECT_GT(g.count(CellLabel::Occupied), 0u);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            if (g.at(r, c) == CellLabel::Window) {
                const Point p = g.cell_center(r, c);
                EXPECT_GT(p.x, 1.8);
            }
}

TEST(IntegrateScan, NoDowngradeAndOrderInsensitive)
{
    auto g = OccupancyGrid::square(121, 15.0);
    integrate_scan(g, single_ray({0, 0}, {2, 0}, true));
    const auto hit = *g.cell_at({2, 0});
    integrate_scan(g, single_ray({0, 0}, {4, 0}, true));
    EXPECT_EQ(g.at(hit.row, hit.col), CellLabel::Occupied);

    const auto a = cast_scan(square_room(2.0), {0.3, 0.1}, 4.5, 720);
    const auto b = cast_scan(square_room(2.2, 0.3), {-0.5, 0.4}, 4.5, 720);
    auto ab = OccupancyGrid::square(121, 15.0), ba = ab;
    integrate_scan(ab, a);
    integrate_scan(ab, b);
    integrate_scan(ba, b);
    integrate_scan(ba, a);
    for (std::size_t i = 0; i < ab.size(); ++i) EXPECT_EQ(is_solid(ab[i]), is_solid(ba[i]));
}

TEST(IntegrateScan, SolidCellsContainHits)
{
    const auto scan = cast_scan(square_room(2.0, 0.4), {0.2, 0.1}, 4.5, 720);
    auto g = OccupancyGrid::square(121, 15.0);
    integrate_scan(g, scan);
    std::set<Cell> hit_cells;
    for (const auto& r : scan.rays)
        if (r.hit) hit_cells.insert(*g.cell_at(r.end));
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            if (is_solid(g.at(r, c))) EXPECT_TRUE(hit_cells.contains({r, c}));
}

TEST(ClipTargets, SegmentInsideOccupiedCellsIsRemoved)
{
    const auto g = grid_from_rows({".....", "#####", "....."});
    // Local y = 0 is the middle row's centre line.
    EXPECT_TRUE(clip_targets(g, SegmentSet{{{-2.5, 0}, {2.5, 0}}}).empty());
    // A segment crossing the row keeps its two outer pieces.
    const auto pieces = clip_targets(g, SegmentSet{{{0.1, -1.5}, {0.1, 1.5}}});
    ASSERT_EQ(pieces.size(), 2u);
    EXPECT_NEAR(total_length(pieces), 2.0, 1e-12);
}

TEST(ClipTargets, PartiallyCoveredWall)
{
    const auto g = grid_from_rows({".....", "##...", "....."});
    const auto pieces = clip_targets(g, SegmentSet{{{-2.5, 0}, {2.5, 0}}});
    ASSERT_EQ(pieces.size(), 1u);
    EXPECT_NEAR(pieces[0].a.x, -0.5, 1e-12);
    EXPECT_NEAR(pieces[0].b.x, 2.5, 1e-12);
}

TEST(ResamplePolyline, StepArithmetic)
{
    const std::vector<Point> line{{0, 0}, {0.8, 0}};
    EXPECT_EQ(resample_polyline(line, 0.8).size(), 2u);
    const std::vector<Point> bent{{0, 0}, {1, 0}, {1, 1}};
    const auto pts = resample_polyline(bent, 0.8);
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_NEAR(pts[1].x, 0.8, 1e-12);
    EXPECT_NEAR(pts[2].y, 0.6, 1e-12);
    EXPECT_EQ(pts[3], (Point{1, 1}));
}

TEST(SimulateTrajectory, StraightStepGivesTwoSamples)
{
    RawFloorPlan raw;
    raw.rooms.push_back(forge::testing::rect_room(0, 0, 6, 4));
    const auto plan = prepare_floorplan(raw);
    const std::vector<Point> path{{1, 2}, {1.8, 2}};
    const auto samples = simulate_trajectory(plan, path);
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_EQ(samples[0].step_index, 0u);
    EXPECT_EQ(samples[1].pose, (Point{1.8, 2}));
    EXPECT_EQ(samples[1].trajectory.size(), 2u);
    EXPECT_EQ(samples[1].grid.rows(), 121);
    EXPECT_FALSE(samples[1].visible_segments.empty());
}

TEST(SimulateTrajectory, LCorridorKnownCountsGrowUpToRasterNoise)
{
    RawFloorPlan raw;
    raw.rooms.push_back(forge::testing::make_room({{0, 0}, {6, 0}, {6, 1.5}, {1.5, 1.5}, {1.5, 6}, {0, 6}}));
    const auto plan = prepare_floorplan(raw);
    const std::vector<Point> path{{0.75, 4.5}, {0.75, 0.75}, {4.5, 0.75}};
    const auto samples = simulate_trajectory(plan, path);
    ASSERT_GE(samples.size(), 5u);
    // Each step re-centres and re-aligns the grid, so boundary cells may rasterise differently.
    for (std::size_t i = 1; i < samples.size(); ++i)
        EXPECT_GE(1.02 * static_cast<double>(samples[i].grid.known_count()),
                  static_cast<double>(samples[i - 1].grid.known_count()))
            << "step " << i;
    EXPECT_GT(samples.back().grid.known_count(), samples.front().grid.known_count());
}

TEST(SimulateTrajectory, TargetsAvoidSolidCellInteriors)
{
    const auto plan = prepare_floorplan(generate_floorplan(4));
    const auto g = build_navgrid(plan);
    const auto w = sample_waypoints(g, 2, 4);
    const auto path = shortest_path(g, w[0], w[1]);
    for (const auto& s : simulate_trajectory(plan, path.points)) {
        for (const auto& t : s.target_segments) {
            EXPECT_GE(t.length(), 0.01);
            for (int k = 1; k < 50; ++k) {
                const Point p = t.at(k / 50.0);
                const Point rc = s.grid.local_to_raster(p);
                const bool on_edge = std::abs(rc.x - std::round(rc.x)) < 1e-6 || std::abs(rc.y - std::round(rc.y)) < 1e-6;
                const auto cell = s.grid.cell_at(p);
                if (!cell || on_edge) continue;
                EXPECT_FALSE(is_solid(s.grid.at(cell->row, cell->col)));
            }
        }
    }
}
