#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "forge/infogain.hpp"
#include "support.hpp"

using namespace forge;
using forge::testing::grid_from_rows;

namespace {

OccupancyGrid unknown_with_free_centre(int n = 121, double area = 15.0)
{
    auto g = OccupancyGrid::square(n, area);
    g.at(n / 2, n / 2) = CellLabel::Free;
    return g;
}

std::size_t unknown_count(const OccupancyGrid& g)
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.size(); ++i) n += g[i] == CellLabel::Unknown;
    return n;
}

}  // namespace

TEST(InformationGain, TwoBitsPerRevealedCell)
{
    const auto before = grid_from_rows({"??..", "?#??"});
    const auto after = grid_from_rows({".#..", "w#?."});
    const auto g = information_gain(before, after);
    EXPECT_EQ(g.cells, 4u);
    EXPECT_NEAR(g.bits, 8.0, 1e-12);
    EXPECT_EQ(information_gain(before, before).bits, 0.0);
}

TEST(InformationGain, RefinementViolationNamesCell)
{
    const auto before = grid_from_rows({"..", ".#"});
    const auto after = grid_from_rows({"..", ".."});
    try {
        information_gain(before, after);
        FAIL();
    } catch (const RefinementError& e) {
        EXPECT_NE(std::string(e.what()).find("(1, 1)"), std::string::npos);
    }
    EXPECT_THROW(information_gain(grid_from_rows({".."}), grid_from_rows({"...."})), std::invalid_argument);
}

TEST(ScanGain, OpenSpaceApproachesDiscArea)
{
    const auto g = unknown_with_free_centre();
    const GainConfig cfg{4.5, 720};
    const auto gain = scan_gain(g, g.index(60, 60), SegmentSet{}, cfg);
    const double s = 121.0 / 15.0;
    // Cells touched by the disc lie between the inner and outer half-diagonal bands.
    std::size_t inner = 0, outer = 0;
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            const double d = std::hypot(r - 60, c - 60);
            inner += d <= cfg.range * s - std::numbers::sqrt2 / 2;
            outer += d <= cfg.range * s + std::numbers::sqrt2 / 2;
        }
    EXPECT_GE(gain.cells + 1, inner - inner / 100);
    EXPECT_LE(gain.cells + 1, outer);
    EXPECT_NEAR(gain.bits, 2.0 * static_cast<double>(gain.cells), 1e-9);
}

TEST(ScanGain, RevealedCellsLieInsideTheRange)
{
    const auto g = unknown_with_free_centre(41, 10.0);
    const std::size_t loc = g.index(20, 20);
    const GainConfig cfg{3.0, 360};
    const Point origin = g.cell_center(20, 20);
    const auto occ = SegmentSet{{{1.2, -5}, {1.2, 5}}};
    const auto gain = scan_gain(g, loc, occ, cfg);
    // Brute force: a revealed cell must intersect the disc and not lie wholly past the wall.
    std::size_t reachable = 0;
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            const Point p = g.cell_center(r, c);
            const double half = 0.5 * g.cell_size();
            if (distance(p, origin) <= cfg.range + half * std::numbers::sqrt2 && p.x - half <= 1.2) ++reachable;
        }
    EXPECT_GT(gain.cells, 0u);
    EXPECT_LE(gain.cells, reachable);
}

TEST(ScanGain, BoundedByUnknownCount)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = OccupancyGrid::square(41, 10.0);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<CellLabel>(rng() % 3);
        g.at(20, 20) = CellLabel::Free;
        const auto gain = scan_gain(g, g.index(20, 20), SegmentSet{{{-2, 1}, {2, 1.5}}}, {3.0, 180});
        EXPECT_LE(gain.cells, unknown_count(g));
        EXPECT_EQ(scan_gain(g, g.index(20, 20), SegmentSet{{{-2, 1}, {2, 1.5}}}, {3.0, 180}).cells, gain.cells);
    }
}

TEST(ScanGain, AddingOccludersNeverIncreasesGain)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const auto g = unknown_with_free_centre(61, 10.0);
    SegmentSet occ;
    std::size_t last = scan_gain(g, g.index(30, 30), occ, {4.0, 360}).cells;
    for (int k = 0; k < 15; ++k) {
        Segment s{{u(rng), u(rng)}, {u(rng), u(rng)}};
        if (point_segment_distance({}, s) < 0.2) continue;
        occ.push_back(s);
        const auto now = scan_gain(g, g.index(30, 30), occ, {4.0, 360}).cells;
        EXPECT_LE(now, last);
        last = now;
    }
}

TEST(ScanGain, LocationMustBeFree)
{
    const auto g = OccupancyGrid::square(21, 5.0);
    try {
        scan_gain(g, g.index(3, 4), SegmentSet{});
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("(3, 4)"), std::string::npos);
    }
}

TEST(EstimateAll, PerfectPredictionMatchesTruth)
{
    // Free corridor opening into unknown space bounded by a known room.
    auto plan_room = forge::testing::rect_room(-3, -3, 3, 3);
    RawFloorPlan raw;
    raw.rooms.push_back(plan_room);
    const auto plan = prepare_floorplan(raw);

    Sample s;
    s.grid = OccupancyGrid::square(61, 10.0);
    for (int r = 25; r <= 35; ++r)
        for (int c = 20; c <= 30; ++c) s.grid.at(r, c) = CellLabel::Free;
    const auto truth_occ = local_occluders(s.grid, plan);
    const auto gains = estimate_all(s, truth_occ, plan, {4.0, 360});
    ASSERT_FALSE(gains.empty());
    for (const auto& g : gains) {
        EXPECT_EQ(g.predicted, g.truth);
        EXPECT_GE(g.naive, g.truth);
    }
}
