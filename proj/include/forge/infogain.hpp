#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "forge/floorplan.hpp"
#include "forge/mapops.hpp"
#include "forge/occupancy.hpp"
#include "forge/sensor.hpp"

namespace forge {

/// Per-cell label distribution induced by a grid: uniform for Unknown, an
/// indicator on the label otherwise.
inline std::array<double, kLabelCount> label_distribution(CellLabel l)
{
    std::array<double, kLabelCount> p{};
    if (l == CellLabel::Unknown) {
        p.fill(1.0 / static_cast<double>(kLabelCount));
    } else {
        p[static_cast<std::size_t>(l)] = 1.0;
    }
    return p;
}

class RefinementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InformationGain {
    /// Relative entropy sum in bits.
    double bits = 0.0;
    /// Unknown cells that became known.
    std::size_t cells = 0;
};

/// Information gained in `after` given `before`:
/// sum_ij,k P'(k) log2(P'(k) / P(k)). `after` must refine `before`.
inline InformationGain information_gain(const OccupancyGrid& before, const OccupancyGrid& after)
{
    if (before.rows() != after.rows() || before.cols() != after.cols())
        throw std::invalid_argument("information gain needs grids of equal shape");
    InformationGain out;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const CellLabel b = before[i], a = after[i];
        if (is_known(b) && a != b) {
            const Cell c = before.cell(i);
            throw RefinementError("cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                                  ") is known before and differs after");
        }
        const auto p = label_distribution(b);
        const auto q = label_distribution(a);
        for (std::size_t k = 0; k < kLabelCount; ++k)
            if (q[k] > 0.0) out.bits += q[k] * std::log2(q[k] / p[k]);
        if (!is_known(b) && is_known(a)) ++out.cells;
    }
    return out;
}

enum class Estimator { Naive, Predicted, Truth };

inline std::string_view to_string(Estimator e)
{
    switch (e) {
    case Estimator::Naive: return "naive";
    case Estimator::Predicted: return "predicted";
    case Estimator::Truth: break;
    }
    return "truth";
}

struct GainEstimate {
    FrontierCluster frontier;
    Estimator estimator = Estimator::Naive;
    std::size_t gain = 0;
    double bits = 0.0;
};

struct GainConfig {
    double range = 4.5;
    int rays = 720;
};

/// Scan from a frontier location against local-frame occluders, integrate
/// into a copy of the grid (Unknown cells only) and return the gain.
inline InformationGain scan_gain(const OccupancyGrid& grid, std::size_t location, std::span<const Segment> occluders,
                                 const GainConfig& cfg = {})
{
    const Cell cell = grid.cell(location);
    if (grid.at(cell.row, cell.col) != CellLabel::Free)
        throw std::invalid_argument("frontier location (" + std::to_string(cell.row) + ", " +
                                    std::to_string(cell.col) + ") is not a Free cell");
    const Point origin = grid.cell_center(cell.row, cell.col);
    const auto scan = cast_scan(occluders, origin, cfg.range, cfg.rays);
    OccupancyGrid after = grid;
    for (const auto& ray : scan.rays)
        mark_ray(after, origin, ray.end, ray.hit, CellLabel::Occupied, MarkPolicy::UnknownOnly);
    return information_gain(grid, after);
}

inline GainEstimate gain_at_frontier(const Sample& sample, const FrontierCluster& frontier,
                                     std::span<const Segment> occluders, Estimator tag, const GainConfig& cfg = {})
{
    const auto g = scan_gain(sample.grid, frontier.location, occluders, cfg);
    return {frontier, tag, g.cells, g.bits};
}

/// Ground-truth occluders of `plan` expressed in the sample grid's frame.
inline SegmentSet local_occluders(const OccupancyGrid& grid, const FloorPlan& plan,
                                  WindowTermination mode = WindowTermination::Exterior)
{
    SegmentSet out;
    for (const auto& s : plan.termination_set(mode))
        out.push_back({grid.world_to_local(s.a), grid.world_to_local(s.b)});
    return out;
}

struct FrontierGains {
    FrontierCluster frontier;
    std::size_t naive = 0;
    std::size_t predicted = 0;
    std::size_t truth = 0;
};

/// Naive (visible segments), predicted (visible plus predicted) and truth
/// (plan walls) gains for every eligible frontier of the sample.
inline std::vector<FrontierGains> estimate_all(const Sample& sample, std::span<const Segment> predicted,
                                               const FloorPlan& truth, const GainConfig& cfg = {},
                                               WindowTermination mode = WindowTermination::Exterior)
{
    std::vector<FrontierGains> out;
    const auto clusters = cluster_frontiers(sample.grid);
    if (clusters.empty()) return out;
    SegmentSet with_prediction = sample.visible_segments;
    with_prediction.insert(with_prediction.end(), predicted.begin(), predicted.end());
    const auto true_occluders = local_occluders(sample.grid, truth, mode);
    for (const auto& fc : clusters) {
        FrontierGains g{fc, 0, 0, 0};
        g.naive = scan_gain(sample.grid, fc.location, sample.visible_segments, cfg).cells;
        g.predicted = predicted.empty() ? g.naive : scan_gain(sample.grid, fc.location, with_prediction, cfg).cells;
        g.truth = scan_gain(sample.grid, fc.location, true_occluders, cfg).cells;
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace forge
