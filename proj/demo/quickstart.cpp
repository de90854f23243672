// Generates a floor plan, drives the virtual sensor along one path and
// compares naive and ground-truth gains at the frontiers of the last sample.

#include <cstdint>
#include <cstdlib>
#include <iostream>

#include "forge/pipeline.hpp"
#include "forge/synthetic.hpp"

int main(int argc, char** argv)
{
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    const auto plan = forge::prepare_floorplan(forge::generate_floorplan(seed));
    std::cout << "plan: " << plan.rooms.size() << " rooms, " << plan.segments.size() << " segments\n";

    forge::PipelineConfig cfg;
    cfg.waypoints = 6;
    cfg.seed = seed;
    const auto pp = forge::plan_paths(plan, "demo", cfg);
    if (pp.paths.empty()) {
        std::cout << "no path passed the filter\n";
        return 0;
    }
    const auto& path = pp.paths.front().path;
    std::cout << "path: " << path.length << " m, " << path.turns << " turns\n";

    const auto samples = forge::simulate_trajectory(plan, path.points, cfg.sensor);
    const auto& last = samples.back();
    std::cout << "samples: " << samples.size() << ", last grid known cells " << last.grid.known_count() << " of "
              << last.grid.size() << "\n";

    for (const auto& g : forge::estimate_all(last, {}, plan)) {
        const auto c = last.grid.cell(g.frontier.location);
        std::cout << "frontier (" << c.row << ", " << c.col << ") size " << g.frontier.size() << ": naive " << g.naive
                  << ", truth " << g.truth << "\n";
    }
}
