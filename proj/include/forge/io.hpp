#pragma once

#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/floorplan.hpp"
#include "forge/geometry.hpp"
#include "forge/occupancy.hpp"
#include "forge/sensor.hpp"

namespace forge {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

inline nlohmann::json segments_to_json(std::span<const Segment> segs)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : segs) out.push_back({s.a.x, s.a.y, s.b.x, s.b.y});
    return out;
}

inline SegmentSet segments_from_json(const nlohmann::json& j)
{
    SegmentSet out;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 4) throw std::runtime_error("segment must be [x, y, x', y']");
        out.push_back({{row[0].get<double>(), row[1].get<double>()}, {row[2].get<double>(), row[3].get<double>()}});
    }
    return out;
}

inline nlohmann::json points_to_json(std::span<const Point> pts)
{
    nlohmann::json out = nlohmann::json::array();
    for (Point p : pts) out.push_back({p.x, p.y});
    return out;
}

inline std::vector<Point> points_from_json(const nlohmann::json& j)
{
    std::vector<Point> out;
    for (const auto& p : j) out.push_back({p[0].get<double>(), p[1].get<double>()});
    return out;
}

/// {h, w, scale, rle: [[label, run], ...]} with labels Unknown=0, Free=1,
/// Occupied=2, Window=3 in row-major order.
inline nlohmann::json grid_to_json(const OccupancyGrid& grid)
{
    nlohmann::json rle = nlohmann::json::array();
    for (const auto& [label, run] : run_length_encode(grid)) rle.push_back({static_cast<int>(label), run});
    return {{"h", grid.rows()}, {"w", grid.cols()}, {"scale", grid.scale()}, {"rle", rle}};
}

inline OccupancyGrid grid_from_json(const nlohmann::json& j, Point center = {}, double alpha = 0.0)
{
    OccupancyGrid grid(j.at("h").get<int>(), j.at("w").get<int>(), j.at("scale").get<double>(), center, alpha);
    std::size_t i = 0;
    for (const auto& run : j.at("rle")) {
        const int label = run[0].get<int>();
        const auto count = run[1].get<std::size_t>();
        if (label < 0 || label > 3) throw std::runtime_error("grid label out of range");
        if (i + count > grid.size()) throw std::runtime_error("grid run-length data exceeds grid size");
        for (std::size_t k = 0; k < count; ++k) grid[i++] = static_cast<CellLabel>(label);
    }
    if (i != grid.size()) throw std::runtime_error("grid run-length data does not cover the grid");
    return grid;
}

inline nlohmann::json sample_to_json(const Sample& s)
{
    return {{"id", s.id},
            {"plan_id", s.plan_id},
            {"step", s.step_index},
            {"alpha_deg", rad2deg(s.grid.alpha())},
            {"pose", {s.pose.x, s.pose.y}},
            {"grid", grid_to_json(s.grid)},
            {"visible_segments", segments_to_json(s.visible_segments)},
            {"target_segments", segments_to_json(s.target_segments)},
            {"trajectory", points_to_json(s.trajectory)}};
}

inline Sample sample_from_json(const nlohmann::json& j)
{
    Sample s;
    s.id = j.at("id").get<std::string>();
    s.plan_id = j.at("plan_id").get<std::string>();
    s.step_index = j.at("step").get<std::size_t>();
    s.pose = {j.at("pose")[0].get<double>(), j.at("pose")[1].get<double>()};
    s.grid = grid_from_json(j.at("grid"), s.pose, deg2rad(j.at("alpha_deg").get<double>()));
    s.visible_segments = segments_from_json(j.at("visible_segments"));
    s.target_segments = segments_from_json(j.at("target_segments"));
    if (j.contains("trajectory")) s.trajectory = points_from_json(j.at("trajectory"));
    return s;
}

/// First line of every JSON Lines artifact: tool version and producing config.
inline nlohmann::json artifact_header(const nlohmann::json& config)
{
    return {{"forge", {{"version", kToolVersion}, {"config", config}}}};
}

inline bool is_header(const nlohmann::json& j) { return j.is_object() && j.contains("forge"); }

/// Parse a JSON Lines file, skipping blank lines and artifact headers.
inline std::vector<nlohmann::json> read_jsonl(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!is_header(j)) out.push_back(std::move(j));
    }
    return out;
}

inline std::vector<Sample> read_dataset(const std::string& path)
{
    std::vector<Sample> out;
    for (const auto& j : read_jsonl(path)) out.push_back(sample_from_json(j));
    return out;
}

}  // namespace forge
