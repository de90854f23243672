#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "forge/evalstats.hpp"
#include "forge/floorplan.hpp"
#include "forge/infogain.hpp"
#include "forge/io.hpp"
#include "forge/mapops.hpp"
#include "forge/pathgen.hpp"
#include "forge/sensor.hpp"
#include "forge/seq.hpp"

namespace forge {

inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string_view to_string(WindowTermination m)
{
    switch (m) {
    case WindowTermination::None: return "none";
    case WindowTermination::All: return "all";
    case WindowTermination::Exterior: break;
    }
    return "exterior";
}

inline WindowTermination window_termination_from(std::string_view s)
{
    if (s == "exterior") return WindowTermination::Exterior;
    if (s == "none") return WindowTermination::None;
    if (s == "all") return WindowTermination::All;
    throw std::invalid_argument("window termination must be exterior, none or all");
}

struct PipelineConfig {
    SensorConfig sensor;
    NavGridConfig nav;
    PathFilter filter;
    std::size_t waypoints = 12;
    /// Cap on simulated paths per plan; 0 keeps every filtered pair.
    std::size_t max_paths = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    nlohmann::json to_json() const
    {
        return {{"grid_size", sensor.grid_size},
                {"area", sensor.area},
                {"range", sensor.range},
                {"step", sensor.step},
                {"rays", sensor.rays},
                {"window_termination", std::string(forge::to_string(sensor.window_termination))},
                {"resolution", nav.resolution},
                {"robot_radius", nav.robot_radius},
                {"clearance", nav.clearance},
                {"truncation", nav.truncation},
                {"cost_weight", nav.weight},
                {"min_length", filter.min_length},
                {"max_length", filter.max_length},
                {"min_turns", filter.min_turns},
                {"waypoints", waypoints},
                {"max_paths", max_paths},
                {"seed", seed}};
    }

    void validate() const
    {
        if (sensor.grid_size <= 0 || !(sensor.area > 0) || !(sensor.range > 0) || !(sensor.step > 0) ||
            sensor.rays <= 0 || waypoints == 0)
            throw std::invalid_argument("pipeline parameters must be positive");
    }
};

/// Worker count: FORGE_THREADS caps the requested value.
inline unsigned effective_threads(unsigned requested)
{
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    if (const char* env = std::getenv("FORGE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
    }
    return std::max(1u, n);
}

/// Run `task(i)` for i in [0, n) on up to `threads` workers; results keep index order.
template <typename Task>
auto parallel_map(std::size_t n, unsigned threads, Task&& task)
{
    using R = decltype(task(std::size_t{0}));
    std::vector<R> out;
    out.reserve(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(task(i));
        return out;
    }
    for (std::size_t base = 0; base < n; base += threads) {
        std::vector<std::future<R>> batch;
        for (std::size_t i = base; i < std::min(n, base + threads); ++i)
            batch.push_back(std::async(std::launch::async, task, i));
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

inline std::string plan_id_from_path(const std::string& path) { return std::filesystem::path(path).stem().string(); }

inline FloorPlan load_plan(const std::string& path) { return prepare_floorplan(parse_floorplan(read_file(path))); }

struct PlanPaths {
    NavGrid grid;
    std::vector<Point> waypoints;
    std::vector<WaypointPath> paths;
};

inline PlanPaths plan_paths(const FloorPlan& plan, const std::string& plan_id, const PipelineConfig& cfg)
{
    PlanPaths out;
    out.grid = build_navgrid(plan, cfg.nav);
    out.waypoints = sample_waypoints(out.grid, cfg.waypoints, cfg.seed ^ fnv1a(plan_id), cfg.nav.clearance);
    out.paths = generate_paths(out.grid, out.waypoints, cfg.filter);
    if (cfg.max_paths > 0 && out.paths.size() > cfg.max_paths) out.paths.resize(cfg.max_paths);
    return out;
}

inline nlohmann::json paths_to_json(const PlanPaths& pp)
{
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& wp : pp.paths) {
        paths.push_back({{"from", wp.from},
                         {"to", wp.to},
                         {"length", wp.path.length},
                         {"turns", wp.path.turns},
                         {"cost", wp.path.cost},
                         {"points", points_to_json(wp.path.points)}});
    }
    return {{"waypoints", points_to_json(pp.waypoints)}, {"paths", paths}};
}

struct SynthReport {
    std::vector<std::pair<std::string, std::size_t>> samples_per_plan;
    std::vector<std::string> failures;
    std::size_t total = 0;
};

/// Dataset synthesis: for each plan, paths between sampled waypoints are
/// driven by the virtual sensor and every step is written as a JSON line.
inline SynthReport run_synth(const PipelineConfig& cfg, const std::vector<std::string>& plan_files, std::ostream& out,
                             std::ostream& log)
{
    cfg.validate();
    SynthReport report;
    out << artifact_header(cfg.to_json()).dump() << '\n';
    const unsigned threads = effective_threads(cfg.threads);
    for (const auto& file : plan_files) {
        const std::string plan_id = plan_id_from_path(file);
        try {
            const FloorPlan plan = load_plan(file);
            const PlanPaths pp = plan_paths(plan, plan_id, cfg);
            const auto per_path = parallel_map(pp.paths.size(), threads, [&](std::size_t k) {
                const auto& wp = pp.paths[k];
                std::vector<std::string> lines;
                simulate_trajectory(plan, wp.path.points, cfg.sensor, [&](Sample s) {
                    s.plan_id = plan_id;
                    s.id = plan_id + ":" + std::to_string(wp.from) + "-" + std::to_string(wp.to) + ":" +
                           std::to_string(s.step_index);
                    lines.push_back(sample_to_json(s).dump());
                });
                return lines;
            });
            std::size_t count = 0;
            for (const auto& lines : per_path) {
                for (const auto& l : lines) out << l << '\n';
                count += lines.size();
            }
            report.samples_per_plan.emplace_back(plan_id, count);
            report.total += count;
            log << plan_id << ": " << pp.paths.size() << " paths, " << count << " samples\n";
        } catch (const std::exception& e) {
            report.failures.push_back(plan_id + ": " + e.what());
            log << plan_id << ": failed: " << e.what() << '\n';
        }
    }
    return report;
}

inline QuantizerConfig quantizer_for(const OccupancyGrid& grid)
{
    return {grid.rows(), grid.cols(), grid.scale(), grid.scale()};
}

/// Target segments of a sample as a token sequence (robot at the origin).
inline TokenSequence tokenize_sample(const Sample& s) { return tokenize(s.target_segments, quantizer_for(s.grid)); }

inline NgramProvider fit_ngram_on(const std::vector<Sample>& samples, std::size_t order, double smoothing)
{
    if (samples.empty()) throw std::invalid_argument("n-gram corpus is empty");
    const auto cfg = quantizer_for(samples.front().grid);
    std::vector<TokenSequence> corpus;
    for (const auto& s : samples) corpus.push_back(tokenize_sample(s));
    return fit_ngram(corpus, order, cfg.vocabulary_size(), smoothing);
}

struct SamplingConfig {
    double top_p = 0.8;
    std::size_t max_len = 402;
    std::uint64_t seed = 0;
};

/// Predicted segments for every sample, keyed by sample id.
inline nlohmann::json predict_with(const NgramProvider& model, const std::vector<Sample>& samples,
                                   const SamplingConfig& cfg, const std::string& estimator = "ngram")
{
    nlohmann::json preds = nlohmann::json::object();
    for (const auto& s : samples) {
        const auto q = quantizer_for(s.grid);
        if (q.vocabulary_size() != model.vocabulary_size())
            throw std::invalid_argument("model vocabulary does not match sample grid " + s.id);
        const PairGrammar grammar(model, q);
        auto seq = sample_sequence(grammar, q.start(), q.end(), cfg.top_p, cfg.max_len, cfg.seed ^ fnv1a(s.id));
        if (!seq.complete) {
            // Drop an unpaired trailing vertex and close the sequence.
            if ((seq.tokens.size() - 1) % 2 == 1) seq.tokens.pop_back();
            seq.tokens.push_back(q.end());
        }
        preds[s.id] = segments_to_json(detokenize(seq, q));
    }
    return {{"estimator", estimator}, {"predictions", preds}};
}

struct InfogainReport {
    std::size_t records = 0;
    std::vector<std::string> skipped;
};

/// Per-frontier gain records for every sample. `predictions` is the
/// {"estimator", "predictions": {id: segments}} document or null.
inline InfogainReport run_infogain(const std::vector<Sample>& samples, const std::map<std::string, FloorPlan>& plans,
                                   const nlohmann::json& predictions, const GainConfig& gain,
                                   WindowTermination mode, const nlohmann::json& config, std::ostream& out)
{
    InfogainReport report;
    out << artifact_header(config).dump() << '\n';
    const bool have_pred = !predictions.is_null();
    const std::string pred_name = have_pred ? predictions.value("estimator", std::string("predicted")) : "";
    for (const auto& s : samples) {
        const auto plan = plans.find(s.plan_id);
        if (plan == plans.end()) {
            report.skipped.push_back(s.id + ": no floor plan " + s.plan_id);
            continue;
        }
        SegmentSet predicted;
        if (have_pred) {
            const auto& p = predictions.at("predictions");
            if (!p.contains(s.id)) {
                report.skipped.push_back(s.id + ": no prediction");
                continue;
            }
            predicted = segments_from_json(p.at(s.id));
        }
        for (const auto& g : estimate_all(s, predicted, plan->second, gain, mode)) {
            const Cell c = s.grid.cell(g.frontier.location);
            nlohmann::json rec = {{"sample_id", s.id},
                                  {"frontier", {{"row", c.row}, {"col", c.col}, {"size", g.frontier.size()}}},
                                  {"naive", g.naive},
                                  {"truth", g.truth}};
            if (have_pred) rec[pred_name] = g.predicted;
            out << rec.dump() << '\n';
            ++report.records;
        }
    }
    return report;
}

/// Signed errors against the truth gain for every estimator column of the
/// gain records.
inline std::vector<ErrorSample> errors_from_gains(const std::vector<nlohmann::json>& records,
                                                  std::vector<std::string>* estimators = nullptr)
{
    std::vector<ErrorSample> out;
    for (const auto& r : records) {
        const double truth = r.at("truth").get<double>();
        const auto& f = r.at("frontier");
        const std::string fid = r.at("sample_id").get<std::string>() + "#" + std::to_string(f.at("row").get<int>()) +
                                "," + std::to_string(f.at("col").get<int>());
        for (const auto& [key, value] : r.items()) {
            if (key == "truth" || key == "sample_id" || key == "frontier" || !value.is_number()) continue;
            if (estimators && std::find(estimators->begin(), estimators->end(), key) == estimators->end())
                estimators->push_back(key);
            out.push_back({fid, key, value.get<double>() - truth});
        }
    }
    return out;
}

inline nlohmann::json report_to_json(const EvalReport& report, const nlohmann::json& config)
{
    nlohmann::json est = nlohmann::json::array();
    for (const auto& s : report.estimators) {
        est.push_back({{"estimator", s.estimator},
                       {"count", s.count},
                       {"mae", s.mae},
                       {"ci", {s.ci.lo, s.ci.hi}},
                       {"under", s.under},
                       {"over", s.over},
                       {"exact", s.exact}});
    }
    nlohmann::json ks = nlohmann::json::array();
    for (const auto& k : report.ks) ks.push_back({{"a", k.a}, {"b", k.b}, {"statistic", k.statistic}});
    return {{"forge", {{"version", kToolVersion}, {"config", config}, {"config_hash", hex64(fnv1a(config.dump()))}}},
            {"estimators", est},
            {"ks", ks},
            {"warnings", report.warnings}};
}

inline std::string cdf_to_csv(const EvalReport& report, std::size_t bins, const nlohmann::json& config)
{
    std::ostringstream os;
    os << "# forge " << kToolVersion << " config=" << config.dump() << '\n';
    os << "estimator,x,F\n";
    os << std::setprecision(17);
    for (const auto& s : report.estimators)
        for (const auto& p : export_cdf(s.abs_errors, bins)) os << s.estimator << ',' << p.x << ',' << p.f << '\n';
    return os.str();
}

}  // namespace forge
