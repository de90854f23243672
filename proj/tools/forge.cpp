#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forge/pipeline.hpp"
#include "forge/synthetic.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kFatal = 2;

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

/// Config of the first artifact header in a JSON Lines file, or null.
json upstream_config(const std::string& path)
{
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = json::parse(line, nullptr, false);
        if (!j.is_discarded() && forge::is_header(j)) return j["forge"].value("config", json());
        break;
    }
    return nullptr;
}

void add_sensor_options(CLI::App* sub, forge::PipelineConfig& cfg, std::string& windows)
{
    sub->add_option("--grid-size", cfg.sensor.grid_size, "Grid rows and columns")->capture_default_str();
    sub->add_option("--area", cfg.sensor.area, "Grid side length, metres")->capture_default_str();
    sub->add_option("--range", cfg.sensor.range, "Sensor range, metres")->capture_default_str();
    sub->add_option("--step", cfg.sensor.step, "Distance between scans along a path, metres")->capture_default_str();
    sub->add_option("--rays", cfg.sensor.rays, "Rays per scan")->capture_default_str();
    sub->add_option("--window-termination", windows, "Windows that stop rays: exterior, none or all")
        ->capture_default_str();
}

void add_nav_options(CLI::App* sub, forge::PipelineConfig& cfg)
{
    sub->add_option("--waypoints", cfg.waypoints, "Waypoints per plan")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--resolution", cfg.nav.resolution, "Navigation grid resolution, metres per cell")
        ->capture_default_str();
    sub->add_option("--robot-radius", cfg.nav.robot_radius, "Robot radius, metres")->capture_default_str();
    sub->add_option("--clearance", cfg.nav.clearance, "Minimum wall distance of waypoints, metres")
        ->capture_default_str();
    sub->add_option("--truncation", cfg.nav.truncation, "Clearance cost truncation distance, metres")
        ->capture_default_str();
    sub->add_option("--cost-weight", cfg.nav.weight, "Clearance cost weight")->capture_default_str();
    sub->add_option("--min-length", cfg.filter.min_length, "Shortest accepted path, metres")->capture_default_str();
    sub->add_option("--max-length", cfg.filter.max_length, "Longest accepted path, metres")->capture_default_str();
    sub->add_option("--min-turns", cfg.filter.min_turns, "Fewest accepted turns per path")->capture_default_str();
}

std::map<std::string, forge::FloorPlan> load_plans(const std::vector<std::string>& files)
{
    std::map<std::string, forge::FloorPlan> plans;
    for (const auto& f : files) plans.emplace(forge::plan_id_from_path(f), forge::load_plan(f));
    return plans;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"forge: floor-plan dataset synthesis and information-gain evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(forge::kToolVersion));

    int status = kOk;
    forge::PipelineConfig cfg;
    std::string windows = "exterior";
    std::string out_path;

    // plan
    auto* plan = app.add_subcommand("plan", "Validate, canonicalize or generate floor plans");
    plan->require_subcommand(1);
    std::string plan_in, plan_out;
    auto* validate = plan->add_subcommand("validate", "Check a floor plan and report its contents");
    validate->add_option("file", plan_in, "Floor plan JSON")->required();
    validate->callback([&] {
        const auto fp = forge::load_plan(plan_in);
        std::cout << plan_in << ": ok, " << fp.rooms.size() << " rooms, " << fp.segments.size() << " segments, "
                  << fp.doorways.size() << " doorways, " << fp.exterior_windows().size() << " exterior windows";
        if (fp.dropped_segments > 0) std::cout << ", " << fp.dropped_segments << " zero-length segments dropped";
        std::cout << '\n';
    });
    auto* canon = plan->add_subcommand("canonicalize", "Write the canonical segment form of a floor plan");
    canon->add_option("in", plan_in, "Floor plan JSON")->required();
    canon->add_option("out", plan_out, "Output JSON")->required();
    canon->callback([&] {
        const auto fp = forge::load_plan(plan_in);
        forge::write_file(plan_out, forge::to_json(fp).dump(2) + "\n");
    });
    std::uint64_t gen_seed = 0;
    auto* generate = plan->add_subcommand("generate", "Write a random synthetic floor plan");
    generate->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    generate->add_option("--out", plan_out, "Output JSON (default stdout)");
    generate->callback([&] {
        Output out(plan_out);
        out.stream() << forge::to_json(forge::generate_floorplan(gen_seed)).dump(2) << '\n';
    });

    // paths
    auto* paths = app.add_subcommand("paths", "Sample waypoints and emit accepted paths as JSON polylines");
    paths->add_option("plan", plan_in, "Floor plan JSON")->required();
    add_nav_options(paths, cfg);
    paths->add_option("--out", out_path, "Output JSON (default stdout)");
    paths->callback([&] {
        const auto fp = forge::load_plan(plan_in);
        const auto pp = forge::plan_paths(fp, forge::plan_id_from_path(plan_in), cfg);
        json doc = forge::paths_to_json(pp);
        doc["forge"] = {{"version", forge::kToolVersion}, {"config", cfg.to_json()}};
        Output out(out_path);
        out.stream() << doc.dump() << '\n';
    });

    // synth
    std::vector<std::string> plan_files;
    auto* synth = app.add_subcommand("synth", "Synthesize a JSON Lines dataset from floor plans");
    synth->add_option("plans", plan_files, "Floor plan JSON files")->required();
    add_sensor_options(synth, cfg, windows);
    add_nav_options(synth, cfg);
    synth->add_option("--max-paths", cfg.max_paths, "Paths simulated per plan, 0 for all")->capture_default_str();
    synth->add_option("--threads", cfg.threads, "Worker threads, 0 for all cores (capped by FORGE_THREADS)")
        ->capture_default_str();
    synth->add_option("--out", out_path, "Output JSON Lines (default stdout)");
    synth->callback([&] {
        cfg.sensor.window_termination = forge::window_termination_from(windows);
        Output out(out_path);
        const auto report = forge::run_synth(cfg, plan_files, out.stream(), std::cerr);
        std::cerr << report.total << " samples from " << report.samples_per_plan.size() << " plans\n";
        if (!report.failures.empty()) status = kPartial;
    });

    // tokenize
    std::string dataset;
    auto* tokenize = app.add_subcommand("tokenize", "Emit the token sequence of every sample's target segments");
    tokenize->add_option("dataset", dataset, "Dataset JSON Lines")->required();
    tokenize->add_option("--out", out_path, "Output JSON Lines (default stdout)");
    tokenize->callback([&] {
        const auto samples = forge::read_dataset(dataset);
        Output out(out_path);
        out.stream() << forge::artifact_header({{"dataset", upstream_config(dataset)}}).dump() << '\n';
        for (const auto& s : samples) {
            const auto q = forge::quantizer_for(s.grid);
            out.stream() << json{{"sample_id", s.id}, {"tokens", forge::to_json(forge::tokenize_sample(s), q)}}.dump()
                         << '\n';
        }
    });

    // ngram
    std::size_t order = 3;
    double smoothing = 1e-6;
    std::string provider;
    forge::SamplingConfig sampling;
    auto* ngram = app.add_subcommand("ngram", "Fit or sample the n-gram baseline");
    ngram->require_subcommand(1);
    auto* fit = ngram->add_subcommand("fit", "Fit an n-gram model on a dataset's target sequences");
    fit->add_option("dataset", dataset, "Dataset JSON Lines")->required();
    fit->add_option("--order", order, "n-gram order")->capture_default_str();
    fit->add_option("--smoothing", smoothing, "Additive smoothing constant")->capture_default_str();
    fit->add_option("--out", out_path, "Model file (CBOR)")->required();
    fit->callback([&] {
        const auto model = forge::fit_ngram_on(forge::read_dataset(dataset), order, smoothing);
        json doc = model.to_json();
        doc["forge"] = {{"version", forge::kToolVersion}, {"dataset", upstream_config(dataset)}};
        const auto bytes = json::to_cbor(doc);
        forge::write_file(out_path, std::string(bytes.begin(), bytes.end()));
    });
    auto add_sample_command = [&](CLI::App* parent, const std::string& name) {
        auto* sub = parent->add_subcommand(name, "Predict target segments for every sample with a fitted model");
        sub->add_option("dataset", dataset, "Dataset JSON Lines")->required();
        sub->add_option("--provider", provider, "Model file written by `ngram fit`")->required();
        sub->add_option("--p", sampling.top_p, "Top-p mass")->capture_default_str();
        sub->add_option("--seed", sampling.seed, "Random seed")->capture_default_str();
        sub->add_option("--max-len", sampling.max_len, "Longest sampled sequence, tokens")->capture_default_str();
        sub->add_option("--out", out_path, "Predictions JSON (default stdout)");
        sub->callback([&] {
            const auto bytes = forge::read_file(provider);
            const auto model = forge::NgramProvider::from_json(json::from_cbor(bytes));
            auto doc = forge::predict_with(model, forge::read_dataset(dataset), sampling);
            doc["forge"] = {{"version", forge::kToolVersion},
                            {"config", {{"p", sampling.top_p}, {"seed", sampling.seed}, {"max_len", sampling.max_len}}}};
            Output out(out_path);
            out.stream() << doc.dump() << '\n';
        });
    };
    add_sample_command(ngram, "sample");
    add_sample_command(&app, "sample");

    // frontiers
    auto* frontiers = app.add_subcommand("frontiers", "Emit the frontier clusters of every sample");
    frontiers->add_option("dataset", dataset, "Dataset JSON Lines")->required();
    frontiers->add_option("--out", out_path, "Output JSON Lines (default stdout)");
    frontiers->callback([&] {
        const auto samples = forge::read_dataset(dataset);
        Output out(out_path);
        out.stream() << forge::artifact_header({{"dataset", upstream_config(dataset)}}).dump() << '\n';
        for (const auto& s : samples) {
            json clusters = json::array();
            for (const auto& c : forge::cluster_frontiers(s.grid)) {
                const auto loc = s.grid.cell(c.location);
                clusters.push_back({{"location", {loc.row, loc.col}}, {"size", c.size()}, {"cells", c.cells}});
            }
            out.stream() << json{{"sample_id", s.id}, {"clusters", clusters}}.dump() << '\n';
        }
    });

    // infogain
    std::vector<std::string> truth_plans;
    std::string pred_path, estimator = "naive";
    forge::GainConfig gain;
    auto* infogain = app.add_subcommand("infogain", "Per-frontier gain of each estimator and the ground truth");
    infogain->add_option("dataset", dataset, "Dataset JSON Lines")->required();
    infogain->add_option("--plan", truth_plans, "Ground-truth floor plans, matched to samples by file stem")
        ->required();
    infogain->add_option("--pred", pred_path, "Predicted segments keyed by sample id");
    infogain->add_option("--estimator", estimator, "Estimator without --pred: naive or ngram")
        ->check(CLI::IsMember({"naive", "ngram"}))
        ->capture_default_str();
    infogain->add_option("--provider", provider, "n-gram model for --estimator ngram");
    infogain->add_option("--p", sampling.top_p, "Top-p mass for --estimator ngram")->capture_default_str();
    infogain->add_option("--seed", sampling.seed, "Sampling seed for --estimator ngram")->capture_default_str();
    infogain->add_option("--range", gain.range, "Evaluation scan range, metres")->capture_default_str();
    infogain->add_option("--rays", gain.rays, "Evaluation scan rays")->capture_default_str();
    infogain->add_option("--window-termination", windows, "Windows that stop rays: exterior, none or all")
        ->capture_default_str();
    infogain->add_option("--out", out_path, "Output JSON Lines (default stdout)");
    infogain->callback([&] {
        const auto samples = forge::read_dataset(dataset);
        if (samples.empty()) throw std::runtime_error("dataset " + dataset + " has no samples");
        const auto plans = load_plans(truth_plans);
        json predictions;
        json config = {{"range", gain.range}, {"rays", gain.rays}, {"window_termination", windows},
                       {"dataset", upstream_config(dataset)}};
        if (!pred_path.empty()) {
            predictions = json::parse(forge::read_file(pred_path));
            if (!predictions.contains("predictions"))
                predictions = {{"estimator", "predicted"}, {"predictions", predictions}};
            config["estimator"] = predictions.value("estimator", std::string("predicted"));
        } else if (estimator == "ngram") {
            if (provider.empty()) throw std::runtime_error("--estimator ngram needs --provider");
            const auto model = forge::NgramProvider::from_json(json::from_cbor(forge::read_file(provider)));
            predictions = forge::predict_with(model, samples, sampling);
            config["estimator"] = "ngram";
            config["sampling"] = {{"p", sampling.top_p}, {"seed", sampling.seed}, {"max_len", sampling.max_len}};
        } else {
            config["estimator"] = "naive";
        }
        Output out(out_path);
        const auto report = forge::run_infogain(samples, plans, predictions, gain,
                                                forge::window_termination_from(windows), config, out.stream());
        for (const auto& s : report.skipped) std::cerr << "skipped " << s << '\n';
        std::cerr << report.records << " frontier records\n";
        if (!report.skipped.empty()) status = kPartial;
    });

    // eval
    std::string gains_path, cdf_path;
    std::size_t trials = 1000, bins = 100;
    std::uint64_t eval_seed = 7;
    auto* eval = app.add_subcommand("eval", "Summarize gain errors: MAE, bootstrap CI, KS, CDF");
    eval->add_option("gains", gains_path, "Gain records JSON Lines written by `infogain`")->required();
    eval->add_option("--trials", trials, "Bootstrap trials")->capture_default_str();
    eval->add_option("--seed", eval_seed, "Bootstrap seed")->capture_default_str();
    eval->add_option("--bins", bins, "CDF points per estimator")->capture_default_str();
    eval->add_option("--out", out_path, "Report JSON (default stdout)");
    eval->add_option("--cdf", cdf_path, "CDF CSV");
    eval->callback([&] {
        const auto records = forge::read_jsonl(gains_path);
        if (records.empty()) throw std::runtime_error("no gain records in " + gains_path);
        std::vector<std::string> names;
        const auto errors = forge::errors_from_gains(records, &names);
        const auto report = forge::summarize(errors, trials, eval_seed, names);
        const json config = {
            {"trials", trials}, {"seed", eval_seed}, {"bins", bins}, {"gains", upstream_config(gains_path)}};
        Output out(out_path);
        out.stream() << forge::report_to_json(report, config).dump(2) << '\n';
        if (!cdf_path.empty()) forge::write_file(cdf_path, forge::cdf_to_csv(report, bins, config));
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kFatal;
    } catch (const std::exception& e) {
        std::cerr << "forge: " << e.what() << '\n';
        return kFatal;
    }
    return status;
}
