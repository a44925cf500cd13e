// cpbandit: command-line front end for the library.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "cpbandit/baseline.hpp"
#include "cpbandit/io.hpp"

using namespace cpbandit;

namespace {

struct Common {
    std::string instance_path;
    std::optional<std::uint64_t> seed;

    InstanceFile load() const {
        InstanceFile instance = load_instance(instance_path);
        if (seed) instance.seed = *seed;
        return instance;
    }
    Environment environment() const {
        InstanceFile instance = load();
        return Environment(instance.function, instance.noise, instance.seed);
    }
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("instance", common.instance_path, "Instance JSON file")->required();
    cmd->add_option("--seed", common.seed, "Environment seed (overrides the instance file)");
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active change-point localization with bandit feedback"};
    app.require_subcommand(1);

    // complexity
    Common complexity_common;
    double cx_delta = 0.05;
    double cx_eta = 1.0 / 256.0;
    double cx_constant = 1.0;
    auto* complexity_cmd = app.add_subcommand("complexity", "Complexity functionals and lower bounds");
    add_common(complexity_cmd, complexity_common);
    complexity_cmd->add_option("--delta", cx_delta, "Confidence level")->required();
    complexity_cmd->add_option("--eta", cx_eta, "Precision")->required();
    complexity_cmd->add_option("--constant", cx_constant, "Multiplier of the expectation bound");
    complexity_cmd->callback([&] {
        const InstanceFile instance = complexity_common.load();
        const auto& jumps = instance.function.jumps();
        const ComplexityProfile p = profile(instance.function);
        json out = to_json(p);
        const char* note = "bound for some nearby instance";
        try {
            out["lower_bound_quantile"] = {{"value", lower_bound_quantile(p, jumps, cx_delta, cx_eta)},
                                           {"note", note}};
        } catch (const std::invalid_argument& e) {
            out["lower_bound_quantile"] = {{"value", nullptr}, {"error", e.what()}};
        }
        try {
            const ExpectationBound b = expectation_lower_bound(p, jumps, cx_delta, cx_eta, cx_constant);
            out["expectation_lower_bound"] = {{"value", b.value}, {"constant", b.constant}, {"note", note}};
        } catch (const std::invalid_argument& e) {
            out["expectation_lower_bound"] = {{"value", nullptr}, {"error", e.what()}};
        }
        print(out);
    });

    // detect
    Common detect_common;
    std::uint64_t dt_budget = 0;
    double dt_delta = 0.05;
    auto* detect_cmd = app.add_subcommand("detect", "Dyadic interval detection");
    add_common(detect_cmd, detect_common);
    detect_cmd->add_option("--budget", dt_budget, "Budget T")->required();
    detect_cmd->add_option("--delta", dt_delta, "Confidence level")->required();
    detect_cmd->callback([&] {
        Environment env = detect_common.environment();
        print(to_json(detect_intervals(env, DetectionConfig{dt_delta, dt_budget})));
    });

    // jumps
    Common jumps_common;
    std::uint64_t jp_budget = 0;
    double jp_delta = 0.05;
    std::size_t jp_n = 1;
    std::string jp_intervals;
    auto* jumps_cmd = app.add_subcommand("jumps", "Jump estimation over candidate intervals");
    add_common(jumps_cmd, jumps_common);
    jumps_cmd->add_option("--budget", jp_budget, "Budget T")->required();
    jumps_cmd->add_option("--delta", jp_delta, "Confidence level")->required();
    jumps_cmd->add_option("--n", jp_n, "Number of acceptances to stop at")->required();
    jumps_cmd->add_option("--intervals", jp_intervals,
                          "JSON array of [left, right] pairs; default: detect with the same budget");
    jumps_cmd->callback([&] {
        Environment env = jumps_common.environment();
        std::vector<Interval> intervals;
        json out;
        if (jp_intervals.empty()) {
            DetectionResult detection = detect_intervals(env, DetectionConfig{jp_delta, jp_budget});
            intervals = detection.intervals;
            out["detection"] = to_json(detection);
        } else {
            const json pairs = json::parse(jp_intervals);
            for (const auto& pair : pairs) {
                intervals.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
            }
        }
        out["jumps"] = to_json(estimate_jumps(env, intervals, jp_delta, jp_budget, jp_n));
        print(out);
    });

    // shb
    Common shb_common;
    double sh_left = 0.0;
    double sh_right = 1.0;
    std::uint64_t sh_budget = 0;
    double sh_eta = 1.0 / 256.0;
    auto* shb_cmd = app.add_subcommand("shb", "Binary search with backtracking; JSON lines per round");
    add_common(shb_cmd, shb_common);
    shb_cmd->add_option("--left", sh_left, "Left endpoint of the search interval");
    shb_cmd->add_option("--right", sh_right, "Right endpoint of the search interval");
    shb_cmd->add_option("--budget", sh_budget, "Budget T")->required();
    shb_cmd->add_option("--eta", sh_eta, "Precision")->required();
    shb_cmd->callback([&] {
        Environment env = shb_common.environment();
        const ShbResult result =
            shb(env, Interval(sh_left, sh_right), sh_budget, sh_eta,
                [](const ShbRound& round) { std::cout << to_json(round).dump() << '\n'; });
        std::cout << json{{"result", to_json(result)}}.dump() << '\n';
    });

    // verify
    Common verify_common;
    double vf_minus = 0.0;
    double vf_plus = 1.0;
    std::uint64_t vf_budget = 0;
    double vf_delta = 0.05;
    double vf_constant = kVerifyThresholdConstant;
    auto* verify_cmd = app.add_subcommand("verify", "Two-point change certificate");
    add_common(verify_cmd, verify_common);
    verify_cmd->add_option("--x-minus", vf_minus, "Left query point")->required();
    verify_cmd->add_option("--x-plus", vf_plus, "Right query point")->required();
    verify_cmd->add_option("--budget", vf_budget, "Budget T")->required();
    verify_cmd->add_option("--delta", vf_delta, "Confidence level")->required();
    verify_cmd->add_option("--constant", vf_constant, "Threshold numerator");
    verify_cmd->callback([&] {
        Environment env = verify_common.environment();
        print(to_json(verify_cp(env, vf_minus, vf_plus, vf_delta, vf_budget, vf_constant)));
    });

    // run
    Common run_common;
    LcpConfig run_cfg;
    auto* run_cmd = app.add_subcommand("run", "Localize N change points");
    add_common(run_cmd, run_common);
    run_cmd->add_option("--n", run_cfg.n_targets, "Number of change points to localize")->required();
    run_cmd->add_option("--delta", run_cfg.delta, "Confidence level")->required();
    run_cmd->add_option("--eta", run_cfg.eta, "Precision")->required();
    run_cmd->add_option("--delta-explore", run_cfg.delta_explore, "Exploration confidence")->capture_default_str();
    run_cmd->add_option("--max-stage", run_cfg.max_stage, "Last stage before giving up")->capture_default_str();
    run_cmd->add_flag("--trace", run_cfg.trace, "Include per-stage subroutine traces");
    run_cmd->callback([&] {
        const InstanceFile instance = run_common.load();
        Environment env(instance.function, instance.noise, instance.seed);
        RunReport report = localize(env, run_cfg);
        if (!report.aborted && instance.function.size() >= run_cfg.n_targets) {
            report.success = score_success(report.estimates, instance.function, run_cfg.eta);
        }
        json out = to_json(report);
        out["queries_used"] = env.queries_used();
        if (!run_cfg.in_guarantee_regime()) out["tags"] = {"outside-theorem-regime"};
        print(out);
    });

    // baseline-uniform
    Common uniform_common;
    std::size_t bu_grid = 33;
    std::uint64_t bu_reps = 64;
    double bu_delta = 0.05;
    auto* uniform_cmd = app.add_subcommand("baseline-uniform", "Uniform grid detector");
    add_common(uniform_cmd, uniform_common);
    uniform_cmd->add_option("--grid", bu_grid, "Number of grid points")->capture_default_str();
    uniform_cmd->add_option("--reps", bu_reps, "Samples per grid point")->capture_default_str();
    uniform_cmd->add_option("--delta", bu_delta, "Confidence level")->capture_default_str();
    uniform_cmd->callback([&] {
        Environment env = uniform_common.environment();
        const UniformBatchResult r = uniform_batch_baseline(env, bu_grid, bu_reps, bu_delta);
        print({{"intervals", to_json(r.intervals)}, {"threshold", r.threshold}, {"queries", r.queries}});
    });

    // experiment
    std::string ex_source;
    std::optional<std::size_t> ex_runs;
    std::optional<std::uint64_t> ex_seed;
    std::string ex_out;
    std::size_t ex_threads = std::max(1u, std::thread::hardware_concurrency());
    bool ex_full = false;
    auto* experiment_cmd = app.add_subcommand("experiment", "Monte-Carlo sweep; writes CSV and a metadata sidecar");
    experiment_cmd->add_option("spec", ex_source, "Preset name (exp1..exp5) or spec JSON file")->required();
    experiment_cmd->add_option("--mc-runs", ex_runs, "Replicates per sweep value (default 200)");
    experiment_cmd->add_flag("--full-scale", ex_full, "Use the preset's full-scale replicate count");
    experiment_cmd->add_option("--seed", ex_seed, "Master seed");
    experiment_cmd->add_option("--out", ex_out, "CSV output path (default: stdout)");
    experiment_cmd->add_option("--threads", ex_threads, "Worker threads")->check(CLI::PositiveNumber);
    experiment_cmd->callback([&] {
        const auto names = preset_names();
        const bool is_preset = std::find(names.begin(), names.end(), ex_source) != names.end();
        if (!is_preset && !std::ifstream(ex_source)) {
            throw std::invalid_argument("'" + ex_source + "' is neither a preset (exp1..exp5) nor a readable spec file");
        }
        ExperimentSpec spec = is_preset ? preset(ex_source) : experiment_from_json(read_json_file(ex_source));
        if (ex_runs) {
            spec.mc_runs = *ex_runs;
        } else if (is_preset && !ex_full) {
            spec.mc_runs = kDeskScaleRuns;
        }
        if (ex_seed) spec.master_seed = *ex_seed;
        const SweepResult result = run_experiment(spec, ex_threads);
        if (ex_out.empty()) {
            write_csv(std::cout, result);
            return;
        }
        std::ofstream csv(ex_out);
        if (!csv) throw std::runtime_error("cannot write '" + ex_out + "'");
        write_csv(csv, result);
        std::ofstream meta(ex_out + ".meta.json");
        meta << metadata_json(spec, result).dump(2) << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::cerr << "cpbandit: invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "cpbandit: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
