#pragma once

// JSON (de)serialization for instances, experiment specs and reports.

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpbandit/complexity.hpp"
#include "cpbandit/detect.hpp"
#include "cpbandit/environment.hpp"
#include "cpbandit/harness.hpp"
#include "cpbandit/jumps.hpp"
#include "cpbandit/lcp.hpp"
#include "cpbandit/shb.hpp"
#include "cpbandit/verify.hpp"

namespace cpbandit {

using json = nlohmann::json;

struct InstanceFile {
    StepFunction function;
    NoiseModel noise = NoiseModel::gaussian(1.0);
    std::uint64_t seed = 0;
};

namespace detail {

inline const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw std::invalid_argument(std::string("missing key '") + key + "'");
    }
    return j.at(key);
}

inline double number(const json& j, const std::string& what) {
    if (!j.is_number()) {
        throw std::invalid_argument(what + " must be a number");
    }
    return j.get<double>();
}

inline std::vector<double> numbers(const json& j, const std::string& what) {
    if (!j.is_array()) {
        throw std::invalid_argument(what + " must be an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], what + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline std::uint64_t unsigned_integer(const json& j, const std::string& what) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw std::invalid_argument(what + " must be a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

/// JSON has no infinity; thresholds of unfunded depths are written as null.
inline json finite_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

}  // namespace detail

inline NoiseModel noise_from_json(const json& j) {
    const json& kind = detail::require(j, "kind");
    if (!kind.is_string()) {
        throw std::invalid_argument("noise.kind must be a string");
    }
    const auto name = kind.get<std::string>();
    if (name == "gaussian") {
        return NoiseModel::gaussian(j.contains("sigma") ? detail::number(j.at("sigma"), "noise.sigma") : 1.0);
    }
    if (name == "zero") {
        return NoiseModel::zero();
    }
    if (name == "bounded") {
        return NoiseModel::bounded(detail::number(detail::require(j, "h"), "noise.h"));
    }
    throw std::invalid_argument("noise.kind must be one of gaussian, zero, bounded (got '" + name + "')");
}

inline json to_json(const NoiseModel& noise) {
    switch (noise.kind()) {
        case NoiseModel::Kind::gaussian:
            return {{"kind", "gaussian"}, {"sigma", noise.scale()}};
        case NoiseModel::Kind::zero:
            return {{"kind", "zero"}};
        case NoiseModel::Kind::bounded:
            return {{"kind", "bounded"}, {"h", noise.scale()}};
    }
    return {};
}

inline StepFunction step_function_from_json(const json& j) {
    const double baseline = j.contains("baseline") ? detail::number(j.at("baseline"), "baseline") : 0.0;
    return StepFunction(baseline, detail::numbers(detail::require(j, "change_points"), "change_points"),
                        detail::numbers(detail::require(j, "jumps"), "jumps"));
}

inline InstanceFile instance_from_json(const json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("instance must be a JSON object");
    }
    InstanceFile out{step_function_from_json(j)};
    if (j.contains("noise")) {
        out.noise = noise_from_json(j.at("noise"));
    }
    if (j.contains("seed")) {
        out.seed = detail::unsigned_integer(j.at("seed"), "seed");
    }
    return out;
}

inline json to_json(const StepFunction& f) {
    return {{"baseline", f.baseline()}, {"change_points", f.change_points()}, {"jumps", f.jumps()}};
}

inline json to_json(const InstanceFile& instance) {
    json j = to_json(instance.function);
    j["noise"] = to_json(instance.noise);
    j["seed"] = instance.seed;
    return j;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline InstanceFile load_instance(const std::string& path) {
    try {
        return instance_from_json(read_json_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const Interval& i) { return json::array({i.left(), i.right()}); }

inline json to_json(const std::vector<Interval>& intervals) {
    json out = json::array();
    for (const auto& i : intervals) out.push_back(to_json(i));
    return out;
}

inline json to_json(const ComplexityProfile& p) {
    return {{"theta", p.spacings_theta},
            {"local_spacings", p.local_spacings},
            {"energies_sq", p.energies_sq},
            {"h_detect", p.h_detect},
            {"h_localize_by_n", p.h_localize_by_n}};
}

inline json to_json(const DetectionResult& r) {
    json depths = json::array();
    for (const auto& d : r.per_depth) {
        depths.push_back({{"depth", d.plan.depth},
                          {"cells", d.plan.cells},
                          {"samples_per_point", d.plan.samples_per_point},
                          {"threshold", detail::finite_or_null(d.plan.threshold)},
                          {"flags", d.flags}});
    }
    return {{"intervals", to_json(r.intervals)}, {"per_depth", depths}, {"queries", r.queries}};
}

inline json to_json(const JumpEstimationResult& r) {
    json accepted = json::array();
    for (const auto& a : r.accepted) {
        accepted.push_back(
            {{"interval", to_json(a.interval)}, {"delta_hat", a.delta_hat}, {"round", a.accepted_round}});
    }
    return {{"accepted", accepted}, {"queries", r.queries}, {"exhausted", r.exhausted}, {"rounds", r.rounds}};
}

inline json to_json(const ShbResult& r) {
    return {{"estimate", r.estimate},       {"queries", r.queries},
            {"rounds", r.rounds},           {"samples_per_arm", r.samples_per_arm},
            {"early_exit", r.early_exit},   {"underfunded", r.underfunded}};
}

inline json to_json(const ShbRound& r) {
    const auto arms = r.window.arms();
    return {{"round", r.round},
            {"arms", std::vector<double>(arms.begin(), arms.end())},
            {"means", std::vector<double>(r.means.begin(), r.means.end())},
            {"decision", to_string(r.decision)}};
}

inline json to_json(const VerifyOutcome& v) {
    return {{"detection", v.detection},
            {"statistic", v.statistic},
            {"threshold", detail::finite_or_null(v.threshold)},
            {"queries", v.queries}};
}

inline json to_json(const StageTrace& t) {
    json out{{"detection", to_json(t.detection)},
             {"selected", to_json(t.selected)},
             {"delta_hats", t.delta_hats},
             {"weights", t.weights},
             {"verify_left", t.verify_left},
             {"verify_right", t.verify_right}};
    out["jumps"] = t.jumps ? to_json(*t.jumps) : json(nullptr);
    json searches = json::array();
    for (const auto& s : t.searches) searches.push_back(to_json(s));
    out["searches"] = searches;
    json checks = json::array();
    for (const auto& v : t.verifications) checks.push_back(to_json(v));
    out["verifications"] = checks;
    return out;
}

inline json to_json(const StageLedger& l) {
    json out{{"k", l.k},
             {"delta_k", l.delta_k},
             {"stage_budget", l.stage_budget},
             {"detect_queries", l.detect_queries},
             {"jump_queries", l.jump_queries},
             {"shb_queries", l.shb_queries},
             {"verify_queries", l.verify_queries},
             {"total_queries", l.total_queries()},
             {"intervals_found", l.intervals_found},
             {"accepted", l.accepted},
             {"all_verified", l.all_verified},
             {"candidates", l.candidates}};
    if (l.trace) {
        out["trace"] = to_json(*l.trace);
    }
    return out;
}

inline json to_json(const RunReport& r) {
    json ledgers = json::array();
    for (const auto& l : r.ledgers) ledgers.push_back(to_json(l));
    json out{{"estimates", r.estimates},
             {"total_budget", r.total_budget},
             {"stop_stage", r.stop_stage},
             {"aborted", r.aborted},
             {"ledgers", ledgers}};
    out["success"] = r.success ? json(*r.success) : json(nullptr);
    return out;
}

// ---------------------------------------------------------------------------
// Experiment specs
//
// {
//   "name": "...", "preset": "exp1" (optional base),
//   "family": {"kind": "two_cp", "spacing": 0.25, "jump": 1.0, "count": 10,
//              "instance": {...} for kind "fixed"},
//   "noise": {...},
//   "sweep": {"param": "s", "values": [...]},
//   "mc_runs": 200, "seed": 0,
//   "algo": {"n": 2, "delta": 0.05, "eta": 0.00048828125, "delta_explore": 1.0, "max_stage": 40},
//   "explore_tracks_delta": false
// }

inline InstanceFamily::Kind family_kind_from_string(const std::string& name) {
    if (name == "two_cp") return InstanceFamily::Kind::two_change_points;
    if (name == "single_cp") return InstanceFamily::Kind::single_change_point;
    if (name == "alternating") return InstanceFamily::Kind::alternating;
    if (name == "fixed") return InstanceFamily::Kind::fixed;
    throw std::invalid_argument("family.kind must be one of two_cp, single_cp, alternating, fixed (got '" + name +
                                "')");
}

inline ExperimentSpec experiment_from_json(const json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("experiment spec must be a JSON object");
    }
    ExperimentSpec spec;
    if (j.contains("preset")) {
        spec = preset(j.at("preset").get<std::string>());
    }
    if (j.contains("name")) spec.name = j.at("name").get<std::string>();
    if (j.contains("family")) {
        const json& f = j.at("family");
        if (f.contains("kind")) spec.family.kind = family_kind_from_string(f.at("kind").get<std::string>());
        if (f.contains("spacing")) spec.family.spacing = detail::number(f.at("spacing"), "family.spacing");
        if (f.contains("jump")) spec.family.jump = detail::number(f.at("jump"), "family.jump");
        if (f.contains("baseline")) spec.family.baseline = detail::number(f.at("baseline"), "family.baseline");
        if (f.contains("count")) spec.family.count = detail::unsigned_integer(f.at("count"), "family.count");
        if (f.contains("instance")) spec.family.function = step_function_from_json(f.at("instance"));
    }
    if (j.contains("noise")) spec.noise = noise_from_json(j.at("noise"));
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        spec.sweep = sweep_param_from_string(detail::require(s, "param").get<std::string>());
        spec.sweep_values = detail::numbers(detail::require(s, "values"), "sweep.values");
    }
    if (j.contains("mc_runs")) spec.mc_runs = detail::unsigned_integer(j.at("mc_runs"), "mc_runs");
    if (j.contains("seed")) spec.master_seed = detail::unsigned_integer(j.at("seed"), "seed");
    if (j.contains("algo")) {
        const json& a = j.at("algo");
        if (a.contains("n")) spec.algo.n_targets = detail::unsigned_integer(a.at("n"), "algo.n");
        if (a.contains("delta")) spec.algo.delta = detail::number(a.at("delta"), "algo.delta");
        if (a.contains("eta")) spec.algo.eta = detail::number(a.at("eta"), "algo.eta");
        if (a.contains("delta_explore"))
            spec.algo.delta_explore = detail::number(a.at("delta_explore"), "algo.delta_explore");
        if (a.contains("max_stage"))
            spec.algo.max_stage = static_cast<int>(detail::unsigned_integer(a.at("max_stage"), "algo.max_stage"));
    }
    if (j.contains("explore_tracks_delta")) spec.explore_tracks_delta = j.at("explore_tracks_delta").get<bool>();
    spec.validate();
    return spec;
}

/// Metadata sidecar for a sweep: per-point redraws, aborts and regime tags.
inline json metadata_json(const ExperimentSpec& spec, const SweepResult& result) {
    json points = json::array();
    for (const auto& p : result.points) {
        json tags = json::array();
        if (p.outside_guarantee_regime) tags.push_back("outside-theorem-regime");
        points.push_back({{"sweep_value", p.value},
                          {"mean_budget", p.mean_budget},
                          {"q05", p.q05_budget},
                          {"q95", p.q95_budget},
                          {"success_rate", p.success_rate},
                          {"mean_runtime", p.mean_runtime},
                          {"mc_runs", p.mc_runs},
                          {"redraws", p.redraws},
                          {"aborted", p.aborted},
                          {"tags", tags}});
    }
    return {{"name", spec.name},
            {"family", to_string(spec.family.kind)},
            {"sweep_param", to_string(spec.sweep)},
            {"seed", spec.master_seed},
            {"n", spec.algo.n_targets},
            {"noise", to_json(spec.noise)},
            {"points", points}};
}

}  // namespace cpbandit
