#pragma once

// LocalizeChangePoints: the doubling-schedule driver.
//
// Stage k works with budget 2^k per step: (i) dyadic detection, (ii) jump
// estimation over the detected intervals, (iii) binary search inside the N
// strongest intervals with budget proportional to the inverse squared jump
// estimate, and (iv) a two-sample certificate around every estimate at the
// stage confidence 3 delta / (2 pi^2 N k^2). The run stops at the first stage
// whose N certificates all pass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cpbandit/detect.hpp"
#include "cpbandit/environment.hpp"
#include "cpbandit/jumps.hpp"
#include "cpbandit/shb.hpp"
#include "cpbandit/verify.hpp"

namespace cpbandit {

struct LcpConfig {
    std::size_t n_targets = 1;
    double delta = 0.05;
    double eta = 1.0 / 256.0;
    double delta_explore = 0.25;
    int max_stage = 40;
    double verify_constant = kVerifyThresholdConstant;
    /// Keep per-stage subroutine outputs in the ledgers.
    bool trace = false;

    void validate() const {
        if (n_targets < 1) {
            throw std::invalid_argument("lcp: n_targets must be >= 1");
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw std::invalid_argument("lcp: delta must lie in (0, 1)");
        }
        if (!(eta > 0.0 && eta < 1.0)) {
            throw std::invalid_argument("lcp: eta must lie in (0, 1)");
        }
        if (!(delta_explore > 0.0 && delta_explore <= 1.0)) {
            throw std::invalid_argument("lcp: delta_explore must lie in (0, 1]");
        }
        if (max_stage < 1 || max_stage > 62) {
            throw std::invalid_argument("lcp: max_stage must lie in [1, 62]");
        }
    }

    /// delta < 1/4, eta < 1/4 and delta_explore <= 1/4: the regime with guarantees.
    bool in_guarantee_regime() const noexcept { return delta < 0.25 && eta < 0.25 && delta_explore <= 0.25; }
};

/// k_0 = ceil(log2(2N)), computed exactly on integers.
inline int initial_stage(std::size_t n_targets) {
    int k = 0;
    while ((std::uint64_t{1} << k) < 2 * static_cast<std::uint64_t>(n_targets)) {
        ++k;
    }
    return k;
}

/// delta^(k) = 3 delta / (2 pi^2 N k^2).
inline double stage_confidence(double delta, std::size_t n_targets, int stage) {
    const double k = stage;
    return 3.0 * delta / (2.0 * std::numbers::pi * std::numbers::pi * static_cast<double>(n_targets) * k * k);
}

struct Allocation {
    std::vector<double> weights;
    std::vector<std::uint64_t> budgets;
};

/// T_v = max(floor(alpha_v * budget), 1) with alpha_v proportional to delta_hat_v^-2.
inline Allocation allocate_budget(const std::vector<double>& delta_hats, std::uint64_t budget) {
    if (delta_hats.empty()) {
        throw std::invalid_argument("allocation: no estimates");
    }
    Allocation out;
    double total = 0.0;
    for (double d : delta_hats) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw std::logic_error("allocation: jump estimates must be positive and finite");
        }
        total += 1.0 / (d * d);
    }
    for (double d : delta_hats) {
        const double weight = (1.0 / (d * d)) / total;
        out.weights.push_back(weight);
        const auto share = static_cast<std::uint64_t>(std::floor(weight * static_cast<double>(budget)));
        out.budgets.push_back(std::max<std::uint64_t>(share, 1));
    }
    return out;
}

struct StageTrace {
    DetectionResult detection;
    std::optional<JumpEstimationResult> jumps;
    std::vector<Interval> selected;
    std::vector<double> delta_hats;
    std::vector<double> weights;
    std::vector<ShbResult> searches;
    std::vector<double> verify_left;
    std::vector<double> verify_right;
    std::vector<VerifyOutcome> verifications;
};

struct StageLedger {
    int k = 0;
    double delta_k = 0.0;
    std::uint64_t stage_budget = 0;
    std::uint64_t detect_queries = 0;
    std::uint64_t jump_queries = 0;
    std::vector<std::uint64_t> shb_queries;
    std::vector<std::uint64_t> verify_queries;
    std::size_t intervals_found = 0;
    std::size_t accepted = 0;
    bool all_verified = false;
    /// Unsorted candidates in decreasing estimated-jump order; empty if the stage stopped early.
    std::vector<double> candidates;
    std::optional<StageTrace> trace;

    std::uint64_t total_queries() const noexcept {
        std::uint64_t total = detect_queries + jump_queries;
        for (auto q : shb_queries) total += q;
        for (auto q : verify_queries) total += q;
        return total;
    }
};

struct RunReport {
    /// Sorted ascending.
    std::vector<double> estimates;
    std::uint64_t total_budget = 0;
    int stop_stage = 0;
    std::vector<StageLedger> ledgers;
    /// max_stage reached without certification; estimates are empty.
    bool aborted = false;
    /// Filled by callers that know the ground truth.
    std::optional<bool> success;
};

template <SamplingOracle Oracle>
StageLedger run_stage(Oracle& env, const LcpConfig& cfg, int k) {
    StageLedger ledger;
    ledger.k = k;
    ledger.delta_k = stage_confidence(cfg.delta, cfg.n_targets, k);
    ledger.stage_budget = std::uint64_t{1} << k;
    const std::uint64_t budget = ledger.stage_budget;
    const double explore = cfg.delta_explore / 4.0;

    StageTrace trace;
    DetectionResult detection = detect_intervals(env, DetectionConfig{explore, budget});
    ledger.detect_queries = detection.queries;
    ledger.intervals_found = detection.intervals.size();
    const auto finish = [&] {
        if (cfg.trace) {
            trace.detection = std::move(detection);
            ledger.trace = std::move(trace);
        }
        return ledger;
    };
    if (detection.intervals.size() < cfg.n_targets) {
        return finish();
    }

    JumpEstimationResult jumps = estimate_jumps(env, detection.intervals, explore, budget, cfg.n_targets);
    ledger.jump_queries = jumps.queries;
    ledger.accepted = jumps.accepted.size();
    const std::optional<TopEstimates> top = top_n(jumps, cfg.n_targets);
    if (cfg.trace) {
        trace.jumps = jumps;
    }
    if (!top) {
        return finish();
    }

    const Allocation allocation = allocate_budget(top->delta_hats, budget);
    bool all_ok = true;
    for (std::size_t v = 0; v < cfg.n_targets; ++v) {
        const Interval& window = top->intervals[v];
        const std::uint64_t share = allocation.budgets[v];
        const ShbResult search = shb(env, window, share, cfg.eta);
        const double c = search.estimate;
        const double left = std::max(window.left(), c - cfg.eta);
        const double right = std::min(window.right(), c + cfg.eta);
        const VerifyOutcome check = verify_cp(env, left, right, ledger.delta_k, share, cfg.verify_constant);
        ledger.shb_queries.push_back(search.queries);
        ledger.verify_queries.push_back(check.queries);
        ledger.candidates.push_back(c);
        all_ok = all_ok && check.detection;
        if (cfg.trace) {
            trace.searches.push_back(search);
            trace.verify_left.push_back(left);
            trace.verify_right.push_back(right);
            trace.verifications.push_back(check);
        }
    }
    if (cfg.trace) {
        trace.selected = top->intervals;
        trace.delta_hats = top->delta_hats;
        trace.weights = allocation.weights;
    }
    ledger.all_verified = all_ok;
    return finish();
}

template <SamplingOracle Oracle>
RunReport localize(Oracle& env, const LcpConfig& cfg) {
    cfg.validate();
    const std::uint64_t start = env.queries_used();
    RunReport report;
    for (int k = initial_stage(cfg.n_targets); k <= cfg.max_stage; ++k) {
        report.ledgers.push_back(run_stage(env, cfg, k));
        const StageLedger& ledger = report.ledgers.back();
        report.stop_stage = k;
        if (ledger.all_verified) {
            report.estimates = ledger.candidates;
            std::sort(report.estimates.begin(), report.estimates.end());
            report.total_budget = env.queries_used() - start;
            return report;
        }
    }
    report.aborted = true;
    report.total_budget = env.queries_used() - start;
    return report;
}

}  // namespace cpbandit
