#pragma once

// Adaptive estimation of jump magnitudes over candidate intervals.
//
// Round k gives every still-active interval 2^(k-1) fresh samples per
// endpoint and accepts it once the round's own endpoint difference clears a
// threshold that shrinks geometrically in k. Large jumps are accepted early;
// the loop ends after N acceptances or when the next round would exceed the
// budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpbandit/environment.hpp"

namespace cpbandit {

/// sqrt(2^-(k-5) ln(pi^2 M k^2 / (3 delta))).
inline double acceptance_threshold(int round, std::size_t interval_count, double delta) {
    if (round < 1 || interval_count < 1) {
        throw std::invalid_argument("acceptance_threshold: round and interval count must be >= 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("acceptance_threshold: delta must lie in (0, 1)");
    }
    const double k = round;
    const double scale = std::ldexp(1.0, 5 - round);
    return std::sqrt(scale * std::log(std::numbers::pi * std::numbers::pi * static_cast<double>(interval_count) *
                                      k * k / (3.0 * delta)));
}

struct JumpEstimate {
    Interval interval;
    double delta_hat;
    int accepted_round;
};

struct JumpEstimationResult {
    /// Sorted by delta_hat descending, ties by left endpoint ascending.
    std::vector<JumpEstimate> accepted;
    std::uint64_t queries = 0;
    /// The budget guard ended the loop before N acceptances.
    bool exhausted = false;
    int rounds = 0;
};

namespace detail {

inline bool stronger_estimate(const JumpEstimate& a, const JumpEstimate& b) {
    if (a.delta_hat != b.delta_hat) {
        return a.delta_hat > b.delta_hat;
    }
    return a.interval.left() < b.interval.left();
}

}  // namespace detail

template <SamplingOracle Oracle>
JumpEstimationResult estimate_jumps(Oracle& env, std::vector<Interval> intervals, double delta,
                                    std::uint64_t budget, std::size_t n_targets) {
    if (intervals.empty()) {
        throw std::invalid_argument("estimate_jumps: at least one interval is required");
    }
    if (n_targets < 1) {
        throw std::invalid_argument("estimate_jumps: N must be >= 1");
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.left() < b.left(); });

    const std::uint64_t start = env.queries_used();
    const std::size_t total = intervals.size();
    std::vector<Interval> active = std::move(intervals);
    JumpEstimationResult result;
    std::uint64_t spent = 0;

    // 2^k must stay representable; past k = 62 no budget can afford a round.
    for (int k = 1; k <= 62; ++k) {
        const std::uint64_t round_cost = std::uint64_t{1} << k;
        if (result.accepted.size() >= n_targets || active.empty()) {
            break;
        }
        // spent + |active| * 2^k <= budget, written to avoid overflow.
        if (active.size() > (budget - spent) / round_cost) {
            result.exhausted = true;
            break;
        }
        const std::uint64_t per_endpoint = round_cost / 2;
        const double threshold = acceptance_threshold(k, total, delta);
        std::vector<Interval> still_active;
        for (const Interval& interval : active) {
            const double left_mean = env.sample_mean(interval.left(), per_endpoint);
            const double right_mean = env.sample_mean(interval.right(), per_endpoint);
            const double estimate = std::abs(right_mean - left_mean);
            if (estimate >= threshold) {
                result.accepted.push_back({interval, estimate, k});
            } else {
                still_active.push_back(interval);
            }
            spent += round_cost;
        }
        active = std::move(still_active);
        result.rounds = k;
    }

    std::stable_sort(result.accepted.begin(), result.accepted.end(), detail::stronger_estimate);
    result.queries = env.queries_used() - start;
    return result;
}

struct TopEstimates {
    std::vector<Interval> intervals;
    std::vector<double> delta_hats;
};

/// The N strongest accepted estimates; std::nullopt when fewer than N exist.
inline std::optional<TopEstimates> top_n(const JumpEstimationResult& result, std::size_t n) {
    if (result.accepted.size() < n) {
        return std::nullopt;
    }
    std::vector<JumpEstimate> ranked = result.accepted;
    std::stable_sort(ranked.begin(), ranked.end(), detail::stronger_estimate);
    TopEstimates top;
    for (std::size_t v = 0; v < n; ++v) {
        top.intervals.push_back(ranked[v].interval);
        top.delta_hats.push_back(ranked[v].delta_hat);
    }
    return top;
}

}  // namespace cpbandit
