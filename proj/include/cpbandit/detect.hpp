#pragma once

// Multiscale dyadic detection of intervals that contain change points.
//
// At depth d the unit interval is split into 2^d cells; every cell endpoint
// is sampled T_d times and a cell is flagged when the endpoint means differ by
// more than a Hoeffding threshold beta_d that is union-bounded over depths and
// endpoints. Flagged cells replace any coarser flagged cell that contains
// them, so the output keeps the finest evidence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cpbandit/environment.hpp"

namespace cpbandit {

struct DetectionConfig {
    double delta = 0.05;
    std::uint64_t budget = 1;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) {
            throw std::invalid_argument("detection delta must lie in (0, 1)");
        }
        if (budget < 1) {
            throw std::invalid_argument("detection budget must be >= 1");
        }
    }
};

struct DepthPlan {
    int depth = 0;
    std::uint64_t cells = 0;             // n_d = 2^d
    std::uint64_t samples_per_point = 0; // T_d
    double threshold = 0.0;              // beta_d, +inf when T_d == 0
};

struct DepthSchedule {
    int max_depth = 0;
    std::vector<DepthPlan> depths;

    bool empty() const noexcept { return depths.empty(); }
    /// sum_d T_d (n_d + 1).
    std::uint64_t total_queries() const noexcept {
        std::uint64_t total = 0;
        for (const auto& plan : depths) {
            total += plan.samples_per_point * (plan.cells + 1);
        }
        return total;
    }
};

/// d_max = floor(log2(T / ln(1/delta))); empty when d_max < 1.
inline DepthSchedule depth_schedule(std::uint64_t budget, double delta) {
    DetectionConfig{delta, budget}.validate();
    DepthSchedule schedule;
    const double ratio = static_cast<double>(budget) / std::log(1.0 / delta);
    const double levels = std::floor(std::log2(ratio));
    // Dyadic endpoints i / 2^d are exact in double precision only up to d = 52.
    if (!(levels >= 1.0)) {
        return schedule;
    }
    schedule.max_depth = static_cast<int>(std::min(levels, 52.0));
    const auto max_depth = static_cast<std::uint64_t>(schedule.max_depth);
    for (int d = 1; d <= schedule.max_depth; ++d) {
        DepthPlan plan;
        plan.depth = d;
        plan.cells = std::uint64_t{1} << d;
        plan.samples_per_point = budget / (max_depth * (plan.cells + 1));
        if (plan.samples_per_point == 0) {
            plan.threshold = std::numeric_limits<double>::infinity();
        } else {
            plan.threshold = std::sqrt(8.0 / static_cast<double>(plan.samples_per_point) *
                                       std::log(2.0 * static_cast<double>(max_depth * (plan.cells + 1)) / delta));
        }
        schedule.depths.push_back(plan);
    }
    return schedule;
}

struct DepthStats {
    DepthPlan plan;
    std::uint64_t flags = 0;
};

struct DetectionResult {
    /// Sorted by left endpoint; pairwise disjoint interiors, none nested.
    std::vector<Interval> intervals;
    std::vector<DepthStats> per_depth;
    std::uint64_t queries = 0;
};

namespace detail {

/// Removes every stored interval containing `cell`, then inserts `cell` in order.
inline void insert_pruned(std::vector<Interval>& intervals, const Interval& cell) {
    std::erase_if(intervals, [&](const Interval& existing) { return existing.contains(cell); });
    const auto pos = std::lower_bound(intervals.begin(), intervals.end(), cell,
                                      [](const Interval& a, const Interval& b) { return a.left() < b.left(); });
    intervals.insert(pos, cell);
}

}  // namespace detail

template <SamplingOracle Oracle>
DetectionResult detect_intervals(Oracle& env, const DetectionConfig& cfg) {
    cfg.validate();
    const std::uint64_t start = env.queries_used();
    const DepthSchedule schedule = depth_schedule(cfg.budget, cfg.delta);

    DetectionResult result;
    std::vector<double> means;
    for (const DepthPlan& plan : schedule.depths) {
        DepthStats stats{plan, 0};
        const double width = 1.0 / static_cast<double>(plan.cells);
        means.assign(plan.cells + 1, 0.0);
        for (std::uint64_t i = 0; i <= plan.cells; ++i) {
            means[i] = env.sample_mean(static_cast<double>(i) * width, plan.samples_per_point);
        }
        if (plan.samples_per_point > 0) {
            for (std::uint64_t i = 1; i <= plan.cells; ++i) {
                if (std::abs(means[i] - means[i - 1]) > plan.threshold) {
                    ++stats.flags;
                    detail::insert_pruned(result.intervals, Interval(static_cast<double>(i - 1) * width,
                                                                     static_cast<double>(i) * width));
                }
            }
        }
        result.per_depth.push_back(stats);
    }
    result.queries = env.queries_used() - start;
    return result;
}

}  // namespace cpbandit
