#pragma once

// Comparison plumbing: the continuous <-> discrete bandit adapter and a
// non-adaptive uniform-grid detector.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cpbandit/environment.hpp"

namespace cpbandit {

/// K = floor(1/eta) + 1 arms; arm k (1-based) sits at (k - 1) eta.
///
/// When 1/eta is not an integer the region ((K-1) eta, 1] has no arm, and a
/// change point there is not covered by the mapping.
class DiscreteBanditView {
public:
    explicit DiscreteBanditView(double eta) : eta_(eta) {
        if (!(eta > 0.0 && eta < 1.0)) {
            throw std::invalid_argument("discretize: eta must lie in (0, 1)");
        }
        arm_count_ = static_cast<std::size_t>(std::floor(1.0 / eta)) + 1;
    }

    double eta() const noexcept { return eta_; }
    std::size_t arm_count() const noexcept { return arm_count_; }

    double position(std::size_t arm) const {
        if (arm < 1 || arm > arm_count_) {
            throw std::out_of_range("discrete arm index out of range");
        }
        return static_cast<double>(arm - 1) * eta_;
    }

    /// A change detected between arms k and k+1 maps back to (k - 1) eta,
    /// within eta of the continuous change point in ((k-1) eta, k eta].
    double map_back(std::size_t arm) const { return position(arm); }

    template <SamplingOracle Oracle>
    double pull(Oracle& env, std::size_t arm) const {
        return env.sample(position(arm));
    }

private:
    double eta_;
    std::size_t arm_count_ = 0;
};

inline DiscreteBanditView discretize(double eta) { return DiscreteBanditView(eta); }

/// Step function whose value on [(k-1)/K, k/K) is means[k-1] (the last cell is closed).
inline StepFunction step_function_from_arms(const std::vector<double>& means) {
    if (means.empty()) {
        throw std::invalid_argument("step_function_from_arms: no arms");
    }
    const double k_arms = static_cast<double>(means.size());
    std::vector<double> positions;
    std::vector<double> jumps;
    for (std::size_t k = 1; k < means.size(); ++k) {
        if (means[k] != means[k - 1]) {
            positions.push_back(static_cast<double>(k) / k_arms);
            jumps.push_back(means[k] - means[k - 1]);
        }
    }
    return StepFunction(means.front(), std::move(positions), std::move(jumps));
}

/// Index k such that the change between arms k and k+1 (1-based) sits at k/K.
/// Exact whenever |estimate - k/K| <= eta < 1/(2K).
inline std::size_t arm_boundary_from_estimate(double estimate, std::size_t arm_count) {
    return static_cast<std::size_t>(std::llround(estimate * static_cast<double>(arm_count)));
}

struct UniformBatchResult {
    std::vector<Interval> intervals;
    double threshold = 0.0;
    std::uint64_t queries = 0;
};

inline double uniform_batch_threshold(std::size_t grid_size, std::uint64_t reps_per_point, double delta) {
    return std::sqrt(4.0 / static_cast<double>(reps_per_point) *
                     std::log(2.0 * static_cast<double>(grid_size) / delta));
}

/// Samples the grid i / (grid_size - 1) uniformly and flags adjacent cells whose
/// endpoint means differ by more than sqrt((4/reps) ln(2 grid_size / delta)).
template <SamplingOracle Oracle>
UniformBatchResult uniform_batch_baseline(Oracle& env, std::size_t grid_size, std::uint64_t reps_per_point,
                                          double delta) {
    if (grid_size < 2) {
        throw std::invalid_argument("uniform baseline: grid_size must be >= 2");
    }
    if (reps_per_point < 1) {
        throw std::invalid_argument("uniform baseline: reps_per_point must be >= 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("uniform baseline: delta must lie in (0, 1)");
    }
    UniformBatchResult out;
    out.threshold = uniform_batch_threshold(grid_size, reps_per_point, delta);
    const std::uint64_t start = env.queries_used();
    const double step = 1.0 / static_cast<double>(grid_size - 1);
    std::vector<double> means(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double x = i + 1 == grid_size ? 1.0 : static_cast<double>(i) * step;
        means[i] = env.sample_mean(x, reps_per_point);
    }
    for (std::size_t i = 1; i < grid_size; ++i) {
        if (std::abs(means[i] - means[i - 1]) > out.threshold) {
            const double right = i + 1 == grid_size ? 1.0 : static_cast<double>(i) * step;
            out.intervals.emplace_back(static_cast<double>(i - 1) * step, right);
        }
    }
    out.queries = env.queries_used() - start;
    return out;
}

}  // namespace cpbandit
