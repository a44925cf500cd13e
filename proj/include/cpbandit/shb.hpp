#pragma once

// Fixed-budget noisy binary search with backtracking (sequential halving with
// backtracking) for a single change point inside a known interval.
//
// The search window is the 5-tuple of arms (l(I), l, c, r, r(I)) whose outer
// arms never move. Each round samples all five arms tau times. If the jump
// looks like it sits outside [l, r] the window retreats to its parent;
// otherwise it halves toward the side of c with the larger mean difference.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cpbandit/environment.hpp"

namespace cpbandit {

struct ShbWindow {
    double outer_left;
    double left;
    double center;
    double right;
    double outer_right;

    std::array<double, 5> arms() const { return {outer_left, left, center, right, outer_right}; }
};

enum class ShbDecision { backtrack, zoom_right, zoom_left };

inline const char* to_string(ShbDecision d) {
    switch (d) {
        case ShbDecision::backtrack:
            return "backtrack";
        case ShbDecision::zoom_right:
            return "zoom_right";
        case ShbDecision::zoom_left:
            return "zoom_left";
    }
    return "?";
}

/// One round of the search, as seen by an observer.
struct ShbRound {
    int round;
    ShbWindow window;
    std::array<double, 5> means;
    ShbDecision decision;
};

struct ShbResult {
    double estimate = 0.0;
    std::uint64_t queries = 0;
    int rounds = 0;
    std::uint64_t samples_per_arm = 0;
    /// |I| <= 2 eta: midpoint returned without sampling.
    bool early_exit = false;
    /// floor(T / (5 d_max)) == 0: midpoint returned without sampling.
    bool underfunded = false;
};

/// d_max = ceil(6 ln(width / eta)).
inline int shb_round_count(double width, double eta) {
    if (!(eta > 0.0) || !(width > 0.0)) {
        throw std::invalid_argument("shb_round_count: width and eta must be positive");
    }
    return static_cast<int>(std::ceil(6.0 * std::log(width / eta)));
}

/// Three-way decision from the five arm means (l(I), l, c, r, r(I)).
/// Ties between the middle and outside statistics resolve to backtracking.
inline ShbDecision shb_decide(const std::array<double, 5>& y) {
    const double middle = std::abs(0.5 * (y[0] + y[1]) - 0.5 * (y[3] + y[4]));
    const double outside = std::max(std::abs((y[0] + y[1] + y[3]) / 3.0 - y[4]),
                                    std::abs(y[0] - (y[1] + y[3] + y[4]) / 3.0));
    if (outside >= middle) {
        return ShbDecision::backtrack;
    }
    if (std::abs(y[1] - y[2]) <= std::abs(y[2] - y[3])) {
        return ShbDecision::zoom_right;
    }
    return ShbDecision::zoom_left;
}

struct NoShbTrace {
    void operator()(const ShbRound&) const noexcept {}
};

template <SamplingOracle Oracle, class Observer = NoShbTrace>
ShbResult shb(Oracle& env, const Interval& interval, std::uint64_t budget, double eta, Observer&& observe = {}) {
    if (!(eta > 0.0)) {
        throw std::invalid_argument("shb: eta must be positive");
    }
    ShbResult result;
    result.estimate = interval.midpoint();
    if (interval.length() <= 2.0 * eta) {
        result.early_exit = true;
        return result;
    }
    const int rounds = shb_round_count(interval.length(), eta);
    const std::uint64_t tau = budget / (5 * static_cast<std::uint64_t>(rounds));
    result.samples_per_arm = tau;
    if (tau == 0) {
        result.underfunded = true;
        return result;
    }

    const std::uint64_t start = env.queries_used();
    ShbWindow window{interval.left(), interval.left(), interval.midpoint(), interval.right(), interval.right()};
    std::vector<ShbWindow> history;
    history.reserve(static_cast<std::size_t>(rounds));
    for (int d = 1; d <= rounds; ++d) {
        const auto arms = window.arms();
        std::array<double, 5> means{};
        for (std::size_t a = 0; a < arms.size(); ++a) {
            means[a] = env.sample_mean(arms[a], tau);
        }
        const ShbDecision decision = shb_decide(means);
        observe(ShbRound{d, window, means, decision});
        switch (decision) {
            case ShbDecision::backtrack:
                // The root is its own parent.
                if (!history.empty()) {
                    window = history.back();
                    history.pop_back();
                }
                break;
            case ShbDecision::zoom_right:
                history.push_back(window);
                window = {window.outer_left, window.center, 0.5 * (window.center + window.right), window.right,
                          window.outer_right};
                break;
            case ShbDecision::zoom_left:
                history.push_back(window);
                window = {window.outer_left, window.left, 0.5 * (window.left + window.center), window.center,
                          window.outer_right};
                break;
        }
    }
    result.estimate = window.center;
    result.rounds = rounds;
    result.queries = env.queries_used() - start;
    return result;
}

}  // namespace cpbandit
