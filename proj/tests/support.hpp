#pragma once

#include <cmath>
#include <cstddef>

#include "cpbandit/environment.hpp"

namespace testing {

/// The canonical two-change-point instance used across suites.
inline cpbandit::StepFunction two_cp(double x1 = 0.3, double x2 = 0.55) {
    return cpbandit::StepFunction(0.0, {x1, x2}, {1.0, -1.0});
}

/// p + 3 binomial standard deviations at n trials.
inline double upper_slack(double p, std::size_t n) {
    return p + 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

inline double lower_slack(double p, std::size_t n) {
    return p - 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace testing
