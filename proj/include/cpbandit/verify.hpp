#pragma once

// Two-sample test certifying a jump between two query points.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "cpbandit/environment.hpp"

namespace cpbandit {

/// Numerator of the verification threshold sqrt(C / T * ln(2 / delta)).
/// Algorithm-level default is 16 (total budget T, T/2 samples per point).
inline constexpr double kVerifyThresholdConstant = 16.0;

struct VerifyOutcome {
    bool detection = false;
    double statistic = 0.0;
    double threshold = 0.0;
    std::uint64_t queries = 0;
};

inline double verify_threshold(std::uint64_t budget, double delta, double constant = kVerifyThresholdConstant) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("verify: delta must lie in (0, 1)");
    }
    if (budget == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(constant / static_cast<double>(budget) * std::log(2.0 / delta));
}

template <SamplingOracle Oracle>
VerifyOutcome verify_cp(Oracle& env, double x_minus, double x_plus, double delta, std::uint64_t budget,
                        double constant = kVerifyThresholdConstant) {
    if (!(0.0 <= x_minus && x_minus <= x_plus && x_plus <= 1.0)) {
        throw std::invalid_argument("verify: requires 0 <= x_minus <= x_plus <= 1");
    }
    VerifyOutcome out;
    out.threshold = verify_threshold(budget, delta, constant);
    if (budget < 2) {
        return out;
    }
    const std::uint64_t start = env.queries_used();
    const std::uint64_t per_point = budget / 2;
    const double minus_mean = env.sample_mean(x_minus, per_point);
    const double plus_mean = env.sample_mean(x_plus, per_point);
    out.statistic = std::abs(plus_mean - minus_mean);
    out.queries = env.queries_used() - start;
    out.detection = out.statistic > out.threshold;
    return out;
}

}  // namespace cpbandit
