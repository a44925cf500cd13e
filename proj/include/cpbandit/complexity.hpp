#pragma once

// Instance-difficulty functionals: local spacings, energies, the detection
// and localization complexities, and the closed-form lower bounds built from
// them. All logarithms are natural.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpbandit/environment.hpp"

namespace cpbandit {

struct ComplexityProfile {
    /// theta_0..theta_m; theta_0 = theta_m = 1 by convention.
    std::vector<double> spacings_theta;
    /// s_i = min(theta_{i-1}, theta_i), i = 1..m.
    std::vector<double> local_spacings;
    /// E_i^2 = s_i * Delta_i^2.
    std::vector<double> energies_sq;
    double h_detect = 0.0;
    /// Entry N-1 holds H_localize^(N): sum of the N largest 1/Delta^2 in the
    /// decreasing rearrangement of jump magnitudes.
    std::vector<double> h_localize_by_n;

    double h_localize(std::size_t n) const {
        if (n == 0 || n > h_localize_by_n.size()) {
            throw std::out_of_range("h_localize: N must be in [1, m]");
        }
        return h_localize_by_n[n - 1];
    }
};

inline ComplexityProfile profile(const StepFunction& f) {
    const std::size_t m = f.size();
    if (m == 0) {
        throw std::invalid_argument("complexity profile requires at least one change point");
    }
    const auto& x = f.change_points();
    const auto& jumps = f.jumps();

    ComplexityProfile p;
    p.spacings_theta.assign(m + 1, 1.0);
    for (std::size_t i = 1; i < m; ++i) {
        p.spacings_theta[i] = x[i] - x[i - 1];
    }
    p.local_spacings.resize(m);
    p.energies_sq.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        p.local_spacings[i] = std::min(p.spacings_theta[i], p.spacings_theta[i + 1]);
        p.energies_sq[i] = p.local_spacings[i] * jumps[i] * jumps[i];
        p.h_detect = std::max(p.h_detect, 1.0 / p.energies_sq[i]);
    }

    std::vector<double> magnitudes(m);
    std::transform(jumps.begin(), jumps.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
    p.h_localize_by_n.resize(m);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        running += 1.0 / (magnitudes[i] * magnitudes[i]);
        p.h_localize_by_n[i] = running;
    }
    return p;
}

inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

namespace detail {

inline double localization_tail(const ComplexityProfile& p, const std::vector<double>& jumps, double eta) {
    double tail = 0.0;
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        tail += log_plus(p.local_spacings[i] / (16.0 * eta)) / (jumps[i] * jumps[i]);
    }
    return tail;
}

}  // namespace detail

/// Value of the high-probability lower bound for N = m:
///   1/4 H_detect ln(1/(8 delta)) + 1/2 H_localize ln(1/(8 delta))
///   + 1/2 sum_i Delta_i^-2 log+(s_i / (16 eta)).
/// The bound holds for some instance within constant factors of the given
/// one; it is evaluated here at the given instance.
inline double lower_bound_quantile(const ComplexityProfile& p, const std::vector<double>& jumps,
                                   double delta, double eta) {
    if (!(delta > 0.0 && delta < 0.25)) {
        throw std::invalid_argument("lower_bound_quantile: delta must lie in (0, 1/4)");
    }
    if (!(eta > 0.0 && eta < 0.125)) {
        throw std::invalid_argument("lower_bound_quantile: eta must lie in (0, 1/8)");
    }
    if (jumps.size() != p.local_spacings.size()) {
        throw std::invalid_argument("lower_bound_quantile: jumps do not match the profile");
    }
    const double confidence = std::log(1.0 / (8.0 * delta));
    return 0.25 * p.h_detect * confidence + 0.5 * p.h_localize(jumps.size()) * confidence +
           0.5 * detail::localization_tail(p, jumps, eta);
}

struct ExpectationBound {
    /// c * (H_detect + H_localize ln(1/(4 delta)) + sum_i Delta_i^-2 log+(s_i/(16 eta))).
    double value = 0.0;
    /// The multiplier c; the true constant is unspecified.
    double constant = 1.0;
};

/// Requires every interior spacing theta_i > 2 eta; otherwise throws
/// std::invalid_argument naming the first offending index.
inline ExpectationBound expectation_lower_bound(const ComplexityProfile& p, const std::vector<double>& jumps,
                                                double delta, double eta, double constant = 1.0) {
    if (!(delta > 0.0 && delta < 1.0 / 16.0)) {
        throw std::invalid_argument("expectation_lower_bound: delta must lie in (0, 1/16)");
    }
    if (!(eta > 0.0 && eta < 0.125)) {
        throw std::invalid_argument("expectation_lower_bound: eta must lie in (0, 1/8)");
    }
    if (jumps.size() != p.local_spacings.size()) {
        throw std::invalid_argument("expectation_lower_bound: jumps do not match the profile");
    }
    const std::size_t m = jumps.size();
    for (std::size_t i = 1; i < m; ++i) {
        if (!(p.spacings_theta[i] > 2.0 * eta)) {
            throw std::invalid_argument("expectation_lower_bound: spacing theta_" + std::to_string(i) +
                                        " must exceed 2*eta");
        }
    }
    const double value = p.h_detect + p.h_localize(m) * std::log(1.0 / (4.0 * delta)) +
                         detail::localization_tail(p, jumps, eta);
    return {constant * value, constant};
}

}  // namespace cpbandit
