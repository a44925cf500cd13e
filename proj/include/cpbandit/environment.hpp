#pragma once

// Problem instances: a piecewise-constant function on [0,1], the additive
// noise model, and the sampling oracle through which every algorithm in this
// library observes the function.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpbandit/random.hpp"

namespace cpbandit {

class Interval {
public:
    Interval(double left, double right) : left_(left), right_(right) {
        if (!(left >= 0.0 && left < right && right <= 1.0)) {
            std::ostringstream os;
            os << "interval [" << left << ", " << right << "] violates 0 <= left < right <= 1";
            throw std::invalid_argument(os.str());
        }
    }

    double left() const noexcept { return left_; }
    double right() const noexcept { return right_; }
    double length() const noexcept { return right_ - left_; }
    double midpoint() const noexcept { return 0.5 * (left_ + right_); }

    bool contains(double x) const noexcept { return left_ <= x && x <= right_; }
    bool contains(const Interval& other) const noexcept {
        return left_ <= other.left_ && other.right_ <= right_;
    }
    /// True when the open interiors overlap.
    bool overlaps(const Interval& other) const noexcept {
        return left_ < other.right_ && other.left_ < right_;
    }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double left_;
    double right_;
};

/// f(x) = baseline + sum of jumps[i] over change points x_i <= x.
class StepFunction {
public:
    StepFunction(double baseline, std::vector<double> change_points, std::vector<double> jumps)
        : baseline_(baseline), change_points_(std::move(change_points)), jumps_(std::move(jumps)) {
        validate();
        levels_.reserve(jumps_.size() + 1);
        double level = baseline_;
        levels_.push_back(level);
        for (double jump : jumps_) {
            level += jump;
            levels_.push_back(level);
        }
    }

    double baseline() const noexcept { return baseline_; }
    const std::vector<double>& change_points() const noexcept { return change_points_; }
    const std::vector<double>& jumps() const noexcept { return jumps_; }
    std::size_t size() const noexcept { return change_points_.size(); }

    /// Right-continuous at every change point; throws std::domain_error outside [0,1].
    double operator()(double x) const {
        if (!(x >= 0.0 && x <= 1.0)) {
            std::ostringstream os;
            os << "query point " << x << " outside [0, 1]";
            throw std::domain_error(os.str());
        }
        const auto active = std::upper_bound(change_points_.begin(), change_points_.end(), x) -
                            change_points_.begin();
        return levels_[static_cast<std::size_t>(active)];
    }

private:
    void validate() const {
        if (!std::isfinite(baseline_)) {
            throw std::invalid_argument("baseline must be finite");
        }
        if (change_points_.size() != jumps_.size()) {
            throw std::invalid_argument("change_points and jumps must have the same length");
        }
        for (std::size_t i = 0; i < change_points_.size(); ++i) {
            const double x = change_points_[i];
            if (!(x > 0.0 && x < 1.0)) {
                throw std::invalid_argument("change_points[" + std::to_string(i) +
                                            "] must lie in the open interval (0, 1)");
            }
            if (i > 0 && !(change_points_[i - 1] < x)) {
                throw std::invalid_argument("change_points must be strictly increasing (index " +
                                            std::to_string(i) + ")");
            }
            const double jump = jumps_[i];
            if (!std::isfinite(jump) || jump == 0.0) {
                throw std::invalid_argument("jumps[" + std::to_string(i) + "] must be nonzero");
            }
            if (std::abs(jump) > 1.0) {
                throw std::invalid_argument("jumps[" + std::to_string(i) + "] must satisfy |jump| <= 1");
            }
        }
    }

    double baseline_;
    std::vector<double> change_points_;
    std::vector<double> jumps_;
    std::vector<double> levels_;
};

inline double evaluate(const StepFunction& f, double x) { return f(x); }

/// f(r) - f(l) across the interval.
inline double interval_jump(const StepFunction& f, const Interval& interval) {
    return f(interval.right()) - f(interval.left());
}

class NoiseModel {
public:
    enum class Kind { gaussian, zero, bounded };

    static NoiseModel gaussian(double sigma = 1.0) {
        if (!(sigma >= 0.0 && std::isfinite(sigma))) {
            throw std::invalid_argument("gaussian noise requires sigma >= 0");
        }
        return NoiseModel(Kind::gaussian, sigma);
    }
    static NoiseModel zero() { return NoiseModel(Kind::zero, 0.0); }
    /// Uniform on [-half_width, half_width].
    static NoiseModel bounded(double half_width) {
        if (!(half_width >= 0.0 && std::isfinite(half_width))) {
            throw std::invalid_argument("bounded noise requires half_width >= 0");
        }
        return NoiseModel(Kind::bounded, half_width);
    }

    Kind kind() const noexcept { return kind_; }
    /// sigma for gaussian, half-width for bounded, 0 for zero.
    double scale() const noexcept { return scale_; }
    bool is_subgaussian_1() const noexcept { return scale_ <= 1.0; }

    double draw(RandomStream& rng) const {
        switch (kind_) {
            case Kind::gaussian:
                return scale_ * rng.normal();
            case Kind::bounded:
                return rng.uniform(-scale_, scale_);
            case Kind::zero:
                break;
        }
        return 0.0;
    }

private:
    NoiseModel(Kind kind, double scale) : kind_(kind), scale_(scale) {}

    Kind kind_;
    double scale_;
};

/// Anything that can be queried at a point of [0,1] and counts its queries.
template <class O>
concept SamplingOracle = requires(O& oracle, double x, std::uint64_t n) {
    { oracle.sample(x) } -> std::convertible_to<double>;
    { oracle.sample_mean(x, n) } -> std::convertible_to<double>;
    { oracle.queries_used() } -> std::convertible_to<std::uint64_t>;
};

/// Simulated bandit environment: noisy evaluations of a step function.
///
/// Single-threaded. Two environments built from the same function, noise and
/// seed return identical observations for identical query sequences.
class Environment {
public:
    Environment(StepFunction function, NoiseModel noise, std::uint64_t seed)
        : function_(std::move(function)), noise_(noise), seed_(seed), rng_(seed) {}

    const StepFunction& function() const noexcept { return function_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t queries_used() const noexcept { return queries_; }

    double sample(double x) {
        const double value = function_(x);
        ++queries_;
        return value + noise_.draw(rng_);
    }

    /// Mean of n fresh samples at x; identical to averaging n calls to sample(x).
    /// Returns 0 for n == 0 without consuming budget.
    double sample_mean(double x, std::uint64_t n) {
        if (n == 0) {
            return 0.0;
        }
        const double value = function_(x);
        double sum = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            sum += value + noise_.draw(rng_);
        }
        queries_ += n;
        return sum / static_cast<double>(n);
    }

    /// Fresh environment over the same instance with its own stream.
    Environment reseeded(std::uint64_t seed) const { return Environment(function_, noise_, seed); }

private:
    StepFunction function_;
    NoiseModel noise_;
    std::uint64_t seed_;
    RandomStream rng_;
    std::uint64_t queries_ = 0;
};

static_assert(SamplingOracle<Environment>);

}  // namespace cpbandit
