#pragma once

// Monte-Carlo experiment runner.
//
// Every replicate r draws its instance and its noise stream from seeds
// derived from (master_seed, r) only, so all sweep values see the same
// instance draws and the aggregate is independent of the worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cpbandit/environment.hpp"
#include "cpbandit/lcp.hpp"
#include "cpbandit/random.hpp"

namespace cpbandit {

// ---------------------------------------------------------------------------
// Success scoring

/// True iff there are indices i_1 < ... < i_N with |estimate_l - x_{i_l}| <= eta.
/// Greedy on sorted sequences: each estimate takes the leftmost admissible
/// unused change point, which is optimal for matching on a line.
inline bool score_success(std::vector<double> estimates, const std::vector<double>& change_points, double eta) {
    std::sort(estimates.begin(), estimates.end());
    std::size_t next = 0;
    for (double c : estimates) {
        while (next < change_points.size() && change_points[next] < c && std::abs(c - change_points[next]) > eta) {
            ++next;
        }
        if (next == change_points.size() || std::abs(c - change_points[next]) > eta) {
            return false;
        }
        ++next;
    }
    return true;
}

inline bool score_success(const std::vector<double>& estimates, const StepFunction& truth, double eta) {
    return score_success(estimates, truth.change_points(), eta);
}

/// Nearest-rank quantile: the ceil(p n)-th smallest value (at least the first).
inline double nearest_rank_quantile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("quantile level must lie in [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

// ---------------------------------------------------------------------------
// Instance families

struct InstanceFamily {
    enum class Kind {
        /// x1 ~ U(0, 1/2), x2 = x1 + spacing, jumps (+jump, -jump).
        two_change_points,
        /// x1 ~ U(0, 1), jump +jump.
        single_change_point,
        /// count change points at i / (count + 1), jumps alternating +jump, -jump.
        alternating,
        /// The same function every replicate.
        fixed,
    };

    Kind kind = Kind::two_change_points;
    double spacing = 0.25;
    double jump = 1.0;
    std::size_t count = 2;
    double baseline = 0.0;
    std::optional<StepFunction> function;

    /// Throws std::invalid_argument when the draw violates an instance invariant.
    StepFunction draw(RandomStream& rng) const {
        switch (kind) {
            case Kind::two_change_points: {
                const double x1 = rng.uniform(0.0, 0.5);
                return StepFunction(baseline, {x1, x1 + spacing}, {jump, -jump});
            }
            case Kind::single_change_point:
                return StepFunction(baseline, {rng.uniform()}, {jump});
            case Kind::alternating: {
                std::vector<double> x(count);
                std::vector<double> d(count);
                for (std::size_t i = 0; i < count; ++i) {
                    x[i] = static_cast<double>(i + 1) / static_cast<double>(count + 1);
                    d[i] = i % 2 == 0 ? jump : -jump;
                }
                return StepFunction(baseline, std::move(x), std::move(d));
            }
            case Kind::fixed:
                if (!function) {
                    throw std::logic_error("fixed instance family without a function");
                }
                return *function;
        }
        throw std::logic_error("unknown instance family");
    }

    std::size_t change_point_count() const {
        switch (kind) {
            case Kind::two_change_points:
                return 2;
            case Kind::single_change_point:
                return 1;
            case Kind::alternating:
                return count;
            case Kind::fixed:
                return function ? function->size() : 0;
        }
        return 0;
    }
};

inline const char* to_string(InstanceFamily::Kind kind) {
    switch (kind) {
        case InstanceFamily::Kind::two_change_points:
            return "two_cp";
        case InstanceFamily::Kind::single_change_point:
            return "single_cp";
        case InstanceFamily::Kind::alternating:
            return "alternating";
        case InstanceFamily::Kind::fixed:
            return "fixed";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Experiment specification

enum class SweepParam { spacing, eta, delta, log_inv_delta };

inline const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::spacing:
            return "s";
        case SweepParam::eta:
            return "eta";
        case SweepParam::delta:
            return "delta";
        case SweepParam::log_inv_delta:
            return "log_inv_delta";
    }
    return "?";
}

inline SweepParam sweep_param_from_string(const std::string& name) {
    if (name == "s" || name == "spacing") return SweepParam::spacing;
    if (name == "eta") return SweepParam::eta;
    if (name == "delta") return SweepParam::delta;
    if (name == "log_inv_delta") return SweepParam::log_inv_delta;
    throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

struct ExperimentSpec {
    std::string name;
    InstanceFamily family;
    NoiseModel noise = NoiseModel::gaussian(1.0);
    SweepParam sweep = SweepParam::spacing;
    std::vector<double> sweep_values;
    std::size_t mc_runs = 200;
    LcpConfig algo;
    /// Use delta_explore = delta at every sweep value.
    bool explore_tracks_delta = false;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (mc_runs < 1) {
            throw std::invalid_argument("experiment: mc_runs must be >= 1");
        }
        if (sweep_values.empty()) {
            throw std::invalid_argument("experiment: sweep needs at least one value");
        }
        for (double v : sweep_values) {
            const auto [family_at, cfg_at] = at(v);
            cfg_at.validate();
            if (family_at.kind == InstanceFamily::Kind::two_change_points &&
                !(family_at.spacing > 0.0 && family_at.spacing <= 0.5)) {
                throw std::invalid_argument("experiment: two-change-point spacing must lie in (0, 1/2]");
            }
            if (cfg_at.n_targets > family_at.change_point_count()) {
                throw std::invalid_argument("experiment: n_targets exceeds the number of change points");
            }
        }
    }

    struct Point {
        InstanceFamily family;
        LcpConfig algo;
    };

    /// Family and algorithm configuration at one sweep value.
    Point at(double value) const {
        Point p{family, algo};
        switch (sweep) {
            case SweepParam::spacing:
                p.family.spacing = value;
                break;
            case SweepParam::eta:
                p.algo.eta = value;
                break;
            case SweepParam::delta:
                p.algo.delta = value;
                break;
            case SweepParam::log_inv_delta:
                p.algo.delta = std::exp(-value);
                break;
        }
        if (explore_tracks_delta) {
            p.algo.delta_explore = p.algo.delta;
        }
        return p;
    }
};

// ---------------------------------------------------------------------------
// Results

struct ReplicateOutcome {
    std::uint64_t budget = 0;
    bool success = false;
    bool aborted = false;
    int stop_stage = 0;
    std::size_t redraws = 0;
    double runtime_seconds = 0.0;
};

struct SweepPoint {
    double value = 0.0;
    double mean_budget = 0.0;
    double q05_budget = 0.0;
    double q95_budget = 0.0;
    double success_rate = 0.0;
    double mean_runtime = 0.0;
    std::size_t mc_runs = 0;
    std::size_t redraws = 0;
    std::size_t aborted = 0;
    bool outside_guarantee_regime = false;
    std::vector<ReplicateOutcome> replicates;
};

struct SweepResult {
    std::string name;
    SweepParam sweep = SweepParam::spacing;
    std::uint64_t master_seed = 0;
    std::vector<SweepPoint> points;
};

/// Seed of replicate r; independent of the sweep value.
inline std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t replicate) {
    return derive_seed(master_seed, replicate);
}

constexpr std::size_t kMaxRedraws = 1000;

/// Runs one replicate, checking that the query ledger closes.
inline ReplicateOutcome run_replicate(const InstanceFamily& family, const NoiseModel& noise, const LcpConfig& cfg,
                                      std::uint64_t seed) {
    ReplicateOutcome out;
    RandomStream instance_rng(derive_seed(seed, 0));
    std::optional<StepFunction> truth;
    while (!truth) {
        try {
            truth.emplace(family.draw(instance_rng));
        } catch (const std::invalid_argument&) {
            if (++out.redraws > kMaxRedraws) {
                throw std::runtime_error("instance generator keeps producing invalid instances");
            }
        }
    }
    if (truth->size() < cfg.n_targets) {
        throw std::runtime_error("instance has fewer change points than n_targets");
    }

    Environment env(*truth, noise, derive_seed(seed, 1));
    const auto t0 = std::chrono::steady_clock::now();
    const RunReport report = localize(env, cfg);
    out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::uint64_t ledger_total = 0;
    for (const auto& ledger : report.ledgers) {
        ledger_total += ledger.total_queries();
    }
    if (env.queries_used() != report.total_budget || ledger_total != report.total_budget) {
        throw std::runtime_error("budget ledger does not close for replicate seed " + std::to_string(seed));
    }
    out.budget = report.total_budget;
    out.aborted = report.aborted;
    out.stop_stage = report.stop_stage;
    out.success = !report.aborted && score_success(report.estimates, *truth, cfg.eta);
    return out;
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

inline SweepPoint aggregate(double value, std::vector<ReplicateOutcome> replicates, bool outside_regime) {
    SweepPoint point;
    point.value = value;
    point.mc_runs = replicates.size();
    point.outside_guarantee_regime = outside_regime;
    std::vector<double> budgets;
    budgets.reserve(replicates.size());
    double budget_sum = 0.0;
    double runtime_sum = 0.0;
    std::size_t successes = 0;
    // Ordered reduction by replicate index.
    for (const auto& r : replicates) {
        budgets.push_back(static_cast<double>(r.budget));
        budget_sum += static_cast<double>(r.budget);
        runtime_sum += r.runtime_seconds;
        successes += r.success ? 1 : 0;
        point.redraws += r.redraws;
        point.aborted += r.aborted ? 1 : 0;
    }
    const auto n = static_cast<double>(replicates.size());
    point.mean_budget = budget_sum / n;
    point.mean_runtime = runtime_sum / n;
    point.success_rate = static_cast<double>(successes) / n;
    point.q05_budget = nearest_rank_quantile(budgets, 0.05);
    point.q95_budget = nearest_rank_quantile(budgets, 0.95);
    point.replicates = std::move(replicates);
    return point;
}

inline SweepResult run_experiment(const ExperimentSpec& spec, std::size_t threads = 1) {
    spec.validate();
    SweepResult result;
    result.name = spec.name;
    result.sweep = spec.sweep;
    result.master_seed = spec.master_seed;
    for (double value : spec.sweep_values) {
        const auto [family, cfg] = spec.at(value);
        std::vector<ReplicateOutcome> replicates(spec.mc_runs);
        detail::parallel_for(spec.mc_runs, threads, [&](std::size_t r) {
            replicates[r] = run_replicate(family, spec.noise, cfg, replicate_seed(spec.master_seed, r));
        });
        result.points.push_back(aggregate(value, std::move(replicates), !cfg.in_guarantee_regime()));
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV output: sweep_param,sweep_value,mean_budget,q05,q95,success_rate,mc_runs,seed

inline constexpr const char* kCsvHeader = "sweep_param,sweep_value,mean_budget,q05,q95,success_rate,mc_runs,seed";

inline std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
    return buffer;
}

inline void write_csv(std::ostream& os, const SweepResult& result) {
    os << kCsvHeader << '\n';
    for (const auto& p : result.points) {
        os << to_string(result.sweep) << ',' << format_number(p.value) << ',' << format_number(p.mean_budget) << ','
           << format_number(p.q05_budget) << ',' << format_number(p.q95_budget) << ','
           << format_number(p.success_rate) << ',' << p.mc_runs << ',' << result.master_seed << '\n';
    }
}

// ---------------------------------------------------------------------------
// Full-scale experiment presets.

constexpr std::size_t kDeskScaleRuns = 200;

inline std::vector<double> powers_of_two(int from_exponent, int to_exponent) {
    std::vector<double> values;
    const int step = from_exponent <= to_exponent ? 1 : -1;
    for (int e = from_exponent;; e += step) {
        values.push_back(std::ldexp(1.0, e));
        if (e == to_exponent) break;
    }
    return values;
}

inline std::vector<double> arithmetic(double from, double to, double step) {
    std::vector<double> values;
    for (double v = from; v <= to + 1e-9; v += step) values.push_back(v);
    return values;
}

inline std::vector<std::string> preset_names() { return {"exp1", "exp2", "exp3", "exp4", "exp5"}; }

/// Preset with its full-scale replicate count in mc_runs.
inline ExperimentSpec preset(const std::string& name) {
    ExperimentSpec spec;
    spec.name = name;
    spec.algo.delta = 0.05;
    spec.algo.delta_explore = 1.0;
    spec.mc_runs = 1000;
    if (name == "exp1") {
        // Spacing sweep, two opposite unit jumps.
        spec.family.kind = InstanceFamily::Kind::two_change_points;
        spec.algo.n_targets = 2;
        spec.algo.eta = std::ldexp(1.0, -11);
        spec.sweep = SweepParam::spacing;
        spec.sweep_values = powers_of_two(-6, -2);
    } else if (name == "exp2") {
        spec.family.kind = InstanceFamily::Kind::two_change_points;
        spec.family.spacing = 0.25;
        spec.algo.n_targets = 2;
        spec.algo.eta = std::ldexp(1.0, -8);
        spec.sweep = SweepParam::log_inv_delta;
        spec.sweep_values = arithmetic(20, 120, 10);
    } else if (name == "exp3") {
        spec.family.kind = InstanceFamily::Kind::two_change_points;
        spec.family.spacing = 0.25;
        spec.algo.n_targets = 2;
        spec.sweep = SweepParam::eta;
        spec.sweep_values = powers_of_two(-5, -11);
    } else if (name == "exp4") {
        spec.family.kind = InstanceFamily::Kind::single_change_point;
        spec.algo.n_targets = 1;
        spec.algo.eta = std::ldexp(1.0, -7);
        spec.sweep = SweepParam::log_inv_delta;
        spec.sweep_values = arithmetic(20, 120, 10);
    } else if (name == "exp5") {
        spec.family.kind = InstanceFamily::Kind::alternating;
        spec.family.count = 10;
        spec.algo.n_targets = 10;
        spec.algo.eta = 0.0025 * 0.5;
        spec.sweep = SweepParam::log_inv_delta;
        spec.sweep_values = arithmetic(20, 100, 20);
        spec.mc_runs = 100;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return spec;
}

}  // namespace cpbandit
