#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "cpbandit/jumps.hpp"
#include "cpbandit/random.hpp"
#include "support.hpp"

using namespace cpbandit;
using Catch::Matchers::WithinAbs;

namespace {

StepFunction staircase() { return StepFunction(0.0, {0.3, 0.6}, {1.0, 0.5}); }

const std::vector<Interval> kIntervals{Interval(0.25, 0.375), Interval(0.5, 0.75)};

}  // namespace

TEST_CASE("acceptance threshold golden value") {
    CHECK_THAT(acceptance_threshold(5, 2, 0.1), WithinAbs(2.72129667281, 1e-9));
    CHECK_THAT(acceptance_threshold(8, 2, 0.1), WithinAbs(1.0214, 1e-4));
    CHECK_THAT(acceptance_threshold(9, 2, 0.1), WithinAbs(0.7323, 1e-4));
    CHECK_THAT(acceptance_threshold(10, 2, 0.1), WithinAbs(0.5242, 1e-4));
    CHECK_THAT(acceptance_threshold(11, 2, 0.1), WithinAbs(0.3746, 1e-4));
}

TEST_CASE("acceptance threshold is strictly decreasing in k") {
    for (std::size_t M : {1u, 2u, 10u, 1000u}) {
        for (double delta : {0.001, 0.0125, 0.1, 0.25}) {
            for (int k = 1; k < 40; ++k) {
                REQUIRE(acceptance_threshold(k + 1, M, delta) < acceptance_threshold(k, M, delta));
            }
        }
    }
}

TEST_CASE("doubling M adds ln 2 times 2^-(k-5) to the squared threshold") {
    for (int k = 1; k <= 20; ++k) {
        const double a = acceptance_threshold(k, 3, 0.05);
        const double b = acceptance_threshold(k, 6, 0.05);
        CHECK_THAT(b * b - a * a, WithinAbs(std::log(2.0) * std::ldexp(1.0, 5 - k), 1e-12 * b * b));
    }
}

TEST_CASE("zero-noise estimation accepts exact jumps at the predicted rounds") {
    Environment env(staircase(), NoiseModel::zero(), 1);
    const JumpEstimationResult r = estimate_jumps(env, kIntervals, 0.1, 100000, 2);
    REQUIRE(r.accepted.size() == 2);
    CHECK(r.accepted[0].interval == kIntervals[0]);
    CHECK(r.accepted[0].delta_hat == 1.0);
    CHECK(r.accepted[0].accepted_round == 9);
    CHECK(r.accepted[1].interval == kIntervals[1]);
    CHECK(r.accepted[1].delta_hat == 0.5);
    CHECK(r.accepted[1].accepted_round == 11);
    CHECK(r.queries == 5116);
    CHECK(env.queries_used() == 5116);
    CHECK_FALSE(r.exhausted);
    CHECK(r.rounds == 11);
}

TEST_CASE("input order does not matter") {
    Environment env(staircase(), NoiseModel::zero(), 1);
    const JumpEstimationResult r =
        estimate_jumps(env, std::vector<Interval>{kIntervals[1], kIntervals[0]}, 0.1, 100000, 2);
    REQUIRE(r.accepted.size() == 2);
    CHECK(r.accepted[0].interval == kIntervals[0]);
}

TEST_CASE("budget too small for round 1 leaves nothing accepted") {
    Environment env(staircase(), NoiseModel::zero(), 1);
    const JumpEstimationResult r = estimate_jumps(env, kIntervals, 0.1, 3, 2);
    CHECK(r.accepted.empty());
    CHECK(r.exhausted);
    CHECK(r.queries == 0);
}

TEST_CASE("the budget guard is never overshot") {
    Environment env(staircase(), NoiseModel::zero(), 1);
    for (std::uint64_t T : {4ull, 5ull, 100ull, 1000ull, 5115ull, 5116ull}) {
        const JumpEstimationResult r = estimate_jumps(env, kIntervals, 0.1, T, 2);
        CHECK(r.queries <= T);
        CHECK(r.exhausted == (T < 5116));
    }
}

TEST_CASE("constant function under zero noise never accepts") {
    Environment env(StepFunction(0.3, {}, {}), NoiseModel::zero(), 1);
    const JumpEstimationResult r = estimate_jumps(env, kIntervals, 0.1, 1u << 20, 1);
    CHECK(r.accepted.empty());
    CHECK(r.exhausted);
}

TEST_CASE("every accepted estimate cleared its own threshold") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Environment env(staircase(), NoiseModel::gaussian(1.0), derive_seed(41, seed));
        const std::vector<Interval> intervals{Interval(0.0, 0.25), Interval(0.25, 0.375), Interval(0.5, 0.75)};
        const JumpEstimationResult r = estimate_jumps(env, intervals, 0.1, 200000, 2);
        REQUIRE(r.queries <= 200000);
        REQUIRE(r.queries == env.queries_used());
        for (std::size_t i = 0; i < r.accepted.size(); ++i) {
            const auto& a = r.accepted[i];
            REQUIRE(a.delta_hat > 0.0);
            REQUIRE(a.delta_hat >= acceptance_threshold(a.accepted_round, intervals.size(), 0.1));
            if (i > 0) REQUIRE(r.accepted[i - 1].delta_hat >= a.delta_hat);
        }
    }
}

TEST_CASE("gaussian estimates fall in the constant-factor sandwich") {
    const std::size_t seeds = 500;
    std::size_t good = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
        Environment env(staircase(), NoiseModel::gaussian(1.0), derive_seed(43, s));
        const JumpEstimationResult r = estimate_jumps(env, kIntervals, 0.1, 1000000, 2);
        bool ok = r.accepted.size() == 2;
        for (const auto& a : r.accepted) {
            const double truth = std::abs(interval_jump(env.function(), a.interval));
            ok = ok && a.delta_hat >= truth * 2.0 / 3.0 && a.delta_hat <= 2.0 * truth;
        }
        good += ok ? 1 : 0;
    }
    CHECK(static_cast<double>(good) / seeds >= testing::lower_slack(0.9, seeds));
}

TEST_CASE("top_n picks the strongest with left-endpoint tie-breaks") {
    JumpEstimationResult r;
    r.accepted = {{Interval(0.6, 0.7), 0.7, 3}, {Interval(0.1, 0.2), 0.7, 4}, {Interval(0.3, 0.4), 1.0, 2}};
    const auto one = top_n(r, 1);
    REQUIRE(one);
    CHECK(one->intervals == std::vector<Interval>{Interval(0.3, 0.4)});
    CHECK(one->delta_hats == std::vector<double>{1.0});
    const auto two = top_n(r, 2);
    REQUIRE(two);
    CHECK(two->intervals[1] == Interval(0.1, 0.2));
    const auto all = top_n(r, 3);
    REQUIRE(all);
    CHECK(all->delta_hats == std::vector<double>{1.0, 0.7, 0.7});
    CHECK(all->intervals[2] == Interval(0.6, 0.7));
    CHECK_FALSE(top_n(r, 4));

    JumpEstimationResult tie;
    tie.accepted = {{Interval(0.6, 0.7), 0.7, 1}, {Interval(0.1, 0.2), 0.7, 1}};
    CHECK(top_n(tie, 1)->intervals[0] == Interval(0.1, 0.2));
}

TEST_CASE("estimate_jumps argument checks") {
    Environment env(staircase(), NoiseModel::zero(), 1);
    CHECK_THROWS_AS(estimate_jumps(env, {}, 0.1, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_jumps(env, kIntervals, 0.1, 100, 0), std::invalid_argument);
}
