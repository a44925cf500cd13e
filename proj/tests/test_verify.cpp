#include <catch_amalgamated.hpp>

#include <cmath>

#include "cpbandit/random.hpp"
#include "cpbandit/verify.hpp"
#include "support.hpp"

using namespace cpbandit;
using Catch::Matchers::WithinAbs;

TEST_CASE("verification threshold golden value") {
    CHECK_THAT(verify_threshold(128, 0.05), WithinAbs(0.67905075787, 1e-9));
    CHECK_THAT(verify_threshold(128, 0.05, 32.0), WithinAbs(0.67905075787 * std::sqrt(2.0), 1e-9));
    CHECK(std::isinf(verify_threshold(0, 0.05)));
    CHECK_THROWS_AS(verify_threshold(10, 0.0), std::invalid_argument);
}

TEST_CASE("zero-noise unit jump is detected") {
    Environment env(testing::two_cp(), NoiseModel::zero(), 1);
    const VerifyOutcome v = verify_cp(env, 0.29, 0.31, 0.05, 128);
    CHECK(v.detection);
    CHECK(v.statistic == 1.0);
    CHECK(v.queries == 128);
    CHECK_FALSE(verify_cp(env, 0.31, 0.5, 0.05, 128).detection);
}

TEST_CASE("odd budgets waste one query and tiny budgets cannot test") {
    Environment env(testing::two_cp(), NoiseModel::zero(), 1);
    CHECK(verify_cp(env, 0.29, 0.31, 0.05, 129).queries == 128);
    const VerifyOutcome one = verify_cp(env, 0.29, 0.31, 0.05, 1);
    CHECK_FALSE(one.detection);
    CHECK(one.queries == 0);
    const VerifyOutcome zero = verify_cp(env, 0.29, 0.31, 0.05, 0);
    CHECK_FALSE(zero.detection);
    CHECK(env.queries_used() == 128);
    CHECK_THROWS_AS(verify_cp(env, 0.4, 0.3, 0.05, 10), std::invalid_argument);
    CHECK_THROWS_AS(verify_cp(env, -0.1, 0.3, 0.05, 10), std::invalid_argument);
}

TEST_CASE("detection is exactly statistic above threshold") {
    for (std::uint64_t s = 0; s < 500; ++s) {
        Environment env(testing::two_cp(), NoiseModel::gaussian(1.0), derive_seed(61, s));
        const VerifyOutcome v = verify_cp(env, 0.25, 0.35, 0.05, 2 + s);
        REQUIRE(v.detection == (v.queries >= 2 && v.statistic > v.threshold));
    }
}

TEST_CASE("null control over 2000 trials") {
    const std::size_t trials = 2000;
    for (std::uint64_t T : {16ull, 128ull, 1000ull}) {
        for (double delta : {0.05, 0.2}) {
            std::size_t false_detections = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                Environment env(testing::two_cp(), NoiseModel::gaussian(1.0), derive_seed(63, t));
                false_detections += verify_cp(env, 0.35, 0.5, delta, T).detection ? 1 : 0;
            }
            CHECK(static_cast<double>(false_detections) / trials <= testing::upper_slack(delta, trials));
        }
    }
}

TEST_CASE("power at T = 64 ln(2/delta) / Delta^2") {
    const std::size_t trials = 2000;
    for (double jump : {1.0, 0.5}) {
        const double delta = 0.05;
        const auto T = static_cast<std::uint64_t>(std::ceil(64.0 * std::log(2.0 / delta) / (jump * jump)));
        std::size_t detections = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            Environment env(StepFunction(0.0, {0.5}, {jump}), NoiseModel::gaussian(1.0), derive_seed(65, t));
            detections += verify_cp(env, 0.49, 0.51, delta, T).detection ? 1 : 0;
        }
        CHECK(static_cast<double>(detections) / trials >= testing::lower_slack(1.0 - delta, trials));
    }
}
