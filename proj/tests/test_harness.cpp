#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "cpbandit/harness.hpp"
#include "cpbandit/random.hpp"

using namespace cpbandit;

namespace {

/// Exhaustive search over injective order-preserving assignments.
bool brute_force(std::vector<double> estimates, const std::vector<double>& cps, double eta) {
    std::sort(estimates.begin(), estimates.end());
    const std::size_t n = estimates.size();
    const std::size_t m = cps.size();
    if (n > m) return false;
    // Any injective assignment can be reordered to an increasing one on a line,
    // but search all injective maps to stay independent of that argument.
    std::vector<std::size_t> pick(m);
    std::iota(pick.begin(), pick.end(), 0);
    do {
        bool ok = true;
        for (std::size_t l = 0; l < n && ok; ++l) ok = std::abs(estimates[l] - cps[pick[l]]) <= eta;
        if (ok) return true;
    } while (std::next_permutation(pick.begin(), pick.end()));
    return false;
}

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.name = "small";
    spec.family.kind = InstanceFamily::Kind::two_change_points;
    spec.algo.n_targets = 2;
    spec.algo.eta = std::ldexp(1.0, -6);
    spec.algo.delta_explore = 1.0;
    spec.sweep = SweepParam::spacing;
    spec.sweep_values = {0.125, 0.25};
    spec.mc_runs = 24;
    spec.master_seed = 5;
    return spec;
}

std::string csv(const SweepResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

}  // namespace

TEST_CASE("score_success examples") {
    CHECK(score_success({0.299, 0.552}, {0.3, 0.55}, 0.01));
    CHECK_FALSE(score_success({0.31, 0.315}, {0.3, 0.55}, 0.02));
    CHECK(score_success({0.548}, {0.3, 0.55}, 0.01));
    CHECK(score_success({0.552, 0.299}, {0.3, 0.55}, 0.01));
    CHECK(score_success({}, {0.3}, 0.01));
    CHECK_FALSE(score_success({0.3, 0.31}, {0.3}, 0.1));
    CHECK(score_success({0.3}, StepFunction(0.0, {0.3}, {1.0}), 0.0));
}

TEST_CASE("greedy matching agrees with brute force for m up to 6") {
    RandomStream rng(91);
    for (int trial = 0; trial < 20000; ++trial) {
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * m);
        std::vector<double> cps(m);
        for (auto& x : cps) x = std::round(rng.uniform() * 40.0) / 40.0;
        std::sort(cps.begin(), cps.end());
        std::vector<double> est(n);
        for (auto& c : est) c = std::round(rng.uniform() * 40.0) / 40.0;
        const double eta = std::round(rng.uniform() * 4.0) / 40.0;
        REQUIRE(score_success(est, cps, eta) == brute_force(est, cps, eta));
    }
}

TEST_CASE("nearest-rank quantiles") {
    const std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(nearest_rank_quantile(v, 0.05) == 1);
    CHECK(nearest_rank_quantile(v, 0.2) == 1);
    CHECK(nearest_rank_quantile(v, 0.21) == 2);
    CHECK(nearest_rank_quantile(v, 0.95) == 5);
    CHECK(nearest_rank_quantile(v, 1.0) == 5);
    CHECK(nearest_rank_quantile(v, 0.0) == 1);
    std::vector<double> hundred(100);
    std::iota(hundred.begin(), hundred.end(), 1.0);
    CHECK(nearest_rank_quantile(hundred, 0.05) == 5);
    CHECK(nearest_rank_quantile(hundred, 0.95) == 95);
    CHECK_THROWS_AS(nearest_rank_quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(nearest_rank_quantile(v, 1.5), std::invalid_argument);
}

TEST_CASE("instance families") {
    RandomStream rng(93);
    InstanceFamily two;
    two.spacing = 0.125;
    for (int i = 0; i < 1000; ++i) {
        const StepFunction f = two.draw(rng);
        REQUIRE(f.size() == 2);
        REQUIRE(f.change_points()[0] < 0.5);
        REQUIRE(std::abs(f.change_points()[1] - f.change_points()[0] - 0.125) < 1e-12);
        REQUIRE(f.jumps() == std::vector<double>{1.0, -1.0});
    }
    InstanceFamily alt;
    alt.kind = InstanceFamily::Kind::alternating;
    alt.count = 10;
    const StepFunction g = alt.draw(rng);
    REQUIRE(g.size() == 10);
    CHECK(g.jumps()[0] == 1.0);
    CHECK(g.jumps()[1] == -1.0);
    CHECK(g.change_points()[0] == 1.0 / 11.0);
    InstanceFamily one;
    one.kind = InstanceFamily::Kind::single_change_point;
    CHECK(one.draw(rng).size() == 1);
    InstanceFamily fixed;
    fixed.kind = InstanceFamily::Kind::fixed;
    CHECK_THROWS_AS(fixed.draw(rng), std::logic_error);
}

TEST_CASE("invalid draws are redrawn and counted") {
    InstanceFamily bad;
    bad.spacing = 0.75;  // x1 + s leaves (0, 1) whenever x1 >= 1/4
    LcpConfig cfg;
    cfg.n_targets = 1;
    cfg.eta = 1.0 / 64.0;
    std::size_t redraws = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        redraws += run_replicate(bad, NoiseModel::zero(), cfg, s).redraws;
    }
    CHECK(redraws > 0);
}

TEST_CASE("spec validation") {
    ExperimentSpec spec = small_spec();
    CHECK_NOTHROW(spec.validate());
    spec.mc_runs = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.sweep_values = {0.6};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.sweep_values.clear();
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.algo.n_targets = 3;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    CHECK_THROWS_AS(sweep_param_from_string("nope"), std::invalid_argument);
}

TEST_CASE("sweep points apply the swept parameter") {
    ExperimentSpec spec = small_spec();
    spec.sweep = SweepParam::log_inv_delta;
    spec.explore_tracks_delta = true;
    const auto p = spec.at(3.0);
    CHECK(std::abs(p.algo.delta - std::exp(-3.0)) < 1e-15);
    CHECK(p.algo.delta_explore == p.algo.delta);
    spec.sweep = SweepParam::eta;
    CHECK(spec.at(0.01).algo.eta == 0.01);
}

TEST_CASE("experiment aggregates, ledger closure and regime tags") {
    const SweepResult r = run_experiment(small_spec(), 1);
    REQUIRE(r.points.size() == 2);
    for (const auto& p : r.points) {
        CHECK(p.mc_runs == 24);
        CHECK(p.replicates.size() == 24);
        CHECK(p.q05_budget <= p.q95_budget);
        CHECK(p.success_rate >= 0.0);
        CHECK(p.success_rate <= 1.0);
        CHECK(p.outside_guarantee_regime);
    }
    const std::string text = csv(r);
    CHECK(text.rfind("sweep_param,sweep_value,mean_budget,q05,q95,success_rate,mc_runs,seed\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("\ns,0.125,") != std::string::npos);
}

TEST_CASE("single replicate is identical across invocations") {
    ExperimentSpec spec = small_spec();
    spec.mc_runs = 1;
    CHECK(csv(run_experiment(spec, 1)) == csv(run_experiment(spec, 1)));
}

TEST_CASE("aggregates are identical for any thread count") {
    const ExperimentSpec spec = small_spec();
    const std::string serial = csv(run_experiment(spec, 1));
    for (std::size_t threads : {2u, 3u, 8u}) {
        const SweepResult r = run_experiment(spec, threads);
        CHECK(csv(r) == serial);
    }
    ExperimentSpec other = spec;
    other.master_seed = 6;
    CHECK(csv(run_experiment(other, 2)) != serial);
}

TEST_CASE("presets carry the full-scale parameters") {
    for (const auto& name : preset_names()) {
        const ExperimentSpec spec = preset(name);
        CHECK_NOTHROW(spec.validate());
        CHECK(spec.algo.delta_explore == 1.0);
    }
    const ExperimentSpec e1 = preset("exp1");
    CHECK(e1.sweep_values == std::vector<double>{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4});
    CHECK(e1.algo.eta == std::ldexp(1.0, -11));
    CHECK(e1.mc_runs == 1000);
    const ExperimentSpec e2 = preset("exp2");
    CHECK(e2.sweep_values.size() == 11);
    CHECK(e2.sweep_values.front() == 20.0);
    CHECK(e2.sweep_values.back() == 120.0);
    CHECK(preset("exp3").sweep_values.size() == 7);
    CHECK(preset("exp3").sweep_values.back() == std::ldexp(1.0, -11));
    CHECK(preset("exp4").algo.eta == std::ldexp(1.0, -7));
    CHECK(preset("exp5").mc_runs == 100);
    CHECK(preset("exp5").algo.n_targets == 10);
    CHECK_THROWS_AS(preset("exp9"), std::invalid_argument);
}
