#include <doctest.h>

#include <cmath>
#include <sstream>

#include "utr/error.hpp"
#include "utr/rewardgap.hpp"

using namespace utr;

namespace {

// Independent reference: explicit powers and ceil on doubles.
double reference_gap(int T, double gamma, int (*k)(int)) {
    double sum = 0;
    for (int t = 1; t <= T; ++t) {
        const double full = t;              // R(V_{1:t}) = t frames
        const double partial = t - k(t) + 1;  // R(V_{k:t})
        sum += std::pow(gamma, t) * (full - partial);
    }
    return sum;
}

int k_full(int) { return 1; }
int k_half(int t) { return static_cast<int>(std::ceil(t / 2.0)); }
int k_single(int t) { return t; }

}  // namespace

TEST_CASE("objective_true enumerates discounted coverage terms") {
    RewardGapSpec spec{3, 1.0, KSchedule::full_prefix(), RewardModel::coverage()};
    CHECK(objective_true(spec) == 6.0);

    for (double g : {0.3, 0.9, 1.0}) {
        RewardGapSpec one{1, g, KSchedule::single_frame(), RewardModel::coverage()};
        CHECK(objective_true(one) == doctest::Approx(g * 1.0).epsilon(1e-15));
    }
    spec.gamma = 0;
    CHECK(objective_true(spec) == 0.0);
}

TEST_CASE("objective_proxy") {
    RewardGapSpec spec{3, 1.0, KSchedule::single_frame(), RewardModel::coverage()};
    CHECK(objective_proxy(spec) == 3.0);
    spec.schedule = KSchedule::full_prefix();
    CHECK(objective_proxy(spec) == objective_true(spec));
    spec.gamma = 0;
    CHECK(objective_proxy(spec) == 0.0);
}

TEST_CASE("reward gap examples") {
    RewardGapSpec spec{3, 1.0, KSchedule::single_frame(), RewardModel::coverage()};
    CHECK(reward_gap(spec) == 3.0);
    CHECK(reward_gap_termwise(spec) == 3.0);

    spec.gamma = 0.5;
    CHECK(reward_gap_termwise(spec) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(reward_gap(spec) == doctest::Approx(0.5).epsilon(1e-15));

    spec.schedule = KSchedule::full_prefix();
    CHECK(reward_gap(spec) == 0.0);

    for (int T : {1, 2, 3}) {
        RewardGapSpec s{T, 1.0, KSchedule::single_frame(), RewardModel::coverage()};
        CHECK(reward_gap(s) == T * (T - 1) / 2.0);
    }
}

TEST_CASE("half schedule is ceil(t/2)") {
    const auto h = KSchedule::half();
    for (int t = 1; t <= 50; ++t) CHECK(h.k(t) == k_half(t));
}

TEST_CASE("sweep matches an independent pow-based reference") {
    const auto rows = monotonicity_sweep();
    REQUIRE(rows.size() == 90);
    for (const auto& r : rows) {
        int (*k)(int) = r.policy == "full" ? k_full : r.policy == "half" ? k_half : k_single;
        CHECK(r.delta_r == doctest::Approx(reference_gap(r.horizon, r.gamma, k)).epsilon(1e-12));
    }
}

TEST_CASE("gamma = 0 rows are all zero") {
    const auto rows = sweep({1, 2, 5}, {0.0}, {KSchedule::full_prefix(), KSchedule::half(), KSchedule::single_frame()});
    for (const auto& r : rows) CHECK(r.delta_r == 0.0);
}

TEST_CASE("csv output") {
    std::ostringstream out;
    write_sweep_csv(sweep({3}, {1.0}, {KSchedule::single_frame()}), out);
    CHECK(out.str() == "T,gamma,policy_name,delta_r\n3,1.0,single,3.0\n");
}

TEST_CASE("custom reward tables") {
    // Monotone table: longer prefix earns more.
    std::map<std::pair<int, int>, double> values;
    for (int t = 1; t <= 3; ++t)
        for (int a = 1; a <= t; ++a) values[{a, t}] = 10.0 - a;
    const auto monotone = RewardModel::table(values);
    CHECK(monotone.monotone_in_prefix(3));
    RewardGapSpec spec{3, 0.9, KSchedule::single_frame(), monotone};
    CHECK(reward_gap(spec) >= 0);

    values[{2, 3}] = 100;
    CHECK_FALSE(RewardModel::table(values).monotone_in_prefix(3));

    RewardGapSpec missing{4, 1.0, KSchedule::single_frame(), monotone};
    CHECK_THROWS_AS(reward_gap(missing), Error);
    CHECK_THROWS_AS(RewardModel::table({}), ConfigError);
    CHECK_THROWS_AS(RewardModel::table({{{1, 1}, NAN}}), ConfigError);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(reward_gap({0, 1.0, KSchedule::full_prefix(), RewardModel::coverage()}), ConfigError);
    CHECK_THROWS_AS(reward_gap({3, 1.5, KSchedule::full_prefix(), RewardModel::coverage()}), ConfigError);
    KSchedule bad{"bad", [](int t) { return t + 1; }};
    CHECK_THROWS_AS(reward_gap({3, 1.0, bad, RewardModel::coverage()}), ConfigError);
    CHECK_THROWS_AS(KSchedule::by_name("quarter"), ConfigError);
}
