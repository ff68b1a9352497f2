#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "timinggame/snell.hpp"
#include "timinggame/tree.hpp"

using namespace timinggame;

namespace {

EventTree chain3() {
    return build_tree({{0, 0, 0.0, {{1, 1.0}}}, {1, 1, 0.0, {{2, 1.0}}}, {2, 2, 0.0, {}}});
}

std::vector<double> random_field(std::mt19937_64& rng, int n, double lo = 0.0,
                                 double hi = 1.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = unif(rng);
    return v;
}

}  // namespace

TEST_CASE("decreasing lump sequence stops immediately") {
    EventTree t = chain3();
    std::vector<double> flow(3, 0.0), lump = {5, 3, 1};
    SnellSolution s = snell_envelope(t, flow, lump);
    CHECK(s.U == std::vector<double>{5, 3, 1});
    CHECK(s.D_cum == std::vector<double>{0, 2, 4});
    CHECK(s.MG == std::vector<double>{5, 5, 5});
    StopTimes st = optimal_stop_times(t, s, 0);
    CHECK(st.tau_min[0]);
    CHECK(st.tau_max[0]);
}

TEST_CASE("increasing lump sequence waits to the end") {
    EventTree t = chain3();
    std::vector<double> flow(3, 0.0), lump = {1, 2, 3};
    SnellSolution s = snell_envelope(t, flow, lump);
    CHECK(s.U == std::vector<double>{3, 3, 3});
    CHECK(s.D_cum == std::vector<double>{0, 0, 0});
    StopTimes st = optimal_stop_times(t, s, 0);
    CHECK_FALSE(st.tau_min[0]);
    CHECK_FALSE(st.tau_min[1]);
    CHECK(st.tau_min[2]);
    CHECK(st.tau_max[2]);
}

TEST_CASE("one-step branching value") {
    EventTree t = build_tree({{0, 0, 0.0, {{1, 0.5}, {2, 0.5}}},
                              {1, 1, 0.0, {}},
                              {2, 1, 0.0, {}}});
    std::vector<double> flow(3, 0.0), lump = {4, 10, 0};
    SnellSolution s = snell_envelope(t, flow, lump);
    CHECK(s.U[0] == doctest::Approx(5.0));
    CHECK(s.dD[0] == doctest::Approx(0.0));
}

TEST_CASE("earliest and latest optimal stops can differ") {
    EventTree t = chain3();
    std::vector<double> flow(3, 0.0), lump = {3, 3, 1};
    SnellSolution s = snell_envelope(t, flow, lump);
    CHECK(s.U == std::vector<double>{3, 3, 1});
    StopTimes st = optimal_stop_times(t, s, 0);
    CHECK(st.tau_min[0]);        // value already attained at the root
    CHECK_FALSE(st.tau_max[0]);  // no strict loss leaving the root
    CHECK(st.tau_max[1]);        // first positive compensator increment
}

TEST_CASE("forced stops freeze the envelope at the lump") {
    EventTree t = chain3();
    std::vector<double> flow(3, 0.0), lump = {0, 2, 9};
    std::vector<char> forced = {0, 1, 0};
    SnellSolution s = snell_envelope(t, flow, lump, forced);
    CHECK(s.U[1] == 2.0);
    CHECK(s.stop_flag[1]);
    CHECK(s.U[0] == 2.0);
}

TEST_CASE("decomposition residuals vanish on random trees") {
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 100; ++iter) {
        EventTree t = testsupport::random_tree(rng, 8);
        auto flow = random_field(rng, t.node_count(), -0.3, 0.3);
        auto lump = random_field(rng, t.node_count());
        SnellSolution s = snell_envelope(t, flow, lump);
        DoobMeyerResiduals r = doob_meyer_residuals(s, t, flow, lump);
        CHECK(r.max_martingale_residual <= 1e-12);
        CHECK(r.min_compensator_increment >= -1e-14);
        CHECK(r.max_flat_off_contact_violation <= 1e-12);
        for (int i = 0; i < t.node_count(); ++i) {
            CHECK(s.U[i] >= lump[i] - 1e-14);  // dominating property
        }
    }
}

TEST_CASE("envelope equals exhaustive stopping-time enumeration on small trees") {
    std::mt19937_64 rng(99);
    int done = 0;
    while (done < 60) {
        EventTree t = testsupport::random_tree(rng, 4, 2);
        if (testsupport::stopping_time_count(t) > 12) continue;
        ++done;
        auto flow = random_field(rng, t.node_count(), -0.5, 0.5);
        auto lump = random_field(rng, t.node_count());
        SnellSolution s = snell_envelope(t, flow, lump);
        const double brute = testsupport::brute_force_stop_value(t, flow, lump);
        CHECK(s.U[t.root()] == doctest::Approx(brute).epsilon(1e-10));
    }
}

TEST_CASE("scaling flow and lump scales the whole decomposition") {
    std::mt19937_64 rng(5);
    EventTree t = testsupport::random_tree(rng, 6);
    auto flow = random_field(rng, t.node_count(), -0.2, 0.2);
    auto lump = random_field(rng, t.node_count());
    SnellSolution s1 = snell_envelope(t, flow, lump);
    const double lambda = 3.5;
    auto flow2 = flow, lump2 = lump;
    for (double& x : flow2) x *= lambda;
    for (double& x : lump2) x *= lambda;
    SnellSolution s2 = snell_envelope(t, flow2, lump2, {}, 1e-9 * lambda);
    for (int i = 0; i < t.node_count(); ++i) {
        CHECK(s2.U[i] == doctest::Approx(lambda * s1.U[i]).epsilon(1e-12));
        CHECK(s2.D_cum[i] == doctest::Approx(lambda * s1.D_cum[i]).epsilon(1e-12));
        CHECK(s2.MG[i] == doctest::Approx(lambda * s1.MG[i]).epsilon(1e-12));
    }
    StopTimes a = optimal_stop_times(t, s1, 0), b = optimal_stop_times(t, s2, 0);
    CHECK(a.tau_min == b.tau_min);
    CHECK(a.tau_max == b.tau_max);
}

TEST_CASE("stopping at tau_min or tau_max attains the envelope value") {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 40; ++iter) {
        EventTree t = testsupport::random_tree(rng, 6);
        auto flow = random_field(rng, t.node_count(), -0.2, 0.2);
        auto lump = random_field(rng, t.node_count());
        SnellSolution s = snell_envelope(t, flow, lump);
        StopTimes st = optimal_stop_times(t, s, t.root());
        for (const auto& frontier : {st.tau_min, st.tau_max}) {
            const double attained = testsupport::detail::frontier_reward(
                t, frontier, flow, lump, t.root());
            CHECK(attained == doctest::Approx(s.U[t.root()]).epsilon(1e-10));
        }
    }
}

TEST_CASE("unknown start node is rejected") {
    EventTree t = chain3();
    std::vector<double> z(3, 0.0);
    SnellSolution s = snell_envelope(t, z, z);
    CHECK_THROWS_AS(optimal_stop_times(t, s, 17), game_error);
}
