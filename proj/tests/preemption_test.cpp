#include <doctest.h>

#include <cmath>
#include <random>

#include "timinggame/preemption.hpp"

using namespace timinggame;

TEST_CASE("preemption intensity formula") {
    CHECK(preemption_alpha(3, 1, 0, false) == doctest::Approx(2.0 / 3.0));
    CHECK(preemption_alpha(3, 1, 0, true) == doctest::Approx(2.0 / 3.0));
    CHECK(preemption_alpha(1, 1, 1, false) == 1.0);  // all payoffs equal
    CHECK(preemption_alpha(1, 2, 0, false) == 0.0);  // second-mover advantage
    CHECK(preemption_alpha(1, 2, 2, true) == 1.0);   // coordination point at a boundary
    CHECK(preemption_alpha(1, 2, 2, false) == 0.0);
    CHECK_THROWS_AS(preemption_alpha(3, 1, 3, false), game_error);  // degenerate L = M
}

TEST_CASE("outcome probabilities in the two-sided case") {
    auto o = outcome_distribution(2.0 / 3.0, 2.0 / 3.0, 1.0, 1.0);
    CHECK(o.both == doctest::Approx(0.5));
    CHECK(o.lead_i == doctest::Approx(0.25));
    CHECK(o.lead_j == doctest::Approx(0.25));
    CHECK(o.survival == doctest::Approx(0.0));

    auto one_sided = outcome_distribution(1.0, 0.0, 1.0, 1.0);
    CHECK(one_sided.lead_i == doctest::Approx(1.0));
    CHECK(one_sided.lead_j == doctest::Approx(0.0));
    CHECK(one_sided.both == doctest::Approx(0.0));
}

TEST_CASE("outcome probabilities sum to one on a grid") {
    double worst = 0.0;
    for (int a = 0; a <= 100; ++a) {
        for (int b = 0; b <= 100; ++b) {
            if (a == 0 && b == 0) continue;
            const double x = a / 100.0, y = b / 100.0;
            const double s = mu_leader(x, y) + mu_leader(y, x) + mu_both(x, y);
            worst = std::max(worst, std::abs(s - 1.0));
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("vanishing intensities approach the even split") {
    CHECK(std::abs(mu_leader(1e-8, 1e-8) - 0.5) <= 1e-6);
    auto o = outcome_distribution(0.0, 0.0, 1.0, 1.0);
    CHECK(o.lead_i == 0.5);
    CHECK(o.lead_j == 0.5);
    CHECK(o.both == 0.0);
}

TEST_CASE("simultaneous-stop probability increases with intensity") {
    double prev = -1.0;
    for (double a = 0.05; a <= 1.0; a += 0.05) {
        const double cur = mu_both(a, a);
        CHECK(cur > prev);
        prev = cur;
    }
    CHECK(mu_both(1.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("intensity-weighted payoff equals the follower payoff") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int iter = 0; iter < 1000; ++iter) {
        const double m = unif(rng);
        const double f = m + 0.01 + unif(rng);
        const double l = f + 0.01 + unif(rng);
        const double a = preemption_alpha(l, f, m, false);
        const double w = mu_leader(a, a) * (l + f) + mu_both(a, a) * m;
        CHECK(std::abs(w - f) <= 1e-12 * (1.0 + std::abs(f)));
    }
}

TEST_CASE("preemption payoff is max of follower and simultaneous lumps") {
    CHECK(preemption_value(3, 1, 0) == doctest::Approx(1.0));
    CHECK(preemption_value(2, 2, 0) == doctest::Approx(2.0));
    CHECK(preemption_value(1, 3, 4) == doctest::Approx(4.0));
}

TEST_CASE("outcome distribution validates inputs") {
    CHECK_THROWS_AS(outcome_distribution(-0.1, 0.5, 1.0, 1.0), game_error);
    CHECK_THROWS_AS(outcome_distribution(0.5, 1.2, 1.0, 1.0), game_error);
}
