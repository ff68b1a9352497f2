#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "timinggame/tree.hpp"

namespace timinggame {

// Probability that the player with per-round intensity x stops first when the
// opponent plays intensity y, in the limit of infinitely repeated rounds.
inline double mu_leader(double x, double y) {
    return x * (1.0 - y) / (x + y - x * y);
}

// Probability of simultaneous stopping under intensities (x, y).
inline double mu_both(double x, double y) {
    return x * y / (x + y - x * y);
}

// Preemption intensity making the opponent indifferent between stopping and
// waiting where there is a first-mover advantage. `at_boundary` says the node
// is the first of its preemption region.
inline double preemption_alpha(double l, double f, double m, bool at_boundary,
                               double tol = 1e-9) {
    if (std::abs(l - f) <= tol && std::abs(f - m) <= tol) return 1.0;
    if (m >= f - tol && at_boundary) return 1.0;
    if (l > f + tol) {
        if (l - m <= tol) {
            throw game_error("degenerate preemption payoffs: L > F with L = M");
        }
        return (l - f) / (l - m);
    }
    return 0.0;
}

// Outcome probabilities when a preemption phase is reached, per-node view.
// mass_i/mass_j are the players' survival masses just before the node.
struct OutcomeDistribution {
    double lead_i = 0.0;    // i stops first alone
    double lead_j = 0.0;
    double both = 0.0;      // simultaneous stop
    double survival = 0.0;  // mass not resolved at this node
};

// hazard_i/hazard_j are the players' distribution jumps at the node; they
// matter only in the one-sided cases (exactly one alpha positive). Negative
// values select the default: jump 1 for an alpha-active player, 0 otherwise.
inline OutcomeDistribution outcome_distribution(double alpha_i, double alpha_j,
                                                double mass_i, double mass_j,
                                                double hazard_i = -1.0,
                                                double hazard_j = -1.0) {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(alpha_i) || !in01(alpha_j) || !in01(mass_i) || !in01(mass_j)) {
        throw game_error("outcome_distribution inputs must lie in [0,1]");
    }
    if (hazard_i < 0.0) hazard_i = alpha_i > 0.0 ? 1.0 : 0.0;
    if (hazard_j < 0.0) hazard_j = alpha_j > 0.0 ? 1.0 : 0.0;

    OutcomeDistribution out;
    const double mass = mass_i * mass_j;
    if (alpha_i > 0.0 && alpha_j > 0.0) {
        out.lead_i = mass * mu_leader(alpha_i, alpha_j);
        out.lead_j = mass * mu_leader(alpha_j, alpha_i);
        out.both = mass * mu_both(alpha_i, alpha_j);
    } else if (alpha_i > 0.0) {
        // Only i has entered its alpha phase; j may jump by hazard_j here.
        out.lead_i = mass * (1.0 - hazard_j);
        out.both = mass * alpha_i * hazard_j;
        out.lead_j = mass * (1.0 - alpha_i) * hazard_j;
    } else if (alpha_j > 0.0) {
        out.lead_j = mass * (1.0 - hazard_i);
        out.both = mass * alpha_j * hazard_i;
        out.lead_i = mass * (1.0 - alpha_j) * hazard_i;
    } else {
        // Limit case alpha_i = alpha_j -> 0 at an L=F>M boundary node:
        // each player becomes leader or follower with probability 1/2.
        out.lead_i = 0.5 * mass;
        out.lead_j = 0.5 * mass;
        out.both = 0.0;
    }
    out.survival = mass - out.lead_i - out.lead_j - out.both;
    return out;
}

// Payoff of the immediate-stopping preemption equilibrium at a node.
inline double preemption_value(double l, double f, double m, double tol = 1e-9) {
    const double v = std::max(f, m);
    if (l > f + tol && f > m + tol) {
        // Cross-check against the alpha-weighted outcome payoff.
        const double a = (l - f) / (l - m);
        const double w = mu_leader(a, a) * (l + f) + mu_both(a, a) * m;
        if (std::abs(w - f) > 1e-9 * (1.0 + std::abs(f))) {
            throw game_error("preemption payoff identity violated");
        }
    }
    return v;
}

}  // namespace timinggame
