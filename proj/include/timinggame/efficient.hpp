#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "timinggame/attrition.hpp"
#include "timinggame/game.hpp"
#include "timinggame/preemption.hpp"
#include "timinggame/snell.hpp"
#include "timinggame/strategy.hpp"
#include "timinggame/verify.hpp"

namespace timinggame {

namespace detail {

inline std::vector<double> min_lump(const Game& g) {
    const int n = g.tree.node_count();
    std::vector<double> lump(n);
    for (int i = 0; i < n; ++i) lump[i] = std::min(g.pay.leader[i], g.pay.follower[i]);
    return lump;
}

inline void require_competitive(const Game& g, double tol) {
    const int n = g.tree.node_count();
    for (int i = 0; i < n; ++i) {
        if (g.pay.both[i] > std::min(g.pay.leader[i], g.pay.follower[i]) + tol) {
            throw game_error("hypothesis M <= min(L,F) violated at node " +
                             std::to_string(g.tree.ext_id(i)));
        }
    }
}

}  // namespace detail

// Upper bound on any payoff-symmetric equilibrium value in a competitive
// game: the Snell envelope of min(L, F).
inline SnellSolution payoff_bound(const Game& g, double tol = 1e-9) {
    detail::require_competitive(g, tol);
    return snell_envelope(g.tree, g.pay.flow, detail::min_lump(g), {}, tol);
}

// Fixed point of the inevitable-preemption iteration. Frontier flags are
// node-local ("preemption at or before here"), so restricting the result to
// any subtree reproduces the subgame solution.
struct FrontierResult {
    std::vector<std::vector<char>> iterates;  // tau_0, tau_1, ... frontier flags
    std::vector<char> tilde_tau;              // final frontier
    SnellSolution constrained;                // envelope of (L^F) stopped at tilde_tau
    std::vector<double> value;                // equilibrium value per node
    bool leader_below_value = false;          // l <= U before the frontier
    bool leader_dominates_follower = false;   // l >= f at frontier nodes
};

inline FrontierResult preemption_frontier(const Game& g, double tol = 1e-9) {
    detail::require_competitive(g, tol);
    const int n = g.tree.node_count();
    const std::vector<double> lump = detail::min_lump(g);

    FrontierResult fr;
    std::vector<char> flags(n, 0);
    SnellSolution sol = snell_envelope(g.tree, g.pay.flow, lump, {}, tol);

    const int max_iter = n + 1;
    int iter = 0;
    for (;; ++iter) {
        if (iter > max_iter) throw game_error("preemption frontier failed to stabilize");
        std::vector<char> next = flags;
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            if (!next[i] && g.pay.leader[i] > sol.U[i] + tol) {
                next[i] = 1;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        flags = std::move(next);
        fr.iterates.push_back(flags);
        sol = snell_envelope(g.tree, g.pay.flow, lump, flags, tol);
        if (!changed) break;
    }

    fr.tilde_tau = flags;
    fr.constrained = std::move(sol);
    fr.value = fr.constrained.U;

    fr.leader_below_value = true;
    fr.leader_dominates_follower = true;
    for (int i = 0; i < n; ++i) {
        if (!flags[i] && g.pay.leader[i] > fr.constrained.U[i] + tol) {
            fr.leader_below_value = false;
        }
        if (flags[i] && g.pay.leader[i] < g.pay.follower[i] - tol) {
            fr.leader_dominates_follower = false;
        }
    }
    return fr;
}

// Efficient payoff-symmetric equilibrium: attrition driven by the constrained
// envelope's compensator before the frontier, preemption intensities at it.
struct EfficientEquilibrium {
    ExtendedStrategy strategy;
    std::vector<double> value;
    FrontierResult frontier;
    Diagnostics diagnostics;
};

inline EfficientEquilibrium efficient_equilibrium(const Game& g, double tol = 1e-9) {
    EfficientEquilibrium eq;
    eq.frontier = preemption_frontier(g, tol);
    const int n = g.tree.node_count();
    eq.strategy = ExtendedStrategy::zeros(n);
    eq.value = eq.frontier.value;

    for (int i = 0; i < n; ++i) {
        const double l = g.pay.leader[i], f = g.pay.follower[i], m = g.pay.both[i];
        if (g.tree.is_terminal(i)) {
            eq.strategy.hazard[i] = 1.0;
            continue;
        }
        if (eq.frontier.tilde_tau[i]) {
            eq.strategy.hazard[i] = 1.0;
            eq.strategy.alpha[i] = preemption_alpha(l, f, m, true, tol);
            eq.strategy.alpha_active[i] = 1;
            continue;
        }
        const double dD = eq.frontier.constrained.dD[i];
        if (dD <= tol) continue;
        if (f > l + tol) {
            const double dA = dD / (f - l);
            eq.strategy.hazard[i] = dA / (1.0 + dA);
        } else {
            // Flat-off-contact puts U = min(l,f) here, so l = f. With m = f
            // this is plain coordination; with m < f it is the boundary
            // preemption case resolved by the 1/2-1/2 split.
            eq.strategy.hazard[i] = 1.0;
            if (m < f - tol) {
                eq.strategy.alpha[i] = 0.0;
                eq.strategy.alpha_active[i] = 1;
            }
        }
    }
    eq.diagnostics = equilibrium_diagnostics(g, eq.strategy, eq.strategy, tol);
    return eq;
}

}  // namespace timinggame
