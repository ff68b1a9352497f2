#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "timinggame/game.hpp"
#include "timinggame/preemption.hpp"
#include "timinggame/snell.hpp"
#include "timinggame/strategy.hpp"
#include "timinggame/verify.hpp"

namespace timinggame {

enum class HazardMode { paper_formula, exact_discrete };

// Nodes that end the war-of-attrition phase: first-mover advantage (l > f)
// or a feasible coordination point (m >= f). The condition is node-local, so
// the same set serves every subgame and the strategies built from it are
// time-consistent.
inline std::vector<char> attrition_endpoint(const Game& g, double tol = 1e-9) {
    const int n = g.tree.node_count();
    std::vector<char> ep(n, 0);
    for (int i = 0; i < n; ++i) {
        ep[i] = g.pay.leader[i] > g.pay.follower[i] + tol ||
                g.pay.both[i] >= g.pay.follower[i] - tol;
    }
    return ep;
}

// The modified payoff process: leader lump before the endpoint, max(F, M)
// frozen at endpoint nodes, together with its Snell envelope. Endpoint nodes
// are absorbing for the envelope.
struct AttritionPlan {
    std::vector<char> endpoint;
    std::vector<double> tilde_lump;
    SnellSolution snell;
};

inline AttritionPlan make_attrition_plan(const Game& g, double tol = 1e-9) {
    AttritionPlan plan;
    plan.endpoint = attrition_endpoint(g, tol);
    const int n = g.tree.node_count();
    plan.tilde_lump.resize(n);
    for (int i = 0; i < n; ++i) {
        plan.tilde_lump[i] = plan.endpoint[i]
                                 ? std::max(g.pay.follower[i], g.pay.both[i])
                                 : g.pay.leader[i];
    }
    plan.snell = snell_envelope(g.tree, g.pay.flow, plan.tilde_lump, plan.endpoint, tol);
    return plan;
}

struct SymmetricEquilibrium {
    ExtendedStrategy strategy;  // used by both players
    std::vector<double> value;  // conditional-on-survival value per node
};

namespace detail {

inline ExtendedStrategy hazards_paper(const Game& g, const AttritionPlan& plan, double tol) {
    const int n = g.tree.node_count();
    ExtendedStrategy s = ExtendedStrategy::zeros(n);
    for (int i = 0; i < n; ++i) {
        const double l = g.pay.leader[i], f = g.pay.follower[i], m = g.pay.both[i];
        if (g.tree.is_terminal(i)) {
            s.hazard[i] = 1.0;
            continue;
        }
        if (plan.endpoint[i]) {
            s.hazard[i] = 1.0;
            s.alpha[i] = preemption_alpha(l, f, m, /*at_boundary=*/true, tol);
            s.alpha_active[i] = s.alpha[i] > 0.0;
            continue;
        }
        const double dD = plan.snell.dD[i];
        if (dD <= tol) continue;
        if (f > l + tol) {
            const double dA = dD / (f - l);  // jump of the compensating rate
            s.hazard[i] = dA / (1.0 + dA);
        } else if (std::abs(m - f) <= tol) {
            s.hazard[i] = 1.0;  // simultaneous-stop coordination
        } else {
            throw game_error("endpoint condition violated at node " +
                             std::to_string(g.tree.ext_id(i)) +
                             ": F = L > M with positive compensator increment");
        }
    }
    return s;
}

inline SymmetricEquilibrium hazards_exact(const Game& g, const AttritionPlan& plan,
                                          double tol) {
    const int n = g.tree.node_count();
    SymmetricEquilibrium eq;
    eq.strategy = ExtendedStrategy::zeros(n);
    eq.value.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        const double l = g.pay.leader[i], f = g.pay.follower[i], m = g.pay.both[i];
        if (g.tree.is_terminal(i)) {
            eq.strategy.hazard[i] = 1.0;
            eq.value[i] = m;
            continue;
        }
        if (plan.endpoint[i]) {
            eq.strategy.hazard[i] = 1.0;
            eq.strategy.alpha[i] = preemption_alpha(l, f, m, true, tol);
            eq.strategy.alpha_active[i] = eq.strategy.alpha[i] > 0.0;
            eq.value[i] = preemption_value(l, f, m, tol);
            continue;
        }
        const double cont = g.pay.flow[i] + g.tree.child_mean(i, eq.value);
        if (l <= cont) {
            eq.value[i] = cont;
            continue;
        }
        // Interior indifference: g m + (1-g) l = g f + (1-g) cont.
        // Before an endpoint m < f, so the denominator is positive.
        const double gmix = std::clamp((l - cont) / ((l - cont) + (f - m)), 0.0, 1.0);
        eq.strategy.hazard[i] = gmix;
        eq.value[i] = gmix * m + (1.0 - gmix) * l;
    }
    return eq;
}

}  // namespace detail

// Symmetric mixed strategy of the war of attrition, with the preemption
// intensities pasted in at endpoint nodes.
//
// paper_formula discretizes the compensator-over-(F-L) stopping rate through
// the jump map dA -> dA/(1+dA); exact_discrete solves the per-node
// indifference condition jointly with the value recursion.
inline ExtendedStrategy attrition_hazards(const Game& g, const AttritionPlan& plan,
                                          HazardMode mode, double tol = 1e-9) {
    if (mode == HazardMode::paper_formula) return detail::hazards_paper(g, plan, tol);
    return detail::hazards_exact(g, plan, tol).strategy;
}

inline SymmetricEquilibrium symmetric_equilibrium(const Game& g, HazardMode mode,
                                                  double tol = 1e-9) {
    const AttritionPlan plan = make_attrition_plan(g, tol);
    if (mode == HazardMode::exact_discrete) return detail::hazards_exact(g, plan, tol);
    SymmetricEquilibrium eq;
    eq.strategy = detail::hazards_paper(g, plan, tol);
    eq.value = plan.snell.U;
    return eq;
}

// Pure-strategy equilibrium for games with F >= L >= M and a supermartingale
// follower payoff: one player stops at the smallest optimal time for L, the
// other waits until F meets M. role_rule decides, per stop node of L, which
// player takes the leader role there.
struct PureEquilibrium {
    ExtendedStrategy s1, s2;
    std::vector<char> tau_L_nodes;  // smallest optimal stopping frontier for L
    std::vector<char> tau_F_nodes;  // first F = M frontier
};

inline PureEquilibrium pure_equilibrium(const Game& g, int start,
                                        const std::function<bool(int)>& role_rule,
                                        double tol = 1e-9) {
    const int n = g.tree.node_count();
    if (start < 0 || start >= n) throw game_error("unknown start node");

    // Subtree preconditions: F >= L >= M node-wise, F a supermartingale.
    {
        std::vector<int> stack{start};
        std::vector<char> seen(n, 0);
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            if (seen[i]) continue;
            seen[i] = 1;
            const double l = g.pay.leader[i], f = g.pay.follower[i], m = g.pay.both[i];
            if (f < l - tol || l < m - tol) {
                throw game_error("payoff ordering F >= L >= M violated at node " +
                                 std::to_string(g.tree.ext_id(i)));
            }
            if (!g.tree.is_terminal(i)) {
                const double cont = g.pay.flow[i] + g.tree.child_mean(i, g.pay.follower);
                if (f < cont - tol) {
                    throw game_error("follower payoff is not a supermartingale at node " +
                                     std::to_string(g.tree.ext_id(i)));
                }
                for (int c : g.tree.children(i)) stack.push_back(c);
            }
        }
    }

    const SnellSolution ul = snell_envelope(g.tree, g.pay.flow, g.pay.leader, {}, tol);

    PureEquilibrium pe;
    pe.s1 = ExtendedStrategy::zeros(n);
    pe.s2 = ExtendedStrategy::zeros(n);
    pe.tau_L_nodes.assign(n, 0);
    pe.tau_F_nodes.assign(n, 0);

    // Walk each path: mark tau_L at the first stop-region node of L, check
    // that no F=M node occurs strictly earlier, and route each player to its
    // assigned stopping node.
    struct Frame {
        int node;
        bool past_tau_l;  // tau_L passed without this visit assigning both stops
    };
    // Visited per (node, phase) pair so recombining lattices stay linear.
    std::vector<char> done_before(n, 0), done_after(n, 0);
    std::vector<Frame> stack{{start, false}};
    while (!stack.empty()) {
        auto [i, past] = stack.back();
        stack.pop_back();
        std::vector<char>& done = past ? done_after : done_before;
        if (done[i]) continue;
        done[i] = 1;
        const bool fm_meet = std::abs(g.pay.follower[i] - g.pay.both[i]) <= tol;
        const bool stop_l = ul.stop_flag[i] || g.tree.is_terminal(i);
        if (!past) {
            if (fm_meet && !stop_l) {
                throw game_error("F meets M before the optimal stop of L at node " +
                                 std::to_string(g.tree.ext_id(i)));
            }
            if (stop_l) {
                pe.tau_L_nodes[i] = 1;
                ExtendedStrategy& leader = role_rule(i) ? pe.s1 : pe.s2;
                ExtendedStrategy& waiter = role_rule(i) ? pe.s2 : pe.s1;
                leader.hazard[i] = 1.0;
                if (fm_meet) {
                    pe.tau_F_nodes[i] = 1;
                    waiter.hazard[i] = 1.0;  // simultaneous stop, feasible since F = M
                    continue;
                }
                for (int c : g.tree.children(i)) stack.push_back({c, true});
                continue;
            }
            for (int c : g.tree.children(i)) stack.push_back({c, false});
        } else {
            if (fm_meet || g.tree.is_terminal(i)) {
                pe.tau_F_nodes[i] = 1;
                pe.s1.hazard[i] = 1.0;
                pe.s2.hazard[i] = 1.0;
                continue;
            }
            for (int c : g.tree.children(i)) stack.push_back({c, true});
        }
    }
    return pe;
}

}  // namespace timinggame
