#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "timinggame/game.hpp"
#include "timinggame/preemption.hpp"
#include "timinggame/snell.hpp"
#include "timinggame/strategy.hpp"

namespace timinggame {

// Conditional-on-survival equilibrium values for both players under a given
// strategy pair. Unconditional subgame payoffs are the product with the
// survival mass at the node.
struct ValueField {
    std::vector<double> V1, V2;
};

namespace detail {

// Value of the player using `mine` against `other`, one backward sweep.
inline std::vector<double> one_sided_value(const Game& g, const ExtendedStrategy& mine,
                                           const ExtendedStrategy& other) {
    const int n = g.tree.node_count();
    std::vector<double> V(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        if (g.tree.is_terminal(i)) {
            V[i] = g.pay.leader[i];  // terminal lump, roles collapsed
            continue;
        }
        if (mine.alpha_active[i] || other.alpha_active[i]) {
            auto o = outcome_distribution(mine.alpha[i], other.alpha[i],
                                          1.0, 1.0, mine.hazard[i], other.hazard[i]);
            V[i] = o.lead_i * g.pay.leader[i] + o.lead_j * g.pay.follower[i] +
                   o.both * g.pay.both[i];
            // Unresolved mass can only remain if neither player acts here.
            if (o.survival > 1e-12) {
                V[i] += o.survival * (g.pay.flow[i] + g.tree.child_mean(i, V));
            }
            continue;
        }
        const double gi = mine.hazard[i];
        const double gj = other.hazard[i];
        const double cont = g.pay.flow[i] + g.tree.child_mean(i, V);
        V[i] = gi * gj * g.pay.both[i] + gi * (1.0 - gj) * g.pay.leader[i] +
               (1.0 - gi) * gj * g.pay.follower[i] + (1.0 - gi) * (1.0 - gj) * cont;
    }
    return V;
}

}  // namespace detail

inline ValueField game_value(const Game& g, const ExtendedStrategy& s1,
                             const ExtendedStrategy& s2) {
    check_feasible(g.tree, s1);
    check_feasible(g.tree, s2);
    ValueField v;
    v.V1 = detail::one_sided_value(g, s1, s2);
    v.V2 = detail::one_sided_value(g, s2, s1);
    return v;
}

// Best pure reply against a fixed opponent strategy.
//
// best[n] is the deviator's value at n; stop_value[n] the one-step payoff
// from stopping at n against the opponent's hazard there.
struct BestReplyField {
    std::vector<double> best;
    std::vector<double> stop_value;
};

inline BestReplyField best_reply_value(const Game& g, const ExtendedStrategy& opp) {
    check_feasible(g.tree, opp);
    const int n = g.tree.node_count();
    BestReplyField br;
    br.best.assign(n, 0.0);
    br.stop_value.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        const double l = g.pay.leader[i], f = g.pay.follower[i], m = g.pay.both[i];
        if (g.tree.is_terminal(i)) {
            br.best[i] = l;
            br.stop_value[i] = m;
            continue;
        }
        if (opp.alpha_active[i]) {
            if (opp.alpha[i] > 0.0) {
                // Stopping joins the opponent's alpha round; waiting concedes.
                br.stop_value[i] = (1.0 - opp.alpha[i]) * l + opp.alpha[i] * m;
                br.best[i] = std::max(br.stop_value[i], f);
            } else {
                // Boundary coordination: the roles are split 1/2-1/2.
                br.stop_value[i] = 0.5 * (l + f);
                br.best[i] = std::max(br.stop_value[i], f);
            }
            continue;
        }
        const double h = opp.hazard[i];
        const double wait = h * f + (1.0 - h) * (g.pay.flow[i] + g.tree.child_mean(i, br.best));
        br.stop_value[i] = h * m + (1.0 - h) * l;
        br.best[i] = std::max(br.stop_value[i], wait);
    }
    return br;
}

struct Diagnostics {
    double max_payoff_asymmetry = 0.0;
    double max_indifference_violation = 0.0;
    double max_best_reply_gap = 0.0;
    double bound_violation = 0.0;
    bool bound_checked = false;
    long long worst_gap_node = -1;
};

inline Diagnostics equilibrium_diagnostics(const Game& g, const ExtendedStrategy& s1,
                                           const ExtendedStrategy& s2, double tol = 1e-9) {
    Diagnostics d;
    const int n = g.tree.node_count();
    const ValueField v = game_value(g, s1, s2);
    const BestReplyField br1 = best_reply_value(g, s2);
    const BestReplyField br2 = best_reply_value(g, s1);

    // Nodes reachable while neither player has stopped yet. Beyond a sure
    // stop the profile describes a counterfactual subgame that never starts,
    // so deviations there carry no weight.
    std::vector<char> reach(n, 0);
    reach[g.tree.root()] = 1;
    for (int i = 0; i < n; ++i) {
        if (!reach[i] || g.tree.is_terminal(i)) continue;
        if (s1.hazard[i] >= 1.0 || s2.hazard[i] >= 1.0) continue;
        for (int c : g.tree.children(i)) reach[c] = 1;
    }

    for (int i = 0; i < n; ++i) {
        d.max_payoff_asymmetry = std::max(d.max_payoff_asymmetry, std::abs(v.V1[i] - v.V2[i]));
        const double gap = reach[i]
                               ? std::max(br1.best[i] - v.V1[i], br2.best[i] - v.V2[i])
                               : 0.0;
        if (gap > d.max_best_reply_gap) {
            d.max_best_reply_gap = gap;
            d.worst_gap_node = g.tree.ext_id(i);
        }
        if (g.tree.is_terminal(i)) continue;
        // Indifference between stopping and waiting at interior mixing nodes.
        auto mixing = [&](const ExtendedStrategy& mine, const ExtendedStrategy& other,
                          const std::vector<double>& V) {
            if (mine.alpha_active[i] || other.alpha_active[i]) return;
            const double gm = mine.hazard[i];
            if (gm <= tol || gm >= 1.0 - tol) return;
            const double go = other.hazard[i];
            const double stop = go * g.pay.both[i] + (1.0 - go) * g.pay.leader[i];
            const double wait = go * g.pay.follower[i] +
                                (1.0 - go) * (g.pay.flow[i] + g.tree.child_mean(i, V));
            d.max_indifference_violation =
                std::max(d.max_indifference_violation, std::abs(stop - wait));
        };
        mixing(s1, s2, v.V1);
        mixing(s2, s1, v.V2);
    }

    // Payoff bound of competitive games: V <= U_{L^F} node-wise. It only
    // constrains payoff-symmetric equilibria, so skip it for asymmetric
    // strategy pairs (pure leader/follower equilibria).
    bool competitive = s1.hazard == s2.hazard && s1.alpha == s2.alpha &&
                       s1.alpha_active == s2.alpha_active;
    for (int i = 0; i < n && competitive; ++i) {
        competitive = g.pay.both[i] <= std::min(g.pay.leader[i], g.pay.follower[i]) + tol;
    }
    if (competitive) {
        std::vector<double> min_lump(n);
        for (int i = 0; i < n; ++i) min_lump[i] = std::min(g.pay.leader[i], g.pay.follower[i]);
        const SnellSolution bound = snell_envelope(g.tree, g.pay.flow, min_lump, {}, tol);
        for (int i = 0; i < n; ++i) {
            d.bound_violation = std::max(
                d.bound_violation, std::max(v.V1[i], v.V2[i]) - bound.U[i]);
        }
        d.bound_checked = true;
    }
    return d;
}

struct SimResult {
    double v1 = 0.0, v2 = 0.0;
    double stderr1 = 0.0, stderr2 = 0.0;
    long long paths = 0;
};

// Seeded Monte Carlo cross-validation of game_value. Transitions, hazards and
// alpha-phase outcomes are all sampled; output is deterministic given the seed.
inline SimResult simulate(const Game& g, const ExtendedStrategy& s1,
                          const ExtendedStrategy& s2, long long n_paths, std::uint64_t seed) {
    check_feasible(g.tree, s1);
    check_feasible(g.tree, s2);
    if (n_paths < 1) throw game_error("simulate requires at least one path");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto sample_child = [&](int node) {
        auto cs = g.tree.children(node);
        auto ps = g.tree.probs(node);
        double u = unif(rng), acc = 0.0;
        for (size_t k = 0; k < cs.size(); ++k) {
            acc += ps[k];
            if (u <= acc) return cs[k];
        }
        return cs[cs.size() - 1];
    };

    double sum1 = 0.0, sum2 = 0.0, sq1 = 0.0, sq2 = 0.0;
    for (long long p = 0; p < n_paths; ++p) {
        int node = g.tree.root();
        double acc_flow = 0.0;
        double p1 = 0.0, p2 = 0.0;
        for (;;) {
            const double l = g.pay.leader[node], f = g.pay.follower[node],
                         m = g.pay.both[node];
            if (g.tree.is_terminal(node)) {
                p1 = acc_flow + m;
                p2 = acc_flow + m;
                break;
            }
            if (s1.alpha_active[node] || s2.alpha_active[node]) {
                auto o = outcome_distribution(s1.alpha[node], s2.alpha[node], 1.0, 1.0,
                                              s1.hazard[node], s2.hazard[node]);
                const double u = unif(rng);
                if (u <= o.lead_i) {
                    p1 = acc_flow + l;
                    p2 = acc_flow + f;
                } else if (u <= o.lead_i + o.lead_j) {
                    p1 = acc_flow + f;
                    p2 = acc_flow + l;
                } else {
                    p1 = acc_flow + m;
                    p2 = acc_flow + m;
                }
                break;
            }
            const bool stop1 = unif(rng) < s1.hazard[node];
            const bool stop2 = unif(rng) < s2.hazard[node];
            if (stop1 && stop2) {
                p1 = acc_flow + m;
                p2 = acc_flow + m;
                break;
            }
            if (stop1) {
                p1 = acc_flow + l;
                p2 = acc_flow + f;
                break;
            }
            if (stop2) {
                p1 = acc_flow + f;
                p2 = acc_flow + l;
                break;
            }
            acc_flow += g.pay.flow[node];
            node = sample_child(node);
        }
        sum1 += p1;
        sum2 += p2;
        sq1 += p1 * p1;
        sq2 += p2 * p2;
    }

    SimResult r;
    r.paths = n_paths;
    const double inv = 1.0 / static_cast<double>(n_paths);
    r.v1 = sum1 * inv;
    r.v2 = sum2 * inv;
    if (n_paths > 1) {
        const double var1 = std::max(0.0, (sq1 * inv - r.v1 * r.v1) *
                                              n_paths / (n_paths - 1.0));
        const double var2 = std::max(0.0, (sq2 * inv - r.v2 * r.v2) *
                                              n_paths / (n_paths - 1.0));
        r.stderr1 = std::sqrt(var1 * inv);
        r.stderr2 = std::sqrt(var2 * inv);
    }
    return r;
}

}  // namespace timinggame
