#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "timinggame/tree.hpp"

namespace timinggame {

// Snell envelope of a lump + flow reward process on the tree, with its
// Doob decomposition. Values follow the net-of-accumulated-flow convention:
// U(n) is the best expected future flow plus stopped lump from n onward.
//
// The compensator increment dD(n) is attached to the node being left, so
// dD(n) > 0 iff one-step delay at n has a strict expected cost.
struct SnellSolution {
    std::vector<double> U;       // envelope value
    std::vector<double> dD;      // compensator increment charged when leaving the node
    std::vector<double> D_cum;   // cumulative compensator along the tree, 0 at root
    std::vector<double> MG;      // martingale part, U + D_cum
    std::vector<char> stop_flag; // U equals the immediate lump within tolerance
    double tol = 1e-9;
};

// Backward recursion U = max(lump, flow + E[U(children)]).
//
// Nodes flagged in `forced_stop` are treated as terminal with value lump(n);
// this is how stopped processes (L frozen at an endpoint or frontier) are
// represented on the tree.
inline SnellSolution snell_envelope(const EventTree& tree,
                                    std::span<const double> flow,
                                    std::span<const double> lump,
                                    std::span<const char> forced_stop = {},
                                    double tol = 1e-9) {
    const int n = tree.node_count();
    SnellSolution s;
    s.tol = tol;
    s.U.assign(n, 0.0);
    s.dD.assign(n, 0.0);
    s.D_cum.assign(n, 0.0);
    s.MG.assign(n, 0.0);
    s.stop_flag.assign(n, 0);

    for (int i = n - 1; i >= 0; --i) {
        const bool forced = !forced_stop.empty() && forced_stop[i];
        if (tree.is_terminal(i) || forced) {
            s.U[i] = lump[i];
            s.stop_flag[i] = 1;
            continue;
        }
        const double cont = flow[i] + tree.child_mean(i, s.U);
        s.U[i] = std::max(lump[i], cont);
        s.dD[i] = std::max(0.0, s.U[i] - cont);
        s.stop_flag[i] = std::abs(s.U[i] - lump[i]) <= tol;
    }

    // Forward pass for the cumulative compensator and martingale part.
    for (int i = 0; i < n; ++i) {
        for (int c : tree.children(i)) s.D_cum[c] = s.D_cum[i] + s.dD[i];
    }
    for (int i = 0; i < n; ++i) s.MG[i] = s.U[i] + s.D_cum[i];
    return s;
}

// Smallest and largest optimal stopping times from `start`, represented as
// frontier node sets: tau_min marks the first stop-region node on each path,
// tau_max the first node whose outgoing compensator increment is positive.
struct StopTimes {
    std::vector<char> tau_min;
    std::vector<char> tau_max;
};

inline StopTimes optimal_stop_times(const EventTree& tree, const SnellSolution& sol, int start) {
    if (start < 0 || start >= tree.node_count()) {
        throw game_error("unknown start node index " + std::to_string(start));
    }
    const int n = tree.node_count();
    StopTimes st;
    st.tau_min.assign(n, 0);
    st.tau_max.assign(n, 0);

    // Iterative reachability; the visited set keeps recombining lattices
    // (shared children) linear.
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        if (seen[i]) continue;
        seen[i] = 1;
        if (sol.stop_flag[i] || tree.is_terminal(i)) {
            st.tau_min[i] = 1;
        } else {
            for (int c : tree.children(i)) stack.push_back(c);
        }
    }
    seen.assign(n, 0);
    stack.assign(1, start);
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        if (seen[i]) continue;
        seen[i] = 1;
        if (sol.dD[i] > sol.tol || tree.is_terminal(i)) {
            st.tau_max[i] = 1;
        } else {
            for (int c : tree.children(i)) stack.push_back(c);
        }
    }
    return st;
}

struct DoobMeyerResiduals {
    double max_martingale_residual = 0.0;
    double min_compensator_increment = 0.0;
    double max_flat_off_contact_violation = 0.0;
};

// Checks the decomposition identities node by node:
//   MG(n) = flow(n) + E[MG(children)]   (martingale property, flow absorbed)
//   dD(n) >= 0
//   dD(n) * (U(n) - lump(n)) = 0        (compensator increases only on contact)
inline DoobMeyerResiduals doob_meyer_residuals(const SnellSolution& sol,
                                               const EventTree& tree,
                                               std::span<const double> flow,
                                               std::span<const double> lump) {
    DoobMeyerResiduals r;
    const int n = tree.node_count();
    for (int i = 0; i < n; ++i) {
        if (tree.is_terminal(i)) continue;
        const double res = sol.MG[i] - flow[i] - tree.child_mean(i, sol.MG);
        r.max_martingale_residual = std::max(r.max_martingale_residual, std::abs(res));
        r.min_compensator_increment = std::min(r.min_compensator_increment, sol.dD[i]);
        r.max_flat_off_contact_violation =
            std::max(r.max_flat_off_contact_violation, sol.dD[i] * (sol.U[i] - lump[i]));
    }
    return r;
}

}  // namespace timinggame
