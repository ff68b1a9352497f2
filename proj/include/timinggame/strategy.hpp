#pragma once

#include <string>
#include <vector>

#include "timinggame/tree.hpp"

namespace timinggame {

// Extended mixed strategy in per-node hazard form.
//
// hazard[n] is the conditional probability of stopping at n given survival
// to it; the cumulative distribution along a path is 1-G = prod(1-hazard),
// which makes the strategy time-consistent by construction. alpha[n] is the
// preemption intensity once the distribution phase has been exhausted.
//
// alpha_active[n] marks the start of the preemption phase at n. alpha may be
// 0 there: that is the boundary coordination case at L=F>M nodes, resolved
// as a 1/2-1/2 leader/follower split.
struct ExtendedStrategy {
    std::vector<double> hazard;
    std::vector<double> alpha;
    std::vector<char> alpha_active;

    static ExtendedStrategy zeros(int n) {
        ExtendedStrategy s;
        s.hazard.assign(n, 0.0);
        s.alpha.assign(n, 0.0);
        s.alpha_active.assign(n, 0);
        return s;
    }
};

inline void check_feasible(const EventTree& tree, const ExtendedStrategy& s) {
    const int n = tree.node_count();
    if (static_cast<int>(s.hazard.size()) != n || static_cast<int>(s.alpha.size()) != n ||
        static_cast<int>(s.alpha_active.size()) != n) {
        throw game_error("strategy has wrong length for this tree");
    }
    for (int i = 0; i < n; ++i) {
        if (!(s.hazard[i] >= 0.0 && s.hazard[i] <= 1.0)) {
            throw game_error("hazard outside [0,1] at node " + std::to_string(tree.ext_id(i)));
        }
        if (!(s.alpha[i] >= 0.0 && s.alpha[i] <= 1.0)) {
            throw game_error("alpha outside [0,1] at node " + std::to_string(tree.ext_id(i)));
        }
        if (s.alpha[i] > 0.0 && !s.alpha_active[i]) {
            throw game_error("positive alpha without active phase at node " +
                             std::to_string(tree.ext_id(i)));
        }
        if (s.alpha_active[i] && s.hazard[i] != 1.0) {
            throw game_error("alpha phase requires hazard 1 at node " +
                             std::to_string(tree.ext_id(i)));
        }
    }
}

}  // namespace timinggame
