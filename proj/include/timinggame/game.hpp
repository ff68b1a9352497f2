#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "timinggame/tree.hpp"

namespace timinggame {

// Per-node payoff data in common-flow + role-lump form.
//
// flow is the discounted flow increment accrued over the step leaving the
// node, received only if the game continues past it. leader/follower/both
// are the lump payoffs on top of accumulated flow when the node is where
// stopping resolves. At terminal nodes the three lumps coincide (roles
// collapse at the horizon).
struct GamePayoffs {
    std::vector<double> flow;
    std::vector<double> leader;    // l
    std::vector<double> follower;  // f
    std::vector<double> both;      // m

    void resize(int n) {
        flow.assign(n, 0.0);
        leader.assign(n, 0.0);
        follower.assign(n, 0.0);
        both.assign(n, 0.0);
    }
};

struct Game {
    EventTree tree;
    GamePayoffs pay;

    int node_count() const { return tree.node_count(); }
};

inline void validate_game(const Game& g, double tol = 1e-9) {
    const int n = g.tree.node_count();
    auto sz = [&](const std::vector<double>& v, const char* name) {
        if (static_cast<int>(v.size()) != n) {
            throw game_error(std::string("payoff field '") + name + "' has wrong length");
        }
    };
    sz(g.pay.flow, "flow");
    sz(g.pay.leader, "leader");
    sz(g.pay.follower, "follower");
    sz(g.pay.both, "both");
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(g.pay.flow[i]) || !std::isfinite(g.pay.leader[i]) ||
            !std::isfinite(g.pay.follower[i]) || !std::isfinite(g.pay.both[i])) {
            throw game_error("non-finite payoff at node " + std::to_string(g.tree.ext_id(i)));
        }
        if (g.tree.is_terminal(i)) {
            if (std::abs(g.pay.leader[i] - g.pay.follower[i]) > tol ||
                std::abs(g.pay.leader[i] - g.pay.both[i]) > tol) {
                throw game_error("terminal lumps differ at node " +
                                 std::to_string(g.tree.ext_id(i)));
            }
        }
    }
}

struct PathPayoffs {
    std::vector<double> L, F, M;
};

// Materializes the cumulative payoff processes along a root-to-node chain.
// path holds node indices; path[0] must be the root and each entry a child
// of its predecessor.
inline PathPayoffs cumulative_payoffs(const Game& g, std::span<const int> path) {
    if (path.empty() || path[0] != g.tree.root()) {
        throw game_error("path does not start at the root");
    }
    for (size_t k = 1; k < path.size(); ++k) {
        auto cs = g.tree.children(path[k - 1]);
        bool ok = false;
        for (int c : cs) ok = ok || c == path[k];
        if (!ok) throw game_error("path is not a chain at position " + std::to_string(k));
    }
    PathPayoffs out;
    out.L.reserve(path.size());
    out.F.reserve(path.size());
    out.M.reserve(path.size());
    double acc = 0.0;
    for (size_t k = 0; k < path.size(); ++k) {
        const int n = path[k];
        out.L.push_back(acc + g.pay.leader[n]);
        out.F.push_back(acc + g.pay.follower[n]);
        out.M.push_back(acc + g.pay.both[n]);
        acc += g.pay.flow[n];
    }
    return out;
}

}  // namespace timinggame
