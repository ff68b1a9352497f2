#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace timinggame {

class game_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raw node description as it appears in a game file.
struct NodeInput {
    long long id = 0;
    int stage = 0;
    double state = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<long long, double>> children;  // (child id, probability)
};

// Finite staged event tree: the filtered probability space of the game.
//
// Nodes are stored sorted by (stage, external id), so node indices are
// contiguous per stage and backward induction is a single reverse sweep.
// Children are kept in CSR form. External ids from the game file are
// preserved for I/O and error messages; all in-memory APIs use indices.
class EventTree {
public:
    EventTree() = default;

    int node_count() const { return static_cast<int>(stage_.size()); }
    int stage_count() const { return stages_; }  // T+1
    int last_stage() const { return stages_ - 1; }
    int root() const { return 0; }
    bool recombining() const { return recombining_; }
    void set_recombining(bool v) { recombining_ = v; }

    int stage(int n) const { return stage_[n]; }
    double state(int n) const { return state_[n]; }
    long long ext_id(int n) const { return ext_id_[n]; }
    bool is_terminal(int n) const { return child_offset_[n + 1] == child_offset_[n]; }

    std::span<const int> children(int n) const {
        return {child_id_.data() + child_offset_[n],
                static_cast<size_t>(child_offset_[n + 1] - child_offset_[n])};
    }
    std::span<const double> probs(int n) const {
        return {child_prob_.data() + child_offset_[n],
                static_cast<size_t>(child_offset_[n + 1] - child_offset_[n])};
    }

    // Node index range [first, last) of stage t.
    std::pair<int, int> stage_range(int t) const {
        return {stage_begin_[t], stage_begin_[t + 1]};
    }

    int index_of(long long ext) const {
        auto it = by_ext_id_.find(ext);
        if (it == by_ext_id_.end()) {
            throw game_error("unknown node id " + std::to_string(ext));
        }
        return it->second;
    }

    // Conditional expectation of a per-node field over the children of n.
    double child_mean(int n, std::span<const double> x) const {
        double s = 0.0;
        auto cs = children(n);
        auto ps = probs(n);
        for (size_t k = 0; k < cs.size(); ++k) s += ps[k] * x[cs[k]];
        return s;
    }

    friend EventTree build_tree(std::vector<NodeInput> nodes, double prob_tol);

private:
    int stages_ = 0;
    bool recombining_ = false;
    std::vector<int> stage_;
    std::vector<double> state_;
    std::vector<long long> ext_id_;
    std::vector<int> child_offset_;
    std::vector<int> child_id_;
    std::vector<double> child_prob_;
    std::vector<int> stage_begin_;
    std::unordered_map<long long, int> by_ext_id_;
};

// Builds and validates a tree from raw node descriptions. Throws game_error
// with the offending external node id on any structural violation.
inline EventTree build_tree(std::vector<NodeInput> nodes, double prob_tol = 1e-12) {
    if (nodes.empty()) throw game_error("empty tree");

    std::sort(nodes.begin(), nodes.end(), [](const NodeInput& a, const NodeInput& b) {
        return a.stage != b.stage ? a.stage < b.stage : a.id < b.id;
    });

    EventTree t;
    const int n = static_cast<int>(nodes.size());
    t.stage_.resize(n);
    t.state_.resize(n);
    t.ext_id_.resize(n);
    t.child_offset_.assign(n + 1, 0);
    t.by_ext_id_.reserve(n);

    int max_stage = 0;
    for (int i = 0; i < n; ++i) {
        const auto& nd = nodes[i];
        if (nd.stage < 0) throw game_error("negative stage at node " + std::to_string(nd.id));
        if (!t.by_ext_id_.emplace(nd.id, i).second) {
            throw game_error("duplicate node id " + std::to_string(nd.id));
        }
        t.stage_[i] = nd.stage;
        t.state_[i] = nd.state;
        t.ext_id_[i] = nd.id;
        max_stage = std::max(max_stage, nd.stage);
    }
    t.stages_ = max_stage + 1;

    if (nodes[0].stage != 0 || (n > 1 && nodes[1].stage == 0)) {
        throw game_error("tree must have exactly one stage-0 root node");
    }

    size_t total_children = 0;
    for (const auto& nd : nodes) total_children += nd.children.size();
    t.child_id_.reserve(total_children);
    t.child_prob_.reserve(total_children);

    for (int i = 0; i < n; ++i) {
        const auto& nd = nodes[i];
        t.child_offset_[i] = static_cast<int>(t.child_id_.size());
        if (nd.stage == max_stage) {
            if (!nd.children.empty()) {
                throw game_error("terminal node " + std::to_string(nd.id) + " has children");
            }
            continue;
        }
        if (nd.children.empty()) {
            throw game_error("non-terminal node " + std::to_string(nd.id) + " has no children");
        }
        double sum = 0.0;
        for (const auto& [cid, p] : nd.children) {
            auto it = t.by_ext_id_.find(cid);
            if (it == t.by_ext_id_.end()) {
                throw game_error("dangling child reference " + std::to_string(cid) +
                                 " at node " + std::to_string(nd.id));
            }
            if (t.stage_[it->second] != nd.stage + 1) {
                throw game_error("child " + std::to_string(cid) + " of node " +
                                 std::to_string(nd.id) + " is not one stage deeper");
            }
            if (!(p > 0.0)) {
                throw game_error("non-positive probability at node " + std::to_string(nd.id));
            }
            t.child_id_.push_back(it->second);
            t.child_prob_.push_back(p);
            sum += p;
        }
        if (std::abs(sum - 1.0) > prob_tol) {
            std::ostringstream os;
            os << "probability sum " << sum << " at node " << nd.id;
            throw game_error(os.str());
        }
    }
    t.child_offset_[n] = static_cast<int>(t.child_id_.size());

    // Connectivity: every node except the root must be referenced as a child.
    std::vector<char> reached(n, 0);
    reached[0] = 1;
    for (int c : t.child_id_) reached[c] = 1;
    for (int i = 0; i < n; ++i) {
        if (!reached[i]) {
            throw game_error("node " + std::to_string(t.ext_id_[i]) +
                             " is not reachable from the root");
        }
    }

    t.stage_begin_.assign(t.stages_ + 1, 0);
    for (int i = 0; i < n; ++i) t.stage_begin_[t.stage_[i] + 1]++;
    for (int s = 0; s < t.stages_; ++s) t.stage_begin_[s + 1] += t.stage_begin_[s];

    return t;
}

}  // namespace timinggame
