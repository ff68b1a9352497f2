#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "timinggame/attrition.hpp"
#include "timinggame/duopoly.hpp"
#include "timinggame/game.hpp"
#include "timinggame/strategy.hpp"
#include "timinggame/verify.hpp"

namespace timinggame {

// Either an explicit tree or a duopoly parameter block, plus solver options.
struct GameSpec {
    std::optional<Game> explicit_game;
    std::optional<DuopolyParams> duopoly;
    bool duopoly_validation_mode = true;
    double tol = 1e-9;
    HazardMode hazard_mode = HazardMode::exact_discrete;

    Game build() const {
        if (explicit_game) return *explicit_game;
        return build_duopoly_game(*duopoly, duopoly_validation_mode);
    }
};

namespace detail {

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw game_error(what + ": invalid JSON: " + e.what());
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw game_error("cannot open file " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_json(text, path);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw game_error("cannot write file " + path);
    out << j.dump(2) << "\n";
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw game_error(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw game_error(std::string("field '") + key + "' has the wrong type");
    }
}

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw game_error(std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace detail

inline GameSpec load_game(const nlohmann::json& j) {
    GameSpec spec;
    const std::string kind = detail::field<std::string>(j, "kind");

    if (j.contains("options")) {
        const auto& o = j.at("options");
        spec.tol = detail::field_or<double>(o, "tol", spec.tol);
        const std::string hm = detail::field_or<std::string>(o, "hazards", "exact");
        if (hm == "paper" || hm == "formula") {
            spec.hazard_mode = HazardMode::paper_formula;
        } else if (hm == "exact") {
            spec.hazard_mode = HazardMode::exact_discrete;
        } else {
            throw game_error("unknown hazard mode '" + hm + "'");
        }
    }

    if (kind == "gbm-duopoly") {
        DuopolyParams p;
        p.r = detail::field<double>(j, "r");
        p.mu = detail::field<double>(j, "mu");
        p.sigma = detail::field<double>(j, "sigma");
        p.c = detail::field<double>(j, "c");
        p.m = detail::field<double>(j, "m");
        p.y0 = detail::field<double>(j, "y0");
        p.horizon = detail::field<double>(j, "horizon");
        p.steps = detail::field<int>(j, "steps");
        validate_params(p);
        spec.duopoly = p;
        spec.duopoly_validation_mode = detail::field_or<bool>(j, "validation_mode", true);
        return spec;
    }
    if (kind != "tree") throw game_error("unknown game kind '" + kind + "'");

    const auto& jnodes = j.at("nodes");
    if (!jnodes.is_array() || jnodes.empty()) {
        throw game_error("field 'nodes' must be a non-empty array");
    }

    std::vector<NodeInput> inputs;
    inputs.reserve(jnodes.size());
    struct Lumps {
        long long id;
        double flow, l, f, m;
    };
    std::vector<Lumps> lumps;
    lumps.reserve(jnodes.size());
    for (const auto& jn : jnodes) {
        NodeInput nd;
        nd.id = detail::field<long long>(jn, "id");
        nd.stage = detail::field<int>(jn, "stage");
        nd.state = detail::field_or<double>(jn, "state", 0.0);
        if (jn.contains("children")) {
            for (const auto& jc : jn.at("children")) {
                if (!jc.is_array() || jc.size() != 2) {
                    throw game_error("malformed child entry at node " + std::to_string(nd.id));
                }
                nd.children.emplace_back(jc.at(0).get<long long>(), jc.at(1).get<double>());
            }
        }
        lumps.push_back({nd.id, detail::field_or<double>(jn, "flow", 0.0),
                         detail::field_or<double>(jn, "leader", 0.0),
                         detail::field_or<double>(jn, "follower", 0.0),
                         detail::field_or<double>(jn, "both", 0.0)});
        inputs.push_back(std::move(nd));
    }

    Game g;
    g.tree = build_tree(std::move(inputs));
    g.pay.resize(g.tree.node_count());
    for (const auto& lp : lumps) {
        const int i = g.tree.index_of(lp.id);
        g.pay.flow[i] = lp.flow;
        g.pay.leader[i] = lp.l;
        g.pay.follower[i] = lp.f;
        g.pay.both[i] = lp.m;
    }
    // Optional shared terminal lump by node id, applied to all three roles.
    if (j.contains("terminal_lump")) {
        for (const auto& [key, val] : j.at("terminal_lump").items()) {
            const int i = g.tree.index_of(std::stoll(key));
            if (!g.tree.is_terminal(i)) {
                throw game_error("terminal_lump given for non-terminal node " + key);
            }
            g.pay.leader[i] = g.pay.follower[i] = g.pay.both[i] = val.get<double>();
        }
    }
    validate_game(g, spec.tol);
    spec.explicit_game = std::move(g);
    return spec;
}

inline GameSpec load_game_file(const std::string& path) {
    return load_game(detail::read_json_file(path));
}

inline nlohmann::json game_to_json(const Game& g) {
    nlohmann::json j;
    j["kind"] = "tree";
    j["stages"] = g.tree.last_stage();
    nlohmann::json jnodes = nlohmann::json::array();
    for (int i = 0; i < g.tree.node_count(); ++i) {
        nlohmann::json jn;
        jn["id"] = g.tree.ext_id(i);
        jn["stage"] = g.tree.stage(i);
        jn["state"] = g.tree.state(i);
        nlohmann::json jc = nlohmann::json::array();
        auto cs = g.tree.children(i);
        auto ps = g.tree.probs(i);
        for (size_t k = 0; k < cs.size(); ++k) {
            jc.push_back({g.tree.ext_id(cs[k]), ps[k]});
        }
        jn["children"] = std::move(jc);
        jn["flow"] = g.pay.flow[i];
        jn["leader"] = g.pay.leader[i];
        jn["follower"] = g.pay.follower[i];
        jn["both"] = g.pay.both[i];
        jnodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(jnodes);
    return j;
}

inline nlohmann::json strategy_to_json(const EventTree& tree, const ExtendedStrategy& s,
                                       int player) {
    nlohmann::json j;
    j["player"] = player;
    nlohmann::json jnodes = nlohmann::json::array();
    for (int i = 0; i < tree.node_count(); ++i) {
        nlohmann::json jn;
        jn["id"] = tree.ext_id(i);
        jn["hazard"] = s.hazard[i];
        jn["alpha"] = s.alpha[i];
        if (s.alpha_active[i]) jn["boundary"] = true;
        jnodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(jnodes);
    return j;
}

inline ExtendedStrategy strategy_from_json(const EventTree& tree, const nlohmann::json& j) {
    ExtendedStrategy s = ExtendedStrategy::zeros(tree.node_count());
    for (const auto& jn : detail::field<nlohmann::json>(j, "nodes")) {
        const int i = tree.index_of(detail::field<long long>(jn, "id"));
        s.hazard[i] = detail::field<double>(jn, "hazard");
        s.alpha[i] = detail::field_or<double>(jn, "alpha", 0.0);
        s.alpha_active[i] = detail::field_or<bool>(jn, "boundary", false) || s.alpha[i] > 0.0;
    }
    check_feasible(tree, s);
    return s;
}

// Equilibrium file: both strategies plus the root value, as emitted by the
// `equilibrium` command and consumed by `verify`/`simulate`.
inline nlohmann::json equilibrium_to_json(const EventTree& tree, const std::string& mode,
                                          const ExtendedStrategy& s1,
                                          const ExtendedStrategy& s2, double root_value_1,
                                          double root_value_2) {
    nlohmann::json j;
    j["mode"] = mode;
    j["root_value"] = {root_value_1, root_value_2};
    j["strategies"] = {strategy_to_json(tree, s1, 1), strategy_to_json(tree, s2, 2)};
    return j;
}

inline std::pair<ExtendedStrategy, ExtendedStrategy> equilibrium_from_json(
    const EventTree& tree, const nlohmann::json& j) {
    const auto& js = detail::field<nlohmann::json>(j, "strategies");
    if (!js.is_array() || js.size() != 2) {
        throw game_error("equilibrium file must contain exactly two strategies");
    }
    return {strategy_from_json(tree, js.at(0)), strategy_from_json(tree, js.at(1))};
}

inline nlohmann::json diagnostics_to_json(const Diagnostics& d) {
    nlohmann::json j;
    j["max_payoff_asymmetry"] = d.max_payoff_asymmetry;
    j["max_indifference_violation"] = d.max_indifference_violation;
    j["max_best_reply_gap"] = d.max_best_reply_gap;
    j["bound_violation"] = d.bound_violation;
    j["bound_checked"] = d.bound_checked;
    j["worst_gap_node"] = d.worst_gap_node;
    return j;
}

inline nlohmann::json snell_to_json(const EventTree& tree, const SnellSolution& sol) {
    nlohmann::json j;
    nlohmann::json jnodes = nlohmann::json::array();
    for (int i = 0; i < tree.node_count(); ++i) {
        nlohmann::json jn;
        jn["id"] = tree.ext_id(i);
        jn["U"] = sol.U[i];
        jn["dD"] = sol.dD[i];
        jn["D_cum"] = sol.D_cum[i];
        jn["MG"] = sol.MG[i];
        jn["stop"] = static_cast<bool>(sol.stop_flag[i]);
        jnodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(jnodes);
    j["root_value"] = sol.U[tree.root()];
    return j;
}

}  // namespace timinggame
