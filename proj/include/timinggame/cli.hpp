#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "timinggame/attrition.hpp"
#include "timinggame/duopoly.hpp"
#include "timinggame/efficient.hpp"
#include "timinggame/json_io.hpp"
#include "timinggame/snell.hpp"
#include "timinggame/verify.hpp"

namespace timinggame::cli {

// Exit codes: 0 success, 1 validation / check failure, 2 usage error.

namespace detail {

inline double default_tol() {
    if (const char* env = std::getenv("TIMINGGAME_TOL")) {
        try {
            const double v = std::stod(env);
            if (v > 0.0) return v;
        } catch (...) {
        }
    }
    return 1e-9;
}

inline void emit(const std::string& out_path, const nlohmann::json& j, std::ostream& os) {
    if (out_path.empty()) {
        os << j.dump(2) << "\n";
    } else {
        timinggame::detail::write_json_file(out_path, j);
    }
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"Stopping-game solver: Snell envelopes, timing-game equilibria, "
                 "verification, simulation, and a closed-form duopoly benchmark"};
    app.require_subcommand(1);

    double tol = detail::default_tol();
    app.add_option("--tol", tol, "comparison tolerance")->capture_default_str();

    std::string game_path, out_path, eq_path;
    std::string process = "leader";
    std::string mode = "symmetric";
    std::string hazards = "exact";
    long long n_paths = 100000;
    unsigned long long seed = 1;

    auto* snell_cmd = app.add_subcommand("solve-snell", "Snell envelope of a lump process");
    snell_cmd->add_option("--game", game_path, "game file")->required();
    snell_cmd->add_option("--out", out_path, "output file (default stdout)");
    snell_cmd->add_option("--process", process,
                          "lump process: leader|follower|both|min")
        ->check(CLI::IsMember({"leader", "follower", "both", "min"}));

    auto* eq_cmd = app.add_subcommand("equilibrium", "compute an equilibrium");
    eq_cmd->add_option("--game", game_path, "game file")->required();
    eq_cmd->add_option("--mode", mode, "symmetric|efficient|pure")
        ->check(CLI::IsMember({"symmetric", "efficient", "pure"}));
    eq_cmd->add_option("--hazards", hazards, "paper|exact (symmetric mode)")
        ->check(CLI::IsMember({"paper", "exact"}));
    eq_cmd->add_option("--out", out_path, "output file (default stdout)");

    auto* verify_cmd = app.add_subcommand("verify", "check an equilibrium file");
    verify_cmd->add_option("--game", game_path, "game file")->required();
    verify_cmd->add_option("--eq", eq_path, "equilibrium file")->required();
    verify_cmd->add_option("--out", out_path, "report file (default stdout)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo value estimate");
    sim_cmd->add_option("--game", game_path, "game file")->required();
    sim_cmd->add_option("--eq", eq_path, "equilibrium file")->required();
    sim_cmd->add_option("--paths", n_paths, "number of sample paths")->capture_default_str();
    sim_cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
    sim_cmd->add_option("--out", out_path, "report file (default stdout)");

    DuopolyParams dp;
    std::vector<int> schedule{500, 1000, 2000, 4000};
    bool check = false;
    std::string csv_path;
    auto* duo_cmd = app.add_subcommand("duopoly", "closed-form benchmark convergence");
    duo_cmd->add_option("--r", dp.r, "discount rate")->capture_default_str();
    duo_cmd->add_option("--mu", dp.mu, "drift")->capture_default_str();
    duo_cmd->add_option("--sigma", dp.sigma, "volatility")->required();
    duo_cmd->add_option("--c", dp.c, "operating cost")->capture_default_str();
    duo_cmd->add_option("--m", dp.m, "monopoly multiplier")->capture_default_str();
    duo_cmd->add_option("--y0", dp.y0, "initial revenue")->capture_default_str();
    duo_cmd->add_option("--horizon", dp.horizon, "horizon in years")->capture_default_str();
    duo_cmd->add_option("--steps", schedule, "lattice step schedule");
    duo_cmd->add_flag("--check", check,
                      "fail unless errors weakly decrease and end below 1%");
    duo_cmd->add_option("--csv", csv_path, "write convergence CSV here (default stdout)");
    duo_cmd->add_option("--out", out_path, "JSON summary file (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (snell_cmd->parsed()) {
            const GameSpec spec = load_game_file(game_path);
            if (spec.explicit_game) tol = std::min(tol, spec.tol);
            const Game g = spec.build();
            const std::vector<double>* lump = &g.pay.leader;
            std::vector<double> min_lump;
            if (process == "follower") {
                lump = &g.pay.follower;
            } else if (process == "both") {
                lump = &g.pay.both;
            } else if (process == "min") {
                min_lump.resize(g.node_count());
                for (int i = 0; i < g.node_count(); ++i) {
                    min_lump[i] = std::min(g.pay.leader[i], g.pay.follower[i]);
                }
                lump = &min_lump;
            }
            const SnellSolution sol = snell_envelope(g.tree, g.pay.flow, *lump, {}, tol);
            detail::emit(out_path, snell_to_json(g.tree, sol), out);
            return 0;
        }

        if (eq_cmd->parsed()) {
            const GameSpec spec = load_game_file(game_path);
            const Game g = spec.build();
            nlohmann::json result;
            if (mode == "symmetric") {
                const HazardMode hm = hazards == "paper" ? HazardMode::paper_formula
                                                         : HazardMode::exact_discrete;
                const SymmetricEquilibrium eq = symmetric_equilibrium(g, hm, tol);
                result = equilibrium_to_json(g.tree, "symmetric", eq.strategy, eq.strategy,
                                             eq.value[g.tree.root()],
                                             eq.value[g.tree.root()]);
            } else if (mode == "efficient") {
                const EfficientEquilibrium eq = efficient_equilibrium(g, tol);
                result = equilibrium_to_json(g.tree, "efficient", eq.strategy, eq.strategy,
                                             eq.value[g.tree.root()],
                                             eq.value[g.tree.root()]);
            } else {
                const PureEquilibrium pe =
                    pure_equilibrium(g, g.tree.root(), [](int) { return true; }, tol);
                const ValueField v = game_value(g, pe.s1, pe.s2);
                result = equilibrium_to_json(g.tree, "pure", pe.s1, pe.s2,
                                             v.V1[g.tree.root()], v.V2[g.tree.root()]);
            }
            detail::emit(out_path, result, out);
            return 0;
        }

        if (verify_cmd->parsed()) {
            const GameSpec spec = load_game_file(game_path);
            const Game g = spec.build();
            const auto [s1, s2] =
                equilibrium_from_json(g.tree, timinggame::detail::read_json_file(eq_path));
            const Diagnostics d = equilibrium_diagnostics(g, s1, s2, tol);
            const double gap_tol = std::max(tol, 1e-8);
            const bool pass = d.max_best_reply_gap <= gap_tol &&
                              (!d.bound_checked || d.bound_violation <= gap_tol);
            nlohmann::json report = diagnostics_to_json(d);
            report["pass"] = pass;
            report["tol"] = gap_tol;
            detail::emit(out_path, report, out);
            return pass ? 0 : 1;
        }

        if (sim_cmd->parsed()) {
            const GameSpec spec = load_game_file(game_path);
            const Game g = spec.build();
            const auto [s1, s2] =
                equilibrium_from_json(g.tree, timinggame::detail::read_json_file(eq_path));
            const SimResult r = simulate(g, s1, s2, n_paths, seed);
            const ValueField v = game_value(g, s1, s2);
            nlohmann::json report;
            report["paths"] = r.paths;
            report["seed"] = seed;
            report["estimate"] = {r.v1, r.v2};
            report["stderr"] = {r.stderr1, r.stderr2};
            report["exact"] = {v.V1[g.tree.root()], v.V2[g.tree.root()]};
            detail::emit(out_path, report, out);
            return 0;
        }

        // duopoly
        const ConvergenceReport rep = validate_closed_form(dp, schedule);
        std::ostringstream csv;
        csv << "steps,follower_err,leader_err\n";
        for (const auto& row : rep.rows) {
            csv << row.steps << "," << row.follower_rel_err << "," << row.leader_rel_err
                << "\n";
        }
        if (csv_path.empty()) {
            out << csv.str();
        } else {
            std::ofstream f(csv_path);
            if (!f) throw game_error("cannot write file " + csv_path);
            f << csv.str();
        }
        nlohmann::json summary;
        summary["beta2"] = beta2(dp);
        const Thresholds th = thresholds(dp);
        summary["y_m"] = th.y_m;
        summary["y_1"] = th.y_1;
        summary["follower_exact"] = follower_premium(0.0, dp.y0, dp);
        summary["leader_exact"] = leader_option(0.0, dp.y0, dp);
        summary["monotone"] = rep.monotone;
        detail::emit(out_path, summary, out);
        if (check) {
            const auto& last = rep.rows.back();
            if (!rep.monotone || last.follower_rel_err > 0.01 || last.leader_rel_err > 0.01) {
                err << "convergence check failed\n";
                return 1;
            }
        }
        return 0;
    } catch (const game_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, out, err);
}

}  // namespace timinggame::cli
