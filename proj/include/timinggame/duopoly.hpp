#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "timinggame/game.hpp"
#include "timinggame/snell.hpp"
#include "timinggame/tree.hpp"

namespace timinggame {

// Market-exit duopoly on a geometric Brownian revenue process: duopoly flow
// (Y - c), monopoly flow (mY - c), discounted at rate r.
struct DuopolyParams {
    double r = 0.04;       // discount rate, > max(mu, 0)
    double mu = 0.0;       // revenue drift
    double sigma = 0.0;    // revenue volatility, > 0
    double c = 1.0;        // operating cost, > 0
    double m = 2.0;        // monopoly revenue multiplier, > 1
    double y0 = 1.0;       // initial revenue
    double horizon = 30.0; // lattice horizon in years
    int steps = 1000;      // lattice step count
};

inline void validate_params(const DuopolyParams& p) {
    if (!(p.r > 0.0) || !(p.r > p.mu)) {
        throw game_error("duopoly requires r > max(mu, 0)");
    }
    if (!(p.sigma > 0.0)) throw game_error("duopoly requires sigma > 0");
    if (!(p.c > 0.0)) throw game_error("duopoly requires c > 0");
    if (!(p.m > 1.0)) throw game_error("duopoly requires m > 1");
    if (!(p.y0 > 0.0)) throw game_error("duopoly requires y0 > 0");
    if (!(p.horizon > 0.0) || p.steps < 1) {
        throw game_error("duopoly requires a positive horizon and at least one step");
    }
}

// Negative root of (1/2) sigma^2 b (b - 1) + mu b - r = 0.
inline double beta2(const DuopolyParams& p) {
    validate_params(p);
    const double s2 = p.sigma * p.sigma;
    const double b = p.mu - 0.5 * s2;
    return (-b - std::sqrt(b * b + 2.0 * s2 * p.r)) / s2;
}

struct Thresholds {
    double y_m = 0.0;  // monopolist exit threshold
    double y_1 = 0.0;  // duopolist exit threshold (m = 1)
};

inline Thresholds thresholds(const DuopolyParams& p) {
    const double b2 = beta2(p);
    Thresholds t;
    const double base = b2 / (b2 - 1.0) * (p.r - p.mu) / p.r * p.c;
    t.y_m = base / p.m;
    t.y_1 = base;
    return t;
}

namespace detail {

// Value of waiting in the perpetual exit problem with flow (mm*y - c): zero
// at and below the threshold, the explicit bracket above it.
inline double exit_premium(double t, double y, double mm, double thr,
                           const DuopolyParams& p, double b2) {
    if (y <= thr) return 0.0;
    const double bracket = mm * y / (p.r - p.mu) - p.c / p.r -
                           std::pow(y / thr, b2) * (mm * thr / (p.r - p.mu) - p.c / p.r);
    return std::exp(-p.r * t) * bracket;
}

}  // namespace detail

// F - L of the exit game: the follower's (monopolist's) option premium.
inline double follower_premium(double t, double y, const DuopolyParams& p) {
    return detail::exit_premium(t, y, p.m, thresholds(p).y_m, p, beta2(p));
}

// U_L - L: the value of optimally timing the duopoly exit.
inline double leader_option(double t, double y, const DuopolyParams& p) {
    return detail::exit_premium(t, y, 1.0, thresholds(p).y_1, p, beta2(p));
}

struct LatticeCoeffs {
    double dt = 0.0, up = 0.0, down = 0.0, p_up = 0.0;
};

inline LatticeCoeffs lattice_coeffs(const DuopolyParams& p) {
    validate_params(p);
    LatticeCoeffs c;
    c.dt = p.horizon / p.steps;
    c.up = std::exp(p.sigma * std::sqrt(c.dt));
    c.down = 1.0 / c.up;
    c.p_up = (std::exp(p.mu * c.dt) - c.down) / (c.up - c.down);
    if (!(c.p_up > 0.0 && c.p_up < 1.0)) {
        const int min_steps =
            static_cast<int>(std::ceil(p.horizon * p.mu * p.mu / (p.sigma * p.sigma))) + 1;
        throw game_error("lattice probability outside (0,1); need at least " +
                         std::to_string(min_steps) + " steps for this drift");
    }
    return c;
}

// Builds the exit game on a recombining binomial lattice. The follower lump
// is computed numerically as the Snell value of the monopoly flow, so the
// closed form stays an independent oracle. In validation mode the analytic
// continuation values serve as terminal boundary condition, isolating
// discretization error from horizon truncation.
inline Game build_duopoly_game(const DuopolyParams& p, bool validation_mode = true) {
    const LatticeCoeffs lc = lattice_coeffs(p);
    const Thresholds th = thresholds(p);
    const int N = p.steps;

    auto rev = [&](int t, int j) { return p.y0 * std::pow(lc.up, 2 * j - t); };

    std::vector<NodeInput> nodes;
    nodes.reserve(static_cast<size_t>(N + 1) * (N + 2) / 2);
    auto node_id = [](int t, int j) {
        return static_cast<long long>(t) * (t + 1) / 2 + j;
    };
    for (int t = 0; t <= N; ++t) {
        for (int j = 0; j <= t; ++j) {
            NodeInput nd;
            nd.id = node_id(t, j);
            nd.stage = t;
            nd.state = rev(t, j);
            if (t < N) {
                nd.children = {{node_id(t + 1, j), 1.0 - lc.p_up},
                               {node_id(t + 1, j + 1), lc.p_up}};
            }
            nodes.push_back(std::move(nd));
        }
    }

    Game g;
    g.tree = build_tree(std::move(nodes));
    g.tree.set_recombining(true);
    const int n = g.tree.node_count();
    g.pay.resize(n);

    std::vector<double> mono_flow(n, 0.0);
    std::vector<double> mono_lump(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const int t = g.tree.stage(i);
        const double y = g.tree.state(i);
        const double disc = std::exp(-p.r * t * lc.dt);
        if (t < N) {
            g.pay.flow[i] = disc * (y - p.c) * lc.dt;
            mono_flow[i] = disc * (p.m * y - p.c) * lc.dt;
        }
        if (t == N && validation_mode) {
            mono_lump[i] = follower_premium(p.horizon, y, p);
        }
    }

    // Follower lump: value of the monopolist's remaining stopping problem.
    const SnellSolution mono = snell_envelope(g.tree, mono_flow, mono_lump);
    for (int i = 0; i < n; ++i) {
        if (g.tree.stage(i) < N) {
            g.pay.follower[i] = mono.U[i];
        } else {
            const double term =
                validation_mode ? leader_option(p.horizon, g.tree.state(i), p) : 0.0;
            g.pay.leader[i] = g.pay.follower[i] = g.pay.both[i] = term;
        }
    }
    return g;
}

// Fast array-based evaluation of one exit problem on the lattice, used by the
// convergence driver where building the full tree would be wasteful. Must
// agree with build_duopoly_game + snell_envelope; a test pins that down.
inline double lattice_exit_value(const DuopolyParams& p, double multiplier,
                                 double threshold, bool validation_mode) {
    const LatticeCoeffs lc = lattice_coeffs(p);
    const double b2 = beta2(p);
    const int N = p.steps;
    std::vector<double> v(N + 1);
    for (int j = 0; j <= N; ++j) {
        const double y = p.y0 * std::pow(lc.up, 2 * j - N);
        v[j] = validation_mode
                   ? detail::exit_premium(p.horizon, y, multiplier, threshold, p, b2)
                   : 0.0;
    }
    for (int t = N - 1; t >= 0; --t) {
        const double disc = std::exp(-p.r * t * lc.dt);
        for (int j = 0; j <= t; ++j) {
            const double y = p.y0 * std::pow(lc.up, 2 * j - t);
            const double flow = disc * (multiplier * y - p.c) * lc.dt;
            v[j] = std::max(0.0, flow + lc.p_up * v[j + 1] + (1.0 - lc.p_up) * v[j]);
        }
    }
    return v[0];
}

struct ConvergenceRow {
    int steps = 0;
    double follower_value = 0.0;
    double follower_rel_err = 0.0;
    double leader_value = 0.0;
    double leader_rel_err = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool monotone = false;  // errors weakly decrease along the schedule
};

inline ConvergenceReport validate_closed_form(const DuopolyParams& params,
                                              const std::vector<int>& step_schedule,
                                              bool validation_mode = true,
                                              double slack = 1e-12) {
    const Thresholds th = thresholds(params);
    const double f_exact = follower_premium(0.0, params.y0, params);
    const double l_exact = leader_option(0.0, params.y0, params);

    ConvergenceReport rep;
    rep.monotone = true;
    for (int steps : step_schedule) {
        DuopolyParams p = params;
        p.steps = steps;
        ConvergenceRow row;
        row.steps = steps;
        row.follower_value = lattice_exit_value(p, p.m, th.y_m, validation_mode);
        row.leader_value = lattice_exit_value(p, 1.0, th.y_1, validation_mode);
        row.follower_rel_err =
            std::abs(row.follower_value - f_exact) / std::max(1e-300, std::abs(f_exact));
        row.leader_rel_err =
            std::abs(row.leader_value - l_exact) / std::max(1e-300, std::abs(l_exact));
        if (!rep.rows.empty()) {
            rep.monotone = rep.monotone &&
                           row.follower_rel_err <= rep.rows.back().follower_rel_err + slack &&
                           row.leader_rel_err <= rep.rows.back().leader_rel_err + slack;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace timinggame
