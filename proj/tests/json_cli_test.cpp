#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "timinggame/cli.hpp"
#include "timinggame/json_io.hpp"

using namespace timinggame;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FIXTURE_DIR;

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "timinggame_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

}  // namespace

TEST_CASE("game files load, validate, and round-trip bit for bit") {
    GameSpec spec = load_game_file((kFixtures / "attrition_small.json").string());
    REQUIRE(spec.explicit_game.has_value());
    const Game& g = *spec.explicit_game;
    CHECK(g.node_count() == 7);
    CHECK(g.pay.follower[g.tree.index_of(2)] == 5.0);

    nlohmann::json emitted = game_to_json(g);
    GameSpec again = load_game(emitted);
    const Game& g2 = *again.explicit_game;
    REQUIRE(g2.node_count() == g.node_count());
    for (int i = 0; i < g.node_count(); ++i) {
        CHECK(g.pay.flow[i] == g2.pay.flow[i]);
        CHECK(g.pay.leader[i] == g2.pay.leader[i]);
        CHECK(g.pay.follower[i] == g2.pay.follower[i]);
        CHECK(g.pay.both[i] == g2.pay.both[i]);
        CHECK(g.tree.ext_id(i) == g2.tree.ext_id(i));
    }
}

TEST_CASE("schema violations carry the node id") {
    auto parse = [](const char* text) { return load_game(nlohmann::json::parse(text)); };
    CHECK_THROWS_WITH_AS(
        parse(R"({"kind":"tree","nodes":[
            {"id":0,"stage":0,"children":[[1,0.6],[2,0.5]]},
            {"id":1,"stage":1},{"id":2,"stage":1}]})"),
        "probability sum 1.1 at node 0", game_error);
    CHECK_THROWS_AS(parse(R"({"kind":"mystery"})"), game_error);
    CHECK_THROWS_AS(parse(R"({"nodes":[]})"), game_error);
    CHECK_THROWS_AS(parse(R"({"kind":"tree","nodes":[{"stage":0}]})"), game_error);
}

TEST_CASE("single node game file is valid") {
    GameSpec spec = load_game(nlohmann::json::parse(
        R"({"kind":"tree","nodes":[{"id":0,"stage":0,"leader":0.0,"follower":0.0,"both":0.0}]})"));
    CHECK(spec.explicit_game->tree.last_stage() == 0);
}

TEST_CASE("duopoly game spec builds the lattice") {
    GameSpec spec = load_game(nlohmann::json::parse(
        R"({"kind":"gbm-duopoly","r":0.04,"mu":0.0,"sigma":0.2828427124746190,
            "c":1.0,"m":2.0,"y0":1.0,"horizon":30.0,"steps":40})"));
    REQUIRE(spec.duopoly.has_value());
    Game g = spec.build();
    CHECK(g.tree.last_stage() == 40);
    CHECK(g.node_count() == 41 * 42 / 2);
}

TEST_CASE("strategies round-trip through JSON including the boundary flag") {
    GameSpec spec = load_game_file((kFixtures / "preemption_chain.json").string());
    const Game g = spec.build();
    EfficientEquilibrium eq = efficient_equilibrium(g);
    nlohmann::json j = strategy_to_json(g.tree, eq.strategy, 1);
    ExtendedStrategy back = strategy_from_json(g.tree, j);
    CHECK(back.hazard == eq.strategy.hazard);
    CHECK(back.alpha == eq.strategy.alpha);
    CHECK(back.alpha_active == eq.strategy.alpha_active);
}

TEST_CASE("cli usage errors exit with code 2") {
    std::string err;
    CHECK(run_cli({"frobnicate"}, nullptr, &err) == 2);
    CHECK(run_cli({}, nullptr, &err) == 2);
    CHECK(run_cli({"solve-snell"}, nullptr, &err) == 2);  // missing --game
    CHECK(!err.empty());
    std::string out;
    CHECK(run_cli({"--help"}, &out) == 0);
}

TEST_CASE("cli solve-snell emits the envelope") {
    const std::string game = (kFixtures / "pure_chain.json").string();
    std::string out;
    REQUIRE(run_cli({"solve-snell", "--game", game, "--process", "leader"}, &out) == 0);
    auto j = nlohmann::json::parse(out);
    CHECK(j["root_value"].get<double>() == doctest::Approx(6.0));
    REQUIRE(run_cli({"solve-snell", "--game", game, "--process", "follower"}, &out) == 0);
    CHECK(nlohmann::json::parse(out)["root_value"].get<double>() == doctest::Approx(8.0));
}

TEST_CASE("cli equilibrium then verify round-trips on the bundled fixtures") {
    struct Case {
        const char* fixture;
        std::vector<std::string> extra;
    };
    const std::vector<Case> cases = {
        {"attrition_small.json", {"--mode", "symmetric", "--hazards", "exact"}},
        {"preemption_chain.json", {"--mode", "symmetric", "--hazards", "exact"}},
        {"preemption_chain.json", {"--mode", "efficient"}},
        {"pure_chain.json", {"--mode", "pure"}},
    };
    int idx = 0;
    for (const auto& c : cases) {
        CAPTURE(c.fixture);
        const std::string game = (kFixtures / c.fixture).string();
        const std::string eq_file =
            (temp_dir() / ("eq_" + std::to_string(idx++) + ".json")).string();
        std::vector<std::string> args = {"equilibrium", "--game", game, "--out", eq_file};
        args.insert(args.end(), c.extra.begin(), c.extra.end());
        REQUIRE(run_cli(args) == 0);

        std::string report;
        CHECK(run_cli({"verify", "--game", game, "--eq", eq_file}, &report) == 0);
        auto j = nlohmann::json::parse(report);
        CHECK(j["pass"].get<bool>());
    }
}

TEST_CASE("cli verify flags a perturbed strategy and names the worst node") {
    const std::string game = (kFixtures / "attrition_small.json").string();
    const std::string eq_file = (temp_dir() / "eq_perturb.json").string();
    REQUIRE(run_cli({"equilibrium", "--game", game, "--mode", "symmetric", "--hazards",
                     "exact", "--out", eq_file}) == 0);

    auto j = detail::read_json_file(eq_file);
    for (auto& jn : j["strategies"][0]["nodes"]) {
        const double h = jn["hazard"].get<double>();
        if (h > 0.05 && h < 0.9) {
            jn["hazard"] = std::min(1.0, h + 0.2);
            break;
        }
    }
    detail::write_json_file(eq_file, j);

    std::string report;
    CHECK(run_cli({"verify", "--game", game, "--eq", eq_file}, &report) == 1);
    auto r = nlohmann::json::parse(report);
    CHECK_FALSE(r["pass"].get<bool>());
    CHECK(r["worst_gap_node"].get<long long>() >= 0);
    CHECK(r["max_best_reply_gap"].get<double>() > 1e-6);
}

TEST_CASE("cli simulate reports estimates near the exact values") {
    const std::string game = (kFixtures / "pure_chain.json").string();
    const std::string eq_file = (temp_dir() / "eq_sim.json").string();
    REQUIRE(run_cli({"equilibrium", "--game", game, "--mode", "pure", "--out", eq_file}) ==
            0);
    std::string a, b;
    CHECK(run_cli({"simulate", "--game", game, "--eq", eq_file, "--paths", "2000", "--seed",
                   "9"},
                  &a) == 0);
    CHECK(run_cli({"simulate", "--game", game, "--eq", eq_file, "--paths", "2000", "--seed",
                   "9"},
                  &b) == 0);
    CHECK(a == b);  // bitwise deterministic given the seed
    auto j = nlohmann::json::parse(a);
    CHECK(j["estimate"][0].get<double>() == doctest::Approx(6.0));
    CHECK(j["exact"][1].get<double>() == doctest::Approx(7.0));
}

TEST_CASE("cli duopoly check emits csv and summary") {
    const std::string csv_file = (temp_dir() / "conv.csv").string();
    std::string out;
    REQUIRE(run_cli({"duopoly", "--sigma", "0.2828427124746190", "--steps", "150", "300",
                     "--check", "--csv", csv_file},
                    &out) == 0);
    auto j = nlohmann::json::parse(out);
    CHECK(j["beta2"].get<double>() == doctest::Approx((1.0 - std::sqrt(5.0)) / 2.0));
    CHECK(j["y_m"].get<double>() == doctest::Approx(0.1909830056));
    CHECK(j["y_1"].get<double>() == doctest::Approx(0.3819660113));
    CHECK(j["monotone"].get<bool>());

    std::ifstream csv(csv_file);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "steps,follower_err,leader_err");
    int rows = 0;
    for (std::string line; std::getline(csv, line) && !line.empty();) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("cli reports validation failures with exit code 1") {
    const std::string bad = (temp_dir() / "bad_game.json").string();
    std::ofstream(bad) << R"({"kind":"tree","nodes":[
        {"id":0,"stage":0,"children":[[1,0.6],[2,0.5]]},
        {"id":1,"stage":1},{"id":2,"stage":1}]})";
    std::string err;
    CHECK(run_cli({"solve-snell", "--game", bad}, nullptr, &err) == 1);
    CHECK(err.find("probability sum 1.1 at node 0") != std::string::npos);
    CHECK(run_cli({"solve-snell", "--game", "/nonexistent/file.json"}, nullptr, &err) == 1);
}
