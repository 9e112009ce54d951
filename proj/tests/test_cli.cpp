#include "deltahjb/errors.hpp"
#include "deltahjb/experiment.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace deltahjb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json tiny_heston() {
    return json::parse(R"({
      "problem": "heston_investment",
      "utility": {"p": 0.5},
      "heston": {"r": 0.05, "lambda": 0.5, "kappa": 10.0, "theta": 0.05, "sigma": 0.5, "rho": -0.5, "v0": 0.45},
      "solver": {"N": 50, "T": 1.0, "orders": [4, 4], "quad_nodes": 8, "window": [[1.0, 2.0], [0.3, 0.6]]},
      "table1": {"orders": [4, 5]},
      "report": {"surface_points": 5},
      "simulate": {"initial_wealth": 1.5, "steps": 20, "paths": 3, "mc_paths": 200, "mc_steps": 20},
      "seed": 7
    })");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("DELTA_HJB_LOG=error ") + DELTA_HJB_BIN + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("delta_hjb_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Config, ParsesAndExtendsWindow) {
    const auto c = parse_config(tiny_heston());
    EXPECT_EQ(c.problem, Problem::HestonInvestment);
    EXPECT_DOUBLE_EQ(c.solver.box[0].lo(), 0.5);
    EXPECT_DOUBLE_EQ(c.solver.box[0].hi(), 5.5);
    EXPECT_EQ(c.report_window().size(), 2u);
    EXPECT_EQ(c.seed, 7u);
}

TEST(Config, RoundTrip) {
    const auto a = parse_config(tiny_heston());
    const auto b = parse_config(to_json(a));
    EXPECT_EQ(to_json(a), to_json(b));
    EXPECT_EQ(b.solver.box, a.solver.box);
}

TEST(Config, MissingFieldIsNamed) {
    auto j = tiny_heston();
    j["heston"].erase("kappa");
    try {
        parse_config(j);
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("heston.kappa"), std::string::npos) << e.what();
    }
}

TEST(Config, RejectsBadValues) {
    auto j = tiny_heston();
    j["problem"] = "nonsense";
    EXPECT_THROW(parse_config(j), InputError);
    j = tiny_heston();
    j["utility"]["p"] = 1.5;
    EXPECT_THROW(parse_config(j), InputError);
    j = tiny_heston();
    j["solver"]["orders"] = json::array({4});
    EXPECT_THROW(parse_config(j), InputError);
    j = tiny_heston();
    j["solver"].erase("window");
    EXPECT_THROW(parse_config(j), InputError);
}

TEST(Config, ShippedConfigsLoad) {
    for (const auto& e : fs::directory_iterator(CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_config(e.path())) << e.path();
    }
}

TEST(Config, ReinsuranceConversion) {
    auto j = tiny_heston();
    j["problem"] = "reinsurance_heston";
    j["reinsurance"] = {{"c", 0.13}, {"b", 0.6}, {"eta", 0.3}, {"vartheta", 0.5}, {"r", 0.05}};
    j["simulate"]["initial_wealth"] = 5.0;
    const auto c = parse_config(j);
    EXPECT_NEAR(converted_initial_wealth(c), 4.975, 1e-3);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    EXPECT_NE(run_cli(""), 0);
    EXPECT_NE(run_cli("solve --config /nonexistent.json"), 0);
    auto j = tiny_heston();
    j["heston"].erase("kappa");
    std::ofstream(dir / "bad.json") << j.dump();
    EXPECT_EQ(run_cli("solve --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 2);
    j = tiny_heston();
    j["problem"] = "heston_investment";
    std::ofstream(dir / "good.json") << j.dump();
    EXPECT_EQ(run_cli("stopping --config " + (dir / "good.json").string() + " --out " + (dir / "s").string()), 2);
}

TEST(Cli, SolveTableSimulateWriteArtifacts) {
    const auto dir = scratch("artifacts");
    std::ofstream(dir / "c.json") << tiny_heston().dump();
    const std::string cfg = " --config " + (dir / "c.json").string();
    ASSERT_EQ(run_cli("solve" + cfg + " --out " + (dir / "solve").string()), 0);
    for (const char* f : {"value_surface.csv", "strategy.csv", "tensor_t0.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir / "solve" / f)) << f;
    const auto m = json::parse(slurp(dir / "solve" / "manifest.json"));
    EXPECT_TRUE(m.contains("diagnostics"));
    EXPECT_TRUE(m.contains("oracle"));

    ASSERT_EQ(run_cli("table1" + cfg + " --out " + (dir / "t1").string()), 0);
    EXPECT_EQ(slurp(dir / "t1" / "table1.csv").substr(0, 26), "M,value_err,strategy_err\n4");

    ASSERT_EQ(run_cli("simulate" + cfg + " --out " + (dir / "sim").string()), 0);
    const auto sm = json::parse(slurp(dir / "sim" / "manifest.json"));
    EXPECT_TRUE(sm.contains("monte_carlo"));
    EXPECT_TRUE(fs::exists(dir / "sim" / "paths.csv"));
}

TEST(Cli, ArtifactsIdenticalAcrossThreadCounts) {
    const auto dir = scratch("threads");
    std::ofstream(dir / "c.json") << tiny_heston().dump();
    const std::string cfg = " --config " + (dir / "c.json").string();
    for (const char* cmd : {"solve", "simulate"}) {
        ASSERT_EQ(run_cli(std::string(cmd) + cfg + " --threads 1 --out " + (dir / "a").string()), 0);
        ASSERT_EQ(run_cli(std::string(cmd) + cfg + " --threads 4 --out " + (dir / "b").string()), 0);
        for (const auto& e : fs::directory_iterator(dir / "a")) {
            if (e.path().extension() != ".csv") continue;
            EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << cmd << ' ' << e.path().filename();
        }
        fs::remove_all(dir / "a");
        fs::remove_all(dir / "b");
    }
}

TEST(Cli, SeedOverrideChangesPaths) {
    const auto dir = scratch("seed");
    std::ofstream(dir / "c.json") << tiny_heston().dump();
    const std::string cfg = " --config " + (dir / "c.json").string();
    ASSERT_EQ(run_cli("simulate" + cfg + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(run_cli("simulate" + cfg + " --seed 8 --out " + (dir / "b").string()), 0);
    EXPECT_NE(slurp(dir / "a" / "paths.csv"), slurp(dir / "b" / "paths.csv"));
}
