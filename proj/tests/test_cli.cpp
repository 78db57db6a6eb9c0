#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" SOILING_CLI_PATH "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("soiling_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("synth --scenario 9"), 2);
    EXPECT_EQ(run("--version"), 0);
}

TEST(Cli, ZeroLengthInputExitsTwo) {
    const auto dir = scratch("empty");
    std::ofstream(dir / "e.csv");
    EXPECT_EQ(run("analyze " + q(dir / "e.csv") + " --out " + q(dir / "out")), 2);
    EXPECT_EQ(run("analyze " + q(dir / "missing.csv") + " --out " + q(dir / "out")), 2);
    EXPECT_TRUE(read_json(dir / "out" / "manifest.json")["partial"].get<bool>());
}

TEST(Cli, SynthThenAnalyzeLabeled) {
    const auto dir = scratch("flow");
    ASSERT_EQ(run("synth --scenario 3 --seed 4 --days 400 --out " + q(dir)), 0);
    const auto csv = dir / "synthetic_s3_4.csv";
    ASSERT_TRUE(fs::exists(csv));
    ASSERT_EQ(run("analyze " + q(csv) + " --labeled --out " + q(dir / "pi")), 0);
    EXPECT_DOUBLE_EQ(read_json(dir / "pi" / "manifest.json")["config"]["tau1"].get<double>(), 0.5);
    ASSERT_EQ(run("analyze " + q(csv) + " --out " + q(dir / "raw")), 0);
    EXPECT_DOUBLE_EQ(read_json(dir / "raw" / "manifest.json")["config"]["tau1"].get<double>(), 0.85);
}

TEST(Cli, ConfigFromEnvironmentAndFlag) {
    const auto dir = scratch("env");
    ASSERT_EQ(run("synth --days 365 --out " + q(dir)), 0);
    const auto csv = dir / "synthetic_s1_1.csv";
    std::ofstream(dir / "env.json") << R"({"lambda2": 250})";
    std::ofstream(dir / "flag.json") << R"({"lambda2": 125})";
    ASSERT_EQ(run("analyze " + q(csv) + " --labeled --out " + q(dir / "a"), "SOILING_CONFIG=" + q(dir / "env.json")), 0);
    EXPECT_DOUBLE_EQ(read_json(dir / "a" / "manifest.json")["config"]["lambda2"].get<double>(), 250.0);
    ASSERT_EQ(run("analyze " + q(csv) + " --labeled --config " + q(dir / "flag.json") + " --out " + q(dir / "b"),
                  "SOILING_CONFIG=" + q(dir / "env.json")),
              0);
    EXPECT_DOUBLE_EQ(read_json(dir / "b" / "manifest.json")["config"]["lambda2"].get<double>(), 125.0);
    std::ofstream(dir / "bad.json") << R"({"lambda2": -1})";
    EXPECT_EQ(run("analyze " + q(csv) + " --config " + q(dir / "bad.json") + " --out " + q(dir / "c")), 2);
}
