#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "carpet/carpet.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(testing::TempDir()) / ("carpet_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome run(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(CARPET_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
}

std::size_t count(const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto at = text.find(what); at != std::string::npos; at = text.find(what, at + 1)) ++n;
    return n;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST(Cli, GenWritesStandardCarpets) {
    const fs::path d = scratch("gen");
    ASSERT_EQ(run("gen --standard 1 -o " + (d / "c1.json").string(), d).code, 0);
    EXPECT_EQ(carpet::parse_carpet(slurp(d / "c1.json")).disks.size(), 9u);
    ASSERT_EQ(run("gen --standard 3 -o " + (d / "c3.json").string(), d).code, 0);
    EXPECT_EQ(carpet::parse_carpet(slurp(d / "c3.json")).disks.size(), 585u);
}

TEST(Cli, GenRejectsGenerationZero) {
    const fs::path d = scratch("gen0");
    const Outcome r = run("gen --standard 0", d);
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, UnknownFlagIsUsageError) {
    const fs::path d = scratch("usage");
    EXPECT_EQ(run("solve --standard 1 --bogus", d).code, 2);
    EXPECT_EQ(run("solve --standard 1 --tol-gap -1", d).code, 2);
    EXPECT_EQ(run("", d).code, 2);
}

TEST(Cli, SolveWritesOutputsAndPasses) {
    const fs::path d = scratch("solve");
    ASSERT_EQ(run("gen --standard 1 -o " + (d / "c.json").string(), d).code, 0);
    const Outcome r = run("solve --input " + (d / "c.json").string() + " -o " + (d / "out").string(), d);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"solution.json", "layout.json", "report.json", "timings.json"}) EXPECT_TRUE(fs::exists(d / "out" / f)) << f;
    const auto report = nlohmann::json::parse(slurp(d / "out" / "report.json"));
    EXPECT_NEAR(report["modulus"]["D"].get<double>(), 1.0, 1e-8);
    EXPECT_TRUE(report["pass"].get<bool>());
}

TEST(Cli, RigidityFieldOnSquareTiling) {
    const fs::path d = scratch("rigidity");
    const std::vector<carpet::Square> tiles{{0, 0, 0.5}, {0.5, 0, 0.5}, {0, 0.5, 0.5}, {0.5, 0.5, 0.5}};
    carpet::save_carpet(carpet::generate_square_carpet(tiles, carpet::Box{0, 0, 1, 1}), (d / "c.json").string());
    ASSERT_EQ(run("solve --rigidity --input " + (d / "c.json").string() + " -o " + d.string(), d).code, 0);
    const auto report = nlohmann::json::parse(slurp(d / "report.json"));
    ASSERT_TRUE(report.contains("rigidity"));
    EXPECT_LE(report["rigidity"]["displacement"].get<double>(), 1e-6);
}

TEST(Cli, DisconnectedCarpetNamesTheStage) {
    const fs::path d = scratch("disconnected");
    carpet::CarpetConfig c;
    c.outer = carpet::rectangle_outer(carpet::Box{0, 0, 1, 1});
    c.marks = carpet::rectangle_marks(carpet::Box{0, 0, 1, 1});
    c.disks.push_back(carpet::make_disk(0, carpet::square_polygon({0.2, 0.4, 0.2})));
    c.disks.push_back(carpet::make_disk(1, carpet::square_polygon({0.6, 0.4, 0.2})));
    carpet::save_carpet(c, (d / "c.json").string());
    const Outcome r = run("solve --input " + (d / "c.json").string() + " -o " + d.string(), d);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("passage: graph-disconnected"), std::string::npos) << r.err;
}

TEST(Cli, MissingInputIsStageError) {
    const fs::path d = scratch("missing");
    const Outcome r = run("solve --input " + (d / "nope.json").string(), d);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("io"), std::string::npos);
}

TEST(Cli, CorruptInputIsStageError) {
    const fs::path d = scratch("corrupt");
    write(d / "c.json", "{\"outer\": [[0,0],[1,0]");
    EXPECT_EQ(run("solve --input " + (d / "c.json").string(), d).code, 1);
    write(d / "m.json", "{\"outer\": [[0,1],[0,0],[1,0],[1,1]], \"disks\": []}");
    const Outcome r = run("solve --input " + (d / "m.json").string(), d);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("marks"), std::string::npos);
}

TEST(Cli, FailedCheckStillWritesReport) {
    // Tolerances below the rounding floor of a non-dyadic instance make the
    // gap and cross-checks fail while every stage still completes.
    const fs::path d = scratch("checkfail");
    const Outcome r = run("solve --standard 2 --tol-conj 1e-300 --tol-gap 1e-300 --tol-chain 1e-300 -o " + d.string(), d);
    ASSERT_TRUE(fs::exists(d / "report.json"));
    const auto report = nlohmann::json::parse(slurp(d / "report.json"));
    EXPECT_EQ(r.code, report["pass"].get<bool>() ? 0 : 3);
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, ReportSubcommandExitCodes) {
    const fs::path d = scratch("report");
    write(d / "good.json", R"({"checks":[{"name":"a","value":0,"relation":"<=","target":1,"pass":true}]})");
    write(d / "bad.json", R"({"checks":[{"name":"a","value":2,"relation":"<=","target":1,"pass":false}]})");
    EXPECT_EQ(run("report " + (d / "good.json").string(), d).code, 0);
    EXPECT_EQ(run("report " + (d / "bad.json").string(), d).code, 3);
    EXPECT_EQ(run("report " + (d / "absent.json").string(), d).code, 1);
}

TEST(Cli, RenderCountsAndDeterminism) {
    const fs::path d = scratch("render");
    ASSERT_EQ(run("solve --standard 1 -o " + d.string(), d).code, 0);
    const std::string args = "render --standard 1 --layout " + (d / "layout.json").string() + " --levels 0.5 -o ";
    ASSERT_EQ(run(args + (d / "r1").string(), d).code, 0);
    ASSERT_EQ(run(args + (d / "r2").string(), d).code, 0);
    const std::string layout = slurp(d / "r1" / "layout.svg");
    EXPECT_EQ(count(layout, "<rect"), 9u);
    EXPECT_EQ(count(layout, "<polyline"), 1u);
    EXPECT_EQ(count(layout, "class=\"frame\""), 1u);
    EXPECT_EQ(layout, slurp(d / "r2" / "layout.svg"));
    EXPECT_EQ(slurp(d / "r1" / "input.svg"), slurp(d / "r2" / "input.svg"));
    EXPECT_EQ(run("render --layout " + (d / "nothing.json").string() + " -o " + d.string(), d).code, 1);
}

TEST(Cli, SolveIsByteDeterministic) {
    const fs::path d = scratch("determinism");
    ASSERT_EQ(run("verify --standard 2 --levels 0.3,0.6 --seed 9 -o " + (d / "a").string(), d).code, 0);
    ASSERT_EQ(run("verify --standard 2 --levels 0.3,0.6 --seed 9 -o " + (d / "b").string(), d).code, 0);
    for (const char* f : {"solution.json", "layout.json", "report.json"}) EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
}
