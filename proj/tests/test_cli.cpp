#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
constexpr double pi = std::numbers::pi;

struct Run {
  int code;
  std::string out;  // stdout and stderr
};

std::filesystem::path scratch() {
  static const auto dir = [] {
    auto p = std::filesystem::temp_directory_path() / ("casimir-cli-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
  }();
  return dir;
}

Run run(const std::string& args, bool merge_stderr = false, const std::string& env = "") {
  const std::string cmd = "cd '" + scratch().string() + "' && " + env + " '" CASIMIR_CLI_PATH "' " + args +
                          (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, PairPerfectConductorRetarded) {
  const auto r = run("pair --material perfect --r 1 --regime ret --format json --manifest none");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  const auto& res = j["results"][0];
  EXPECT_NEAR(res["coefficient"].get<double>(), -23.0 / (4.0 * pi), 1e-12);
  EXPECT_NEAR(res["coefficient"].get<double>(), -1.83028, 1e-5);
  EXPECT_EQ(res["scale"], "HBAR_C_RHO6_OVER_R7");
  EXPECT_EQ(res["regime"], "ret");
  EXPECT_EQ(res["converged"], true);
  EXPECT_TRUE(res.contains("error"));
}

TEST(Cli, PairGoldAutoSelectsNonretarded) {
  const auto r = run("pair --material gold --r 1e-9m --regime auto --format json --manifest none");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto res = json::parse(r.out)["results"][0];
  EXPECT_EQ(res["regime"], "nonret");
  const auto flags = res["flags"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(flags.begin(), flags.end(), "first-order-gamma"), flags.end());
}

TEST(Cli, MissingRequiredFlagIsUsageError) {
  const auto r = run("pair --material gold --manifest none", true);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("Usage:"), std::string::npos);
  EXPECT_NE(r.out.find("--r"), std::string::npos);
}

TEST(Cli, InvalidValuesAreUsageErrors) {
  EXPECT_EQ(run("pair --r 1 --regime sideways --manifest none").code, 1);
  EXPECT_EQ(run("pair --r -2 --manifest none").code, 1);
  EXPECT_EQ(run("pair --r 3furlongs --manifest none").code, 1);
  EXPECT_EQ(run("triplet --sides 1,1,3 --manifest none").code, 1);
  EXPECT_EQ(run("triplet --sides 1,1 --manifest none").code, 1);
  EXPECT_EQ(run("macro --order total --epsilon 0.5 --manifest none").code, 1);
  EXPECT_EQ(run("pair --material perfect --r 2 --regime nonret --manifest none").code, 1);
  EXPECT_EQ(run("nonsense").code, 1);
  EXPECT_EQ(run("").code, 1);
}

TEST(Cli, CasimirBothReportsFractions) {
  const auto r = run("casimir --order both --format json --manifest none");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["results"].size(), 3u);
  EXPECT_NEAR(j["results"][0]["coefficient"].get<double>(), -0.0109, 1e-4);
  EXPECT_NEAR(j["results"][1]["coefficient"].get<double>(), 0.0126, 1e-4);
  EXPECT_NEAR(j["results"][2]["coefficient"].get<double>(), -0.0137, 1e-4);
  EXPECT_NEAR(j["diagnostics"]["pairwise_fraction"].get<double>(), 0.797, 1e-3);
  EXPECT_NEAR(j["diagnostics"]["w3_w2_ratio"].get<double>(), 1.1491, 1e-4);
}

TEST(Cli, CasimirTableOutput) {
  const auto r = run("casimir --order both --manifest none");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("-0.0109237"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0.0125521"), std::string::npos);
  EXPECT_NE(r.out.find("pairwise_fraction"), std::string::npos);
}

TEST(Cli, MacroPerfectConductor) {
  const auto r = run("macro --epsilon inf --order total --format json --manifest none");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out)["results"][0]["coefficient"].get<double>(), -0.119366, 1e-6);
  const auto two = run("macro --order 2 --format json --manifest none");
  ASSERT_EQ(two.code, 0);
  EXPECT_NEAR(json::parse(two.out)["results"][0]["coefficient"].get<double>(), 111.0 / (448.0 * pi), 1e-5);
}

TEST(Cli, TripletCollinearAttractive) {
  const auto r = run("triplet --sides 1,1,2 --regime ret --format csv --manifest none");
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "name");
  EXPECT_LT(std::stod(rows[1][1]), 0.0);
}

TEST(Cli, ConvergenceScalingLaw) {
  const auto r = run("convergence --study scaling-law --manifest none");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"param", "value", "error", "evals"}));
  const std::vector<double> ds{0.5, 1.0, 2.0, 4.0};
  const double limit = std::stod(rows[5][1]);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_DOUBLE_EQ(std::stod(rows[i + 1][0]), ds[i]);
    EXPECT_NEAR(std::stod(rows[i + 1][1]), limit, 3.0 * std::stod(rows[i + 1][2]) + std::stod(rows[5][2]));
  }
}

TEST(Cli, ConvergenceLambdaLadder) {
  const auto r = run("convergence --study lambda-ladder --levels 4 --manifest none");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(std::stod(rows.back()[0]), 0.0);
  const double alpha = std::stod(rows.back()[1]);
  const double exact = -4.0 * (111.0 / (448.0 * pi)) * 8.0 * pi * pi * pi / 9.0;
  EXPECT_GE(alpha, -8.8);
  EXPECT_LE(alpha, -8.2);
  EXPECT_NEAR(alpha, exact, 0.03 * std::abs(exact));
}

TEST(Cli, ConvergenceZeroLevelsIsUsageError) {
  EXPECT_EQ(run("convergence --study lambda-ladder --levels 0 --manifest none").code, 1);
}

TEST(Cli, NonConvergenceExitsTwo) {
  const auto r = run("pair --material gold --r 100 --regime full --tol 1e-15 --max-subdivisions 1 --manifest none");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, CsvIsLocaleIndependent) {
  const auto plain = run("casimir --order both --format csv --manifest none");
  const auto german = run("casimir --order both --format csv --manifest none", false, "LC_ALL=de_DE.UTF-8 LANG=de_DE.UTF-8");
  ASSERT_EQ(german.code, 0);
  EXPECT_EQ(plain.out, german.out);
  const auto rows = parse_csv(german.out);
  EXPECT_EQ(rows[1][1].find(' '), std::string::npos);
  EXPECT_NE(rows[1][1].find('.'), std::string::npos);
}

TEST(Cli, ManifestAndReplay) {
  const auto path = (scratch() / "run.json").string();
  const auto r = run("convergence --study monte-carlo --levels 2 --samples 20000 --seed 11 --manifest '" + path + "'");
  ASSERT_EQ(r.code, 0);
  std::ifstream in(path);
  ASSERT_TRUE(in.good());
  const auto m = json::parse(in);
  for (const char* key : {"command", "argv", "parameters", "tolerances", "seed", "version", "wall_time_s", "results", "output"})
    EXPECT_TRUE(m.contains(key)) << key;
  EXPECT_EQ(m["seed"], 11);
  EXPECT_EQ(m["output"].get<std::string>(), r.out);

  // Replay with a different worker count must reproduce the output bit for bit.
  const auto again = run("replay '" + path + "'", false, "CASIMIR_THREADS=1");
  EXPECT_EQ(again.code, 0);
  EXPECT_EQ(again.out, r.out);

  auto tampered = m;
  tampered["output"] = "something else\n";
  const auto bad = (scratch() / "tampered.json").string();
  std::ofstream(bad) << tampered.dump();
  EXPECT_EQ(run("replay '" + bad + "'").code, 3);
  EXPECT_EQ(run("replay /nonexistent/manifest.json").code, 1);
}

TEST(Cli, DefaultManifestIsWritten) {
  std::filesystem::remove(scratch() / "casimir-manifest.json");
  ASSERT_EQ(run("macro --order 1").code, 0);
  EXPECT_TRUE(std::filesystem::exists(scratch() / "casimir-manifest.json"));
}
