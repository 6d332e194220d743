#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bla/runner.hpp"

using namespace bla;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  std::string cmd = std::string(BLA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("bla-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, DefaultRunReport) {
  RunSpec s;
  auto r = execute(s).report;
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.rounds, 6u);
  EXPECT_EQ(r.epochs, 2u);
  auto j = r.to_json();
  EXPECT_EQ(j["rounds"], 6);
  EXPECT_TRUE(j["all_pass"].get<bool>());
  EXPECT_EQ(j["spec"]["byzantine_ids"], nlohmann::json::array({1}));
}

TEST(Cli, ResiliencyGuards) {
  RunSpec s;
  s.variant = Variant::interactive;
  EXPECT_THROW(execute(s), ConfigError);
  s.variant = Variant::signed_relays;
  s.n = 3;
  EXPECT_THROW(execute(s), ConfigError);
  s.n = 4;
  s.adversary = "nobody";
  EXPECT_THROW(execute(s), ConfigError);
  s.adversary = "silent";
  s.byzantine_ids = std::set<ProcessId>{1, 2};
  EXPECT_THROW(execute(s), ConfigError);
  s.byzantine_ids = std::set<ProcessId>{4};
  EXPECT_TRUE(execute(s).report.all_pass());
  EXPECT_THROW(parse_protocol("paxos"), ConfigError);
}

TEST(Cli, ReportsAreReproducible) {
  RunSpec s;
  s.protocol = ProtocolKind::gac;
  s.n = 7;
  s.f = 2;
  s.adversary = "random_fuzzer";
  s.adversary_seed = 5;
  auto a = execute(s).report.to_json().dump();
  auto b = execute(s).report.to_json().dump();
  EXPECT_EQ(a, b);
  s.parallel = true;
  EXPECT_EQ(execute(s).report.transcript_digest, execute(RunSpec(s)).report.transcript_digest);
}

TEST(Cli, MessagesReconcileWithTranscript) {
  RunSpec s;
  s.adversary = "equivocator";
  auto rr = execute(s);
  EXPECT_EQ(rr.report.messages, rr.transcript.envelopes.size());
  EXPECT_LE(rr.report.messages, 16u * rr.report.rounds);
}

TEST(Cli, SweepShapes) {
  EXPECT_EQ(sweep({}), "");
  RunSpec s;
  auto one = sweep({s});
  EXPECT_EQ(one, sweep_csv_header() + sweep_csv_row(execute(s).report));
  std::vector<RunSpec> grid;
  for (std::uint32_t f : {1u, 2u, 4u}) {
    RunSpec c;
    c.f = f;
    c.n = 3 * f + 1;
    grid.push_back(c);
  }
  auto csv = sweep(grid);
  EXPECT_EQ(lines(csv), 4u);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::vector<Round> rounds;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rounds.push_back(std::stoul(cells.at(9)));
    EXPECT_EQ(cells.back(), "1");
  }
  EXPECT_EQ(rounds, (std::vector<Round>{6, 9, 12}));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("--quiet"), 0);
  EXPECT_EQ(cli("--quiet --variant interactive --n 4 --f 1"), 2);
  EXPECT_EQ(cli("--quiet --n 3 --f 1"), 2);
  EXPECT_EQ(cli("--quiet --protocol nope"), 2);
  EXPECT_EQ(cli("--bogus-flag"), 2);
  EXPECT_EQ(cli("--quiet --protocol gac --max-rounds 2"), 1);
  EXPECT_EQ(cli("--quiet --variant interactive --n 5 --f 1 --adversary proof_forger"), 0);
}

TEST(Cli, WritesOutputs) {
  auto dir = scratch("out");
  ASSERT_EQ(cli("--quiet --trace --out " + dir.string()), 0);
  auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["rounds"], 6);
  EXPECT_EQ(lines(slurp(dir / "rounds.csv")), 7u);
  EXPECT_GT(lines(slurp(dir / "transcript.jsonl")), 0u);
  auto first = slurp(dir / "report.json");
  ASSERT_EQ(cli("--quiet --out " + dir.string()), 0);
  EXPECT_EQ(slurp(dir / "report.json"), first);
  fs::remove_all(dir);
}

TEST(Cli, OutputDirFromEnvironment) {
  auto dir = scratch("env");
  std::string cmd = "BLA_OUT_DIR=" + dir.string() + " " + BLA_CLI_PATH + " --quiet >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  fs::remove_all(dir);
}

TEST(Cli, SweepSubcommand) {
  auto dir = scratch("sweep");
  fs::create_directories(dir);
  auto csv = dir / "grid.csv";
  ASSERT_EQ(cli("sweep --protocols gac,gac_fast --fs 1,2 --seeds 2 --csv " + csv.string()), 0);
  EXPECT_EQ(lines(slurp(csv)), 9u);
  fs::remove_all(dir);
}

TEST(Cli, GlaReportCarriesTable) {
  RunSpec s;
  s.protocol = ProtocolKind::gla;
  s.terms = 2;
  auto j = execute(s).report.to_json();
  EXPECT_EQ(j["delta"], 6);
  ASSERT_EQ(j["t_table"].size(), 2u);
  EXPECT_EQ(j["t_table"][0]["T"], 24);
  EXPECT_EQ(j["rounds"], 12);
}
