#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "goe_cli/cli.hpp"

namespace fs = std::filesystem;

namespace {

using goe::cli::kExitConfig;
using goe::cli::kExitOk;
using goe::cli::kExitRuntime;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("goecomm-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_config({{"e_horizon", 2000}, {"d_horizon", 2000}, {"threads", 2}});
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write_config(const nlohmann::json& doc) {
    std::ofstream(dir_ / "config.json") << doc.dump();
  }

  int run(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "goecomm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(input);
    out_.str("");
    err_.str("");
    return goe::cli::run_cli(static_cast<int>(argv.size()), argv.data(), in, out_, err_);
  }

  std::string config() const { return (dir_ / "config.json").string(); }
  std::string out_dir() const { return (dir_ / "out").string(); }

  static nlohmann::json read_json(const fs::path& p) {
    std::ifstream f(p);
    return nlohmann::json::parse(f);
  }

  static std::size_t count_lines(const fs::path& p) {
    std::ifstream f(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(f, line)) ++n;
    return n;
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, SolveWritesSolutionAndManifest) {
  ASSERT_EQ(run({"solve", "--config", config(), "--agent", "sa", "--out", out_dir()}), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("mu* ="), std::string::npos);
  const auto sol = read_json(fs::path(out_dir()) / "solution_sa.json");
  EXPECT_EQ(sol.at("format"), "goe.policy_solution");
  EXPECT_EQ(sol.at("policy_low").size(), 20u);
  const auto manifest = read_json(fs::path(out_dir()) / "manifest.json");
  EXPECT_EQ(manifest.at("verb"), "solve");
  EXPECT_TRUE(manifest.contains("config_hash"));
}

TEST_F(CliTest, SimulateWritesMetricsAndTrace) {
  ASSERT_EQ(run({"simulate", "--config", config(), "--out", out_dir(), "--trace", "--seed", "4"}), kExitOk)
      << err_.str();
  EXPECT_EQ(count_lines(fs::path(out_dir()) / "metrics.csv"), 2u);
  EXPECT_EQ(count_lines(fs::path(out_dir()) / "trace.csv"), 4001u);
  EXPECT_EQ(read_json(fs::path(out_dir()) / "manifest.json").at("seed"), 4);
}

TEST_F(CliTest, SweepProducesOneRowPerValueAndPair) {
  ASSERT_EQ(run({"sweep", "--config", config(), "--axis", "theta_max", "--values", "1..10", "--out", out_dir()}),
            kExitOk)
      << err_.str();
  const fs::path csv = fs::path(out_dir()) / "sweep_theta_max.csv";
  EXPECT_EQ(count_lines(csv), 1u + 10u * 7u);
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "policy_pair,axis_value,avg_effectiveness,avg_goe,tx_rate,action_rate,seed");
}

TEST_F(CliTest, EstimateRoundTripsItsOwnLog) {
  ASSERT_EQ(run({"estimate", "--config", config(), "--out", out_dir()}), kExitOk) << err_.str();
  const auto first = read_json(fs::path(out_dir()) / "estimates.json");
  const std::string log = (fs::path(out_dir()) / "estimation_log.csv").string();
  const std::string second_dir = (dir_ / "again").string();
  ASSERT_EQ(run({"estimate", "--config", config(), "--log", log, "--out", second_dir}), kExitOk) << err_.str();
  const auto second = read_json(fs::path(second_dir) / "estimates.json");
  EXPECT_EQ(first.at("q"), second.at("q"));
  EXPECT_EQ(first.at("target_pmf"), second.at("target_pmf"));
}

TEST_F(CliTest, ExportedMapPassesTheCheck) {
  ASSERT_EQ(run({"export-map", "--config", config(), "--agent", "aa", "--out", out_dir()}), kExitOk) << err_.str();
  const fs::path map = fs::path(out_dir()) / "lookup_map_aa.json";
  ASSERT_EQ(run({"solve", "--config", config(), "--agent", "aa", "--check-map", map.string()}), kExitOk)
      << out_.str() << err_.str();
  EXPECT_NE(out_.str().find("0 mismatches"), std::string::npos);

  auto doc = read_json(map);
  auto& cell = doc["cells"][17];
  cell["action_low"] = 1 - cell["action_low"].get<int>();
  std::ofstream(map) << doc.dump();
  EXPECT_EQ(run({"solve", "--config", config(), "--agent", "aa", "--check-map", map.string()}), kExitRuntime);
  EXPECT_EQ(run({"solve", "--config", config(), "--agent", "sa", "--check-map", map.string()}), kExitConfig);
}

TEST_F(CliTest, EnvServeSpeaksTheProtocol) {
  write_config({{"e_horizon", 100}, {"sa_policy", "periodic"}, {"episode_length", 2}, {"episodes", 1}});
  const std::string input = "{\"v\":1,\"type\":\"act\",\"value\":1}\n{\"v\":1,\"type\":\"act\",\"value\":0}\n";
  ASSERT_EQ(run({"env-serve", "--config", config(), "--role", "aa"}, input), kExitOk) << err_.str();
  std::istringstream lines(out_.str());
  std::string line;
  std::vector<nlohmann::json> msgs;
  while (std::getline(lines, line)) msgs.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(msgs.size(), 4u);
  EXPECT_EQ(msgs[0].at("state").size(), 3u);
  EXPECT_TRUE(msgs[3].at("done").get<bool>());
  EXPECT_EQ(run({"env-serve", "--config", config(), "--role", "aa"}, "garbage\n"), kExitRuntime);
}

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({"solve", "--config", config(), "--bogus"}), kExitConfig);
  EXPECT_EQ(run({"solve"}), kExitConfig);
  EXPECT_EQ(run({}), kExitConfig);
  EXPECT_EQ(run({"solve", "--config", (dir_ / "missing.json").string()}), kExitConfig);
  EXPECT_EQ(run({"solve", "--config", config(), "--agent", "both"}), kExitConfig);
  EXPECT_EQ(run({"sweep", "--config", config(), "--axis", "budget", "--values", "1"}), kExitConfig);
  write_config({{"unknown_key", 1}});
  EXPECT_EQ(run({"simulate", "--config", config()}), kExitConfig);
  EXPECT_NE(err_.str().find("unknown_key"), std::string::npos);
}

TEST(ParseValues, Forms) {
  using goe::cli::parse_values;
  EXPECT_EQ(parse_values("1..4"), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(parse_values("0.5,0.7"), (std::vector<double>{0.5, 0.7}));
  const auto stepped = parse_values("0.02..0.1:0.02");
  ASSERT_EQ(stepped.size(), 5u);
  EXPECT_NEAR(stepped.back(), 0.1, 1e-12);
  EXPECT_ANY_THROW(parse_values("a,b"));
  EXPECT_ANY_THROW(parse_values("3..1"));
  EXPECT_ANY_THROW(parse_values("1..2:0"));
}

}  // namespace
