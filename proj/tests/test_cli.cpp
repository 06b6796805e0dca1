#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "disco/cli.hpp"

using namespace disco;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// A scratch directory holding a small generated web and a config.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("disco_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "spec.json")
        << R"({"seed":3,"n_relevant":40,"n_irrelevant":400,"n_seeds":3,"near_junk":60})";
    std::ofstream(dir_ / "config.json")
        << R"({"engine":{"page_budget_total":400,"per_iteration_page_budget":50}})";
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  int gen_sim() { return run({"gen-sim", "--spec", p("spec.json"), "--out", p("sim")}); }
  int discover(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"discover", "--config", p("config.json"), "--provider",
                                     "sim:" + p("sim"), "--out", p(out)};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, GenSimExitCodes) {
  EXPECT_EQ(gen_sim(), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "sim" / "simweb.json"));
  EXPECT_TRUE(fs::exists(dir_ / "sim" / "labels.csv"));
  EXPECT_EQ(gen_sim(), kExitOverwrite);
  EXPECT_EQ(run({"gen-sim", "--spec", p("spec.json"), "--out", p("sim"), "--force"}), kExitOk);
  std::ofstream(dir_ / "bad.json") << "{bad";
  EXPECT_EQ(run({"gen-sim", "--spec", p("bad.json"), "--out", p("x")}), kExitConfig);
  EXPECT_EQ(run({"gen-sim", "--nope"}), kExitConfig);
  EXPECT_EQ(run({"--help"}), kExitOk);
}

TEST_F(CliTest, DiscoverErrors) {
  ASSERT_EQ(gen_sim(), kExitOk);
  EXPECT_EQ(discover("r", {"--ranker", "nope"}), kExitConfig);
  EXPECT_NE(err_.str().find("unknown ranker"), std::string::npos);
  EXPECT_EQ(discover("r", {"--operator", "sideways"}), kExitConfig);
  EXPECT_EQ(run({"discover", "--config", p("config.json"), "--provider", "replay:" + p("none.jsonl"),
                 "--out", p("r")}),
            kExitProvider);
  std::ofstream(dir_ / "strict.json") << R"({"engine":{"page_budget":1}})";
  EXPECT_EQ(run({"discover", "--config", p("strict.json"), "--provider", "sim:" + p("sim"), "--out", p("r")}),
            kExitConfig);
  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(run({"eval", "--run", p("empty")}), kExitRuntime);
}

TEST_F(CliTest, DiscoverIsDeterministicAndEvaluates) {
  ASSERT_EQ(gen_sim(), kExitOk);
  ASSERT_EQ(discover("a"), kExitOk) << err_.str();
  ASSERT_EQ(discover("b"), kExitOk);
  for (const char* f : {"iterations.csv", "bandit.csv", "ranked.csv", "state.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(discover("a"), kExitOverwrite);

  ASSERT_EQ(run({"eval", "--run", p("a"), "--truth", "sim-labels:" + p("sim")}), kExitOk);
  std::istringstream csv(out_.str());
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header.rfind("run,ranker,", 0), 0u);
  EXPECT_FALSE(row.empty());
}

TEST_F(CliTest, ResumeMatchesStraightRun) {
  ASSERT_EQ(gen_sim(), kExitOk);
  ASSERT_EQ(discover("straight"), kExitOk);
  ASSERT_EQ(discover("split", {"--max-iterations", "4"}), kExitOk);
  EXPECT_NE(slurp(dir_ / "split" / "iterations.csv"), slurp(dir_ / "straight" / "iterations.csv"));
  ASSERT_EQ(discover("split", {"--resume"}), kExitOk) << err_.str();
  EXPECT_EQ(slurp(dir_ / "split" / "iterations.csv"), slurp(dir_ / "straight" / "iterations.csv"));
  EXPECT_EQ(slurp(dir_ / "split" / "ranked.csv"), slurp(dir_ / "straight" / "ranked.csv"));
  EXPECT_EQ(discover("missing", {"--resume"}), kExitRuntime);
}

TEST_F(CliTest, RankPlantedCorpus) {
  ASSERT_EQ(run({"gen-corpus", "--out", p("corpus"), "--relevant", "10", "--noise", "40", "--negatives", "20",
                 "--seeds", "5"}),
            kExitOk);
  ASSERT_EQ(run({"rank", "--corpus", p("corpus"), "--seeds", p("corpus/seeds.txt"), "--ranker", "cosine"}),
            kExitOk)
      << err_.str();
  std::istringstream csv(out_.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 1u + 45u);  // header plus every non-seed page
  EXPECT_EQ(run({"rank", "--corpus", p("nowhere"), "--seeds", p("corpus/seeds.txt")}), kExitConfig);
}
