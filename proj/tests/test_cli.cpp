#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "torusqe/io.hpp"

namespace fs = std::filesystem;
using torusqe::io::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("torusqe_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, bool with_out = true) {
    const std::string cmd = std::string(TORUSQE_CLI_PATH) + " " + args + (with_out ? " --out " + dir_.string() : "") + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  json summary(const std::string& prefix) const { return json::parse(read(prefix + ".json")); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ShellCount) {
  ASSERT_EQ(run("shell --d 4 --E 2"), 0);
  const auto j = summary("shell");
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["summary"]["r"], 24);
  EXPECT_TRUE(j["violations"].empty());
  EXPECT_EQ(read("shell.csv").substr(0, 12), "k1,k2,k3,k4\n");
  EXPECT_EQ(read("shell.dat").substr(0, 2), "# ");
}

TEST_F(Cli, ZygmundBound) {
  ASSERT_EQ(run("zygmund --d 2 --emax 500 --samples 200"), 0);
  EXPECT_LE(summary("zygmund")["summary"]["max_l4"].get<double>(), std::pow(3.0, 0.25) + 1e-9);
}

TEST_F(Cli, VarianceWithObservableFile) {
  torusqe::io::write_file((dir_ / "obs.json").string(),
                          R"({"dim":2,"entries":[[[6,8],0.5],[[-6,-8],0.5],[[1,1],0.25],[[-1,-1],0.25]]})");
  ASSERT_EQ(run("variance --d 2 --lambda 20 --basis haar:seed=7:count=3 --obs " + (dir_ / "obs.json").string()), 0);
  const auto j = summary("variance");
  ASSERT_EQ(j["summary"]["reports"].size(), 3u);
  for (const auto& rep : j["summary"]["reports"]) {
    EXPECT_GT(rep["v2"].get<double>(), 0.0);
    EXPECT_GT(rep["maintheo_ratio"].get<double>(), 0.0);
    EXPECT_TRUE(rep["prop_holds"].get<bool>());
  }
}

TEST_F(Cli, CsvIndependentOfThreadCount) {
  ASSERT_EQ(run("variance --lambda 12 --basis haar:count=2 --obs dict:random_box5 --threads 1 --prefix one"), 0);
  ASSERT_EQ(run("variance --lambda 12 --basis haar:count=2 --obs dict:random_box5 --threads 3 --prefix three"), 0);
  EXPECT_EQ(read("one.csv"), read("three.csv"));
  EXPECT_EQ(summary("one")["summary"].dump(), summary("three")["summary"].dump());
}

TEST_F(Cli, ConfigFileAndOverrides) {
  torusqe::io::write_file((dir_ / "cfg.json").string(), R"({"d":3,"E":3})");
  ASSERT_EQ(run("shell --config " + (dir_ / "cfg.json").string()), 0);
  EXPECT_EQ(summary("shell")["summary"]["r"], 8);
  ASSERT_EQ(run("shell --config " + (dir_ / "cfg.json").string() + " --E 1"), 0);
  EXPECT_EQ(summary("shell")["summary"]["r"], 6);
  torusqe::io::write_file((dir_ / "bad.json").string(), R"({"radius":3})");
  EXPECT_EQ(run("shell --config " + (dir_ / "bad.json").string()), 1);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("shell --d 1"), 1);
  EXPECT_EQ(run("variance --lambda x"), 1);
  EXPECT_EQ(run("variance --basis nope"), 1);
  EXPECT_EQ(run("period-decay --measure segment"), 1);
  EXPECT_EQ(run("shell --help"), 0);
}

TEST_F(Cli, ReferencePageListsEveryCommand) {
  ASSERT_EQ(run("reference", false), 0);
  const auto page = read("stdout.txt");
  for (const char* c : {"shell", "paircount", "separation", "iwaniec", "zygmund", "variance", "measure-variance",
                        "restriction", "period-decay", "decay-fit"}) {
    EXPECT_NE(page.find(std::string("## ") + c + "\n"), std::string::npos) << c;
  }
}

TEST_F(Cli, MeasureCommands) {
  ASSERT_EQ(run("decay-fit --measure circle:r=1 --emax 2000"), 0);
  EXPECT_NEAR(summary("decay-fit")["summary"]["alpha_hat"].get<double>(), 1.0, 0.15);
  ASSERT_EQ(run("restriction --emax 30 --basis exponential"), 0);
  EXPECT_NEAR(summary("restriction")["summary"]["max_deviation"].get<double>(), 0.0, 1e-12);
  ASSERT_EQ(run("period-decay --emax 40"), 0);
  ASSERT_EQ(run("measure-variance --measure lebesgue:d=2 --lambda 6 --basis exponential"), 0);
  EXPECT_NEAR(summary("measure-variance")["summary"]["reports"][0]["v2"].get<double>(), 0.0, 1e-24);
}
