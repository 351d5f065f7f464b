#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pedf/harness.hpp"

using namespace pedf;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = PEDF_SCENARIO_DIR;

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

Cli invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pedf_sim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Cli r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pedf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    ::unsetenv(kOutDirEnv);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    ::unsetenv(kOutDirEnv);
  }

  bool has_tmp_leftovers() const {
    for (const auto& e : fs::recursive_directory_iterator(dir_)) {
      if (e.path().extension() == ".tmp") return true;
    }
    return false;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ScenariosListsBuiltIns) {
  const auto r = invoke({"scenarios"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("fig1"), std::string::npos);
  EXPECT_NE(r.out.find("grid"), std::string::npos);
}

TEST_F(CliTest, RunWritesAllOutputs) {
  const auto r = invoke({"run", "--config", (kScenarios / "fig1_worked_example.json").string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto run = dir_ / "pedf-seed1";
  for (const char* f : {"config.json", "trace.csv", "energy.csv", "metrics.json"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  const auto metrics = json::parse(slurp(run / "metrics.json"));
  EXPECT_EQ(metrics["totals"]["delivered"], 2);
  EXPECT_NE(slurp(run / "trace.csv").find("route=S-1-2-4-D"), std::string::npos);
  EXPECT_FALSE(has_tmp_leftovers());

  // The echoed config reproduces the run.
  const auto again = invoke({"run", "--config", (run / "config.json").string(), "--out", (dir_ / "again").string()});
  ASSERT_EQ(again.code, kExitOk) << again.err;
  EXPECT_EQ(slurp(dir_ / "again" / "pedf-seed1" / "trace.csv"), slurp(run / "trace.csv"));
}

TEST_F(CliTest, MissingConfigIsAConfigError) {
  const auto r = invoke({"run", "--config", "/nonexistent/run.json", "--out", dir_.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("/nonexistent/run.json"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(CliTest, BadFlagsAreConfigErrors) {
  EXPECT_EQ(invoke({"run", "--scenario", "fig1", "--seed", "x", "--out", dir_.string()}).code, kExitConfig);
  EXPECT_EQ(invoke({"run", "--scenario", "fig1", "--policy", "pedf,best-path", "--out", dir_.string()}).code,
            kExitConfig);
  EXPECT_EQ(invoke({"run", "--bogus"}).code, kExitConfig);
  EXPECT_EQ(invoke({}).code, kExitConfig);
  const auto both = invoke({"run", "--scenario", "fig1", "--config", "/nonexistent/run.json"});
  EXPECT_EQ(both.code, kExitConfig);
  EXPECT_NE(both.err.find("mutually exclusive"), std::string::npos) << both.err;
}

TEST_F(CliTest, ValidatePrintsEffectiveConfig) {
  const auto r = invoke({"validate", (kScenarios / "fig1_lifetime.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["workload"]["priority_mix"], json::array({0.05, 0.05, 0.45, 0.45}));
  EXPECT_EQ(doc["rng"], std::string(Rng::kAlgorithm));

  fs::create_directories(dir_);
  std::ofstream(dir_ / "bad.json") << R"({"topology": "fig1", "workload": {"priority_mix": [0.3, 0.3, 0.2, 0.1]}})";
  const auto bad = invoke({"validate", (dir_ / "bad.json").string()});
  EXPECT_EQ(bad.code, kExitConfig);
  EXPECT_NE(bad.err.find("priority_mix"), std::string::npos) << bad.err;
}

TEST_F(CliTest, CompareWritesReportsAndSummary) {
  const auto r = invoke({"compare", "--scenario", "fig1", "--policies", "pedf,best-path", "--seeds", "1..3",
                         "--horizon", "5", "--jobs", "3", "--out", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (int s = 1; s <= 3; ++s) {
    const auto doc = json::parse(slurp(dir_ / ("comparison-seed" + std::to_string(s) + ".json")));
    EXPECT_EQ(doc["columns"].size(), 2u);
    EXPECT_TRUE(fs::exists(run_dir(dir_, Policy::PEDF, s) / "metrics.json"));
    EXPECT_TRUE(fs::exists(run_dir(dir_, Policy::AlwaysBestPath, s) / "metrics.json"));
  }
  const auto csv = slurp(dir_ / "comparison.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  const auto summary = json::parse(slurp(dir_ / "summary.json"));
  EXPECT_EQ(summary["seeds"], 3);
  EXPECT_TRUE(summary["policies"].contains("pedf"));
  EXPECT_TRUE(summary["policies"].contains("best-path"));
  EXPECT_FALSE(has_tmp_leftovers());
}

TEST_F(CliTest, ParallelJobsMatchSerial) {
  const auto config = (kScenarios / "fig1_balance.json").string();
  const std::vector<std::string> common = {"--config", config, "--seeds", "1..4", "--horizon", "20"};
  auto serial = common, parallel = common;
  serial.insert(serial.begin(), "compare");
  serial.insert(serial.end(), {"--jobs", "1", "--out", (dir_ / "serial").string()});
  parallel.insert(parallel.begin(), "compare");
  parallel.insert(parallel.end(), {"--jobs", "4", "--out", (dir_ / "parallel").string()});
  ASSERT_EQ(invoke(serial).code, kExitOk);
  ASSERT_EQ(invoke(parallel).code, kExitOk);
  EXPECT_EQ(slurp(dir_ / "serial" / "comparison.csv"), slurp(dir_ / "parallel" / "comparison.csv"));
  EXPECT_EQ(slurp(dir_ / "serial" / "pedf-seed3" / "metrics.json"),
            slurp(dir_ / "parallel" / "pedf-seed3" / "metrics.json"));
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
  ::setenv(kOutDirEnv, (dir_ / "env").string().c_str(), 1);
  ASSERT_EQ(invoke({"run", "--scenario", "fig1", "--horizon", "2"}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "env" / "pedf-seed1" / "metrics.json"));
  ASSERT_EQ(invoke({"run", "--scenario", "fig1", "--horizon", "2", "--out", (dir_ / "flag").string()}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "flag" / "pedf-seed1" / "metrics.json"));
}
