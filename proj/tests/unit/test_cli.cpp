#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "airfed/cli.hpp"

namespace airfed::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("airfed_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int invoke(std::vector<std::string> args) {
    std::vector<char*> argv;
    std::string prog = "airfed";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
  }

  std::map<std::string, std::string> read_dir(const fs::path& d) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(d)) {
      std::ifstream is(e.path(), std::ios::binary);
      std::ostringstream ss;
      ss << is.rdbuf();
      out[e.path().filename().string()] = ss.str();
    }
    return out;
  }

  fs::path dir_;
};

const char* kSimulate = R"({
  "grid": {"q": 8},
  "channel": {"sigma_c": 0.07},
  "codec": {"omega": 0.001},
  "objective": {"kind": "quadratic", "d": 4, "m": 3, "heterogeneity": 0.5, "seed": 3},
  "schedule": {"kind": "constant", "eta": 0.01, "rounds": 40},
  "sync": {"kind": "fixed", "interval": "auto"},
  "scheme": "all",
  "seeds": [1, 2]
})";

TEST_F(CliTest, MissingNoiseLevelIsAConfigError) {
  const auto cfg = write("c.json", R"({"grid": {"q": 8}, "channel": {}})");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(invoke({"postcode", "--config", cfg, "--out", (dir_ / "o").string()}), kConfigError);
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("channel.sigma_c"), std::string::npos) << err;
}

TEST_F(CliTest, UnknownSubcommandOrMissingConfig) {
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(invoke({"bogus"}), kConfigError);
  EXPECT_EQ(invoke({"simulate"}), kConfigError);
  EXPECT_EQ(invoke({"simulate", "--config", (dir_ / "absent.json").string()}), kConfigError);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, IncreasingStepsizeIsAScheduleViolation) {
  std::string text = kSimulate;
  const std::string from = R"("kind": "constant")";
  text.replace(text.find(from), from.size(), R"("kind": "linear")");
  const auto cfg = write("c.json", text);
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "o").string()}),
            kScheduleViolation);
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("eta_k <= c0 / (ell^2 + L)"), std::string::npos) << err;
}

TEST_F(CliTest, InfeasiblePostcode) {
  const auto cfg = write("c.json", R"({"grid": {"q": 8}, "channel": {"sigma_over_delta": 10}})");
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(invoke({"postcode", "--config", cfg, "--out", (dir_ / "o").string()}), kInfeasible);
  ::testing::internal::GetCapturedStdout();
}

TEST_F(CliTest, ShippedConfigsExitAsDocumented) {
  const std::string d = AIRFED_CONFIG_DIR;
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(invoke({"postcode", "--config", d + "/postcode_q8.json", "--out", (dir_ / "a").string()}), kOk);
  EXPECT_EQ(invoke({"postcode", "--config", d + "/postcode_infeasible.json", "--out",
                    (dir_ / "b").string()}),
            kInfeasible);
  EXPECT_EQ(invoke({"pipeline", "--config", d + "/pipeline_misnormalized.json", "--out",
                    (dir_ / "c").string()}),
            kPropertyViolation);
  ::testing::internal::GetCapturedStdout();
  EXPECT_TRUE(fs::exists(dir_ / "a" / "postcode_H.csv"));
}

TEST_F(CliTest, SimulateIsByteReproducible) {
  const auto cfg = write("c.json", kSimulate);
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "a").string()}), kOk);
  EXPECT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "b").string(), "--jobs", "3"}), kOk);
  EXPECT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "c").string(), "--seed", "9"}), kOk);
  ::testing::internal::GetCapturedStdout();
  const auto a = read_dir(dir_ / "a");
  EXPECT_EQ(a, read_dir(dir_ / "b"));
  EXPECT_NE(a, read_dir(dir_ / "c"));
  EXPECT_TRUE(a.count("comparison.csv"));
  EXPECT_TRUE(a.count("metadata.json"));
}

}  // namespace
}  // namespace airfed::cli
