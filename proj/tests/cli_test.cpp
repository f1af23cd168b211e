// Copyright 2026 The fibstring Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fibstring_cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"

#include "fibstring/parallel.hpp"

namespace fs = std::filesystem;
using fibstring::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fibstring");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fibstring_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& sub = "") const { return (dir_ / sub).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, usage_errors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"ground", "--preset", "four", "--out", out()}).code, 2);
  EXPECT_EQ(invoke({"ground", "--preset", "single_plaquette", "--shots", "100", "--out", out()}).code, 2);
  EXPECT_EQ(invoke({"braid", "--word", "s3", "--out", out()}).code, 2);
  EXPECT_EQ(invoke({"mitigate", "--out", out()}).code, 2);
  EXPECT_EQ(invoke({"tee", "--mode", "rm", "--out", out()}).code, 2);
  EXPECT_FALSE(fs::exists(dir_));
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, verify_passes) {
  const auto r = invoke({"verify", "--out", out()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "verify.json"));
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_TRUE(j["checks"].contains("pentagon"));
  EXPECT_TRUE(j["checks"].contains("yang_baxter"));
}

TEST_F(CliTest, verify_names_corrupted_checks) {
  const auto r = invoke({"verify", "--corrupt-f", "63:0.001", "--out", out()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("pentagon"), std::string::npos);
}

TEST_F(CliTest, ground_rows) {
  const auto r = invoke({"ground", "--preset", "two_plaquette", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "ground.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 10 + 2);
  for (const auto& row : nlohmann::json::parse(slurp(dir_ / "ground.json"))["rows"])
    EXPECT_NEAR(row["exact"].get<double>(), 1, 1e-10);
  for (const auto& e : fs::directory_iterator(dir_)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST_F(CliTest, config_file_needs_schema) {
  fs::create_directories(dir_);
  {
    std::ofstream f(dir_ / "good.ini");
    f << "schema_version = 1\npreset = \"single_plaquette\"\n";
    std::ofstream g(dir_ / "bad.ini");
    g << "preset = \"single_plaquette\"\n";
  }
  EXPECT_EQ(invoke({"ground", "--config", out("good.ini"), "--out", out("a")}).code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "a" / "ground.json"))["preset"], "single_plaquette");
  EXPECT_EQ(invoke({"ground", "--config", out("bad.ini"), "--out", out("b")}).code, 2);
}

TEST_F(CliTest, mitigate_is_deterministic_across_workers) {
  fs::create_directories(dir_);
  {
    std::ofstream f(dir_ / "noise.json");
    f << R"({"schema_version": 1, "default": [0.97, 0.93]})";
  }
  const std::vector<std::string> base = {"mitigate", "--noise", out("noise.json"), "--seed", "5", "--repetitions", "50", "--max-size", "3"};
  fibstring::set_worker_count(1);
  auto a = base;
  a.insert(a.end(), {"--out", out("w1")});
  ASSERT_EQ(invoke(a).code, 0);
  fibstring::set_worker_count(3);
  auto b = base;
  b.insert(b.end(), {"--out", out("w3")});
  ASSERT_EQ(invoke(b).code, 0);
  fibstring::set_worker_count(0);
  EXPECT_EQ(slurp(dir_ / "w1" / "mitigate.csv"), slurp(dir_ / "w3" / "mitigate.csv"));
  EXPECT_EQ(slurp(dir_ / "w1" / "mitigate.csv").substr(0, 33), "size,naive,corrected,truth,shots\n");
}

TEST_F(CliTest, tee_exact_outputs) {
  const auto r = invoke({"tee", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "tee.json"));
  EXPECT_EQ(j["schemes"].size(), 9u);
  EXPECT_EQ(j["extra"]["stopo_von_neumann"].size(), 9u);
  EXPECT_TRUE(fs::exists(dir_ / "tee_regions.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "tee_schemes.csv"));
}
