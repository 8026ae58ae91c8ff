/*
 * Copyright 2026 The crimepred Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using crimepred::testing::TempDir;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  Result r;
  const std::string cmd = std::string("\"") + CRIMEPRED_CLI_PATH + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

TEST(Cli, AnalyzeTrainReport) {
  TempDir tmp("cli");
  const auto data = tmp / "data.csv";
  crimepred::testing::write_file(data, crimepred::testing::synthetic_text(3000, 3));

  Result r = run("analyze --data " + q(data) + " --out " + q(tmp / "analysis"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("frequencies\t"), std::string::npos);

  std::ifstream in(fs::path(CRIMEPRED_CONFIG_DIR) / "logreg.json");
  nlohmann::json cfg = nlohmann::json::parse(in);
  cfg["explain"]["instances"] = 5;
  cfg["explain"]["background"] = 5;
  const auto cfg_path = tmp / "logreg.json";
  crimepred::testing::write_file(cfg_path, cfg.dump());
  r = run("--jobs 2 train --config " + q(cfg_path) + " --data " + q(data) + " --out " + q(tmp / "run") +
          " --row-cap 2000");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("manifest\t"), std::string::npos);
  EXPECT_NE(r.out.find("f1\t"), std::string::npos);
  EXPECT_TRUE(fs::exists(tmp / "run" / "eval.json"));

  r = run("report --out " + q(tmp / "report") + " " + q(tmp / "run"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(tmp / "report" / "table1.csv"));
}

TEST(Cli, FailuresExitWithTwo) {
  TempDir tmp("cli_fail");
  const auto empty = tmp / "empty.csv";
  crimepred::testing::write_file(empty, crimepred::testing::kHeader);
  EXPECT_EQ(run("analyze --data " + q(empty) + " --out " + q(tmp / "out")).code, 2);
  EXPECT_FALSE(fs::exists(tmp / "out"));

  const auto data = tmp / "data.csv";
  crimepred::testing::write_file(data, crimepred::testing::synthetic_text(100, 4));
  const auto cfg = fs::path(CRIMEPRED_CONFIG_DIR) / "forest.json";
  EXPECT_EQ(run("train --config " + q(cfg) + " --data " + q(data) + " --out " + q(tmp / "run")).code, 2);
  EXPECT_FALSE(fs::exists(tmp / "run"));

  const auto bad = tmp / "bad.json";
  crimepred::testing::write_file(bad, "{\"model\": {\"kind\": \"knn\"}, \"features\": [\"Hour\"], \"colour\": 1}");
  EXPECT_EQ(run("train --config " + q(bad) + " --data " + q(data)).code, 2);
  crimepred::testing::write_file(bad, "{ not json");
  EXPECT_EQ(run("train --config " + q(bad)).code, 2);
  EXPECT_NE(run("frobnicate").code, 0);
}

}  // namespace
