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

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "crimepred/parallel.hpp"
#include "crimepred/pipeline.hpp"

namespace fs = std::filesystem;
using namespace crimepred;

namespace {

constexpr int kStageFailure = 2;

int fail(const std::exception& e) {
  std::cerr << "crimepred: " << e.what() << "\n";
  return kStageFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Theft prediction toolkit for Chicago incident reports"};
  app.set_version_flag("--version", std::string(CRIMEPRED_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  std::size_t jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for internal parallel loops")->check(CLI::PositiveNumber);

  std::string data, out, config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> row_cap;
  bool strict = false;
  std::vector<std::string> runs;

  auto* analyze = app.add_subcommand("analyze", "Frequency ranking, correlation and VIF reports");
  analyze->add_option("--data", data, std::string("Input CSV (default: $") + kDataDirEnv + "/" + kDefaultDataFile + ")");
  analyze->add_option("--out", out, "Output directory")->required();
  analyze->add_flag("--strict", strict, "Fail on unparseable cells instead of treating them as missing");

  auto* train = app.add_subcommand("train", "Run the training pipeline for one config");
  train->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--data", data, "Override the config's data path");
  train->add_option("--seed", seed, "Override the config's seed");
  train->add_option("--out", out, "Override the config's output directory");
  train->add_option("--row-cap", row_cap, "Cap the number of sampled rows");

  auto* report = app.add_subcommand("report", "Merge run results into comparison tables");
  report->add_option("--out", out, "Output directory")->required();
  report->add_option("runs", runs, "Run directories or manifest files")->required();

  CLI11_PARSE(app, argc, argv);
  set_max_jobs(jobs);

  try {
    if (*analyze) {
      const fs::path path = resolve_data_path(data);
      for (const auto& [key, file] : run_analyze(path, out, strict)) std::cout << key << "\t" << (fs::path(out) / file).string() << "\n";
    } else if (*train) {
      nlohmann::json j;
      try {
        std::ifstream in(config_path);
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw StageError("config", std::string("invalid JSON: ") + e.what());
      }
      if (!data.empty()) j["data"] = data;
      if (seed) j["seed"] = *seed;
      if (!out.empty()) j["output"] = out;
      if (row_cap) j["row_cap"] = *row_cap;
      RunConfig config;
      try {
        config = RunConfig::from_json(j);
      } catch (const std::exception& e) {
        throw StageError("config", e.what());
      }
      const TrainResult result = run_train(config);
      for (const auto& w : result.manifest.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "manifest\t" << (result.directory / "manifest.json").string() << "\n";
      std::cout << "f1\t" << result.report.prf.f1 << "\n";
      if (result.report.auc) std::cout << "auc\t" << *result.report.auc << "\n";
    } else if (*report) {
      std::vector<fs::path> paths(runs.begin(), runs.end());
      for (const auto& [key, file] : run_report(paths, out)) std::cout << key << "\t" << (fs::path(out) / file).string() << "\n";
    }
  } catch (const std::exception& e) {
    return fail(e);
  }
  return 0;
}
