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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crimepred/error.hpp"
#include "crimepred/explain.hpp"
#include "crimepred/metrics.hpp"
#include "crimepred/models.hpp"
#include "crimepred/preprocess.hpp"
#include "crimepred/resample.hpp"
#include "crimepred/tune.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

inline constexpr int kRunConfigSchemaVersion = 1;
// Environment variable naming the directory that holds the default data file.
inline constexpr const char* kDataDirEnv = "CRIMEPRED_DATA_DIR";
inline constexpr const char* kDefaultDataFile = "chicago_crimes.csv";

// A pipeline failure attributed to one stage (load, split, sample, ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct TuningConfig {
  std::string method = "none";  // none | grid | bayes
  std::size_t folds = 5;
  ParamGrid grid;
  ParamSpace space;
  std::size_t n_iter = 25;
  std::size_t max_rows = 0;  // tuning subsample of the training rows; 0 = all
};

struct ExplainConfig {
  bool enabled = true;
  ShapMethod method = ShapMethod::kKernel;
  std::size_t instances = 500;
  std::size_t background = 100;
  std::size_t n_coalitions = 0;
  OutputSpace output = OutputSpace::kProbability;
};

struct ImputeConfig {
  std::size_t k = 5;
  std::size_t max_donors = 20000;
};

struct RunConfig {
  std::string name;
  std::string data;
  std::uint64_t seed = 0;
  double split_ratio = 0.8;
  std::size_t sample_size = 0;  // 0 = every row
  std::size_t row_cap = 0;      // caps sample_size when > 0
  bool strict = false;
  ClassifierConfig model;
  std::vector<FeatureSpec> features;
  ScaleMode scale = ScaleMode::kNumeric;
  ImputeConfig impute;
  std::optional<ResamplePlan> resample;
  TuningConfig tuning;
  ExplainConfig explain;
  std::string output;

  std::size_t effective_sample_size(std::size_t available) const;
  // Table-style technique labels: search method and resampling.
  std::vector<std::string> techniques() const;
  std::vector<std::string> feature_names() const;

  // Validates against the schema; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  // Normalised form with every default filled in.
  nlohmann::json to_json() const;
  // SHA-256 over the normalised form, excluding name and output.
  std::string hash() const;
};

std::string sha256_hex(std::string_view data);

// Data path from the config, else the environment default directory.
std::filesystem::path resolve_data_path(const std::string& configured);

struct RunManifest {
  std::string config_hash;
  std::string library_version;
  std::map<std::string, std::string> artifacts;  // key -> path relative to the run directory
  std::vector<std::pair<std::string, double>> timings;  // stage, seconds
  std::vector<std::string> warnings;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

struct TrainResult {
  RunManifest manifest;
  std::filesystem::path directory;
  EvalReport report;
  std::optional<ShapSummary> shap;
};

// shuffle, split, sample, preprocess, balance, tune, fit, evaluate, explain.
// Artifacts are staged and moved into config.output only on success.
TrainResult run_train(const RunConfig& config);

// Frequency ranking, correlation and VIF reports for one data file.
std::map<std::string, std::string> run_analyze(const std::filesystem::path& data,
                                               const std::filesystem::path& out, bool strict = false);

// Merges run directories (or their manifest files) into table1.csv and table2.csv.
std::map<std::string, std::string> run_report(const std::vector<std::filesystem::path>& runs,
                                              const std::filesystem::path& out);

}  // namespace crimepred
