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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crimepred/matrix.hpp"
#include "crimepred/models.hpp"
#include "crimepred/resample.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

// Stratified fold id per row. Each class is shuffled and dealt round-robin,
// continuing the deal across classes, so fold sizes differ by at most one.
std::vector<std::size_t> cv_split(std::span<const int> y, std::size_t folds, std::uint64_t seed);

// Per-fold scores for one parameter assignment. Throwing marks the trial failed.
using FoldObjective = std::function<std::vector<double>(const nlohmann::json& params)>;

struct ParamGrid {
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;

  void validate() const;
  std::size_t size() const;
  // Cartesian product, last axis varying fastest.
  std::vector<nlohmann::json> candidates() const;
  static ParamGrid from_json(const nlohmann::json& j);
};

struct ParamDimension {
  enum class Type { kReal, kInteger, kChoice };
  std::string name;
  Type type = Type::kReal;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<nlohmann::json> choices;

  // Maps u in [0, 1] to a parameter value.
  nlohmann::json decode(double u) const;
};

struct ParamSpace {
  std::vector<ParamDimension> dims;

  void validate() const;
  nlohmann::json decode(std::span<const double> u) const;
  // {"C": [0.1, 10]} real, {"k": {"int": [5, 30]}} integer, {"kernel": ["rbf"]} choice.
  static ParamSpace from_json(const nlohmann::json& j);
};

struct Trial {
  std::size_t index = 0;
  nlohmann::json params;
  std::vector<double> fold_scores;
  double mean = 0.0;  // -inf when failed
  bool failed = false;
  std::string error;
  std::size_t rank = 0;  // 1 = best
  std::vector<double> point;  // normalised coordinates (Bayesian search only)
};

struct SearchResult {
  std::string method;
  std::vector<Trial> trials;
  std::size_t best_trial = 0;

  const Trial& best() const { return trials[best_trial]; }
  nlohmann::json to_json() const;
  // One row per trial and fold.
  std::string ledger_csv() const;
};

SearchResult grid_search(const ParamGrid& grid, const FoldObjective& objective);

struct BayesOptions {
  std::size_t n_iter = 25;
  std::size_t n_initial = 5;
  std::size_t n_candidates = 2048;
  double length_scale = 0.2;
  double noise = 1e-6;
  std::uint64_t seed = 0;
};

SearchResult bayes_opt(const ParamSpace& space, const FoldObjective& objective, const BayesOptions& options);

// i-th point of the Halton sequence in the given prime base.
double halton(std::size_t index, std::size_t base);

// Cross-validated F1 for `base` with `params` applied. Resampling, when
// given, is fitted on each training fold only.
struct CvSetup {
  const Matrix* x = nullptr;
  std::span<const int> y;
  std::vector<std::size_t> fold_of;
  std::size_t folds = 5;
  ClassifierConfig base;
  std::optional<ResamplePlan> resample;
};

std::vector<double> cross_validate(const CvSetup& setup, const nlohmann::json& params);
FoldObjective cv_objective(const CvSetup& setup);

}  // namespace crimepred
