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
#include <span>
#include <string>
#include <vector>

#include "crimepred/matrix.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

enum class SplitRole { kTrain, kTest };

// A design matrix with its labels and the split it came from. Resampling
// refuses anything not tagged as training data.
struct LabeledData {
  Matrix x;
  std::vector<int> y;
  SplitRole role = SplitRole::kTrain;
};

struct ResamplePlan {
  std::size_t smote_k = 3;
  // Minority/majority ratio reached by SMOTE.
  double oversample_ratio = 0.5;
  // Minority/majority ratio reached by dropping majority rows afterwards.
  double undersample_ratio = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct ClassCounts {
  std::size_t negative = 0;
  std::size_t positive = 0;
  bool operator==(const ClassCounts&) const = default;
};

ClassCounts count_classes(std::span<const int> y);

// Parents of one synthetic row: base + gap * (neighbor - base).
struct SyntheticOrigin {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double gap = 0.0;
};

struct ResampleResult {
  Matrix x;
  std::vector<int> y;
  ClassCounts before;
  ClassCounts after;
  std::vector<SyntheticOrigin> synthetic;  // one per appended row (SMOTE only)
  std::vector<std::string> warnings;
};

// Appends synthetic minority rows until minority = floor(oversample_ratio *
// majority). Original rows come first and are unchanged.
ResampleResult smote(const Matrix& x, std::span<const int> y, const ResamplePlan& plan);

// Keeps floor(minority / undersample_ratio) majority rows chosen uniformly
// without replacement; minority rows are untouched. Source order is kept.
ResampleResult random_undersample(const Matrix& x, std::span<const int> y, const ResamplePlan& plan);

// smote followed by random_undersample, on training data only.
ResampleResult balance(const LabeledData& data, const ResamplePlan& plan);

nlohmann::json to_json(const ClassCounts& counts);

}  // namespace crimepred
