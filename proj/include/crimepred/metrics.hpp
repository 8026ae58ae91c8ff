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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crimepred/models.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the matching ratio was 0/0 and defined as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the (0, 0) origin
};

struct RocResult {
  std::vector<RocPoint> curve;
  double auc = 0.0;
};

// Thresholds at the distinct scores, descending; trapezoidal area.
RocResult roc_auc(std::span<const int> y_true, std::span<const double> scores);
// Probability that a random positive outranks a random negative, ties 1/2.
double mann_whitney_auc(std::span<const int> y_true, std::span<const double> scores);

struct EvalMetadata {
  ModelKind kind = ModelKind::kGbm;
  std::vector<std::string> features;
  std::vector<std::string> techniques;
  std::size_t sample_size = 0;
};

struct EvalReport {
  EvalMetadata metadata;
  std::size_t rows = 0;
  ConfusionMatrix confusion;
  PrecisionRecallF1 prf;
  double accuracy = 0.0;
  std::optional<double> auc;
  std::optional<std::string> auc_error;
  std::vector<RocPoint> roc;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

EvalReport evaluate(std::span<const int> y_true, std::span<const double> scores, const EvalMetadata& metadata);
EvalReport evaluate(const Model& model, const Matrix& x_test, std::span<const int> y_test,
                    const EvalMetadata& metadata);

std::string roc_csv(const std::vector<RocPoint>& curve);
// Columns Algorithm, Features, Techniques, SampleSize, F1, AUC.
std::string table1_csv(const std::vector<EvalReport>& reports);

}  // namespace crimepred
