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
#include <span>
#include <string>
#include <vector>

#include "crimepred/matrix.hpp"
#include "crimepred/models.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

// Batch model output: one value per row of the input.
using PredictFn = std::function<std::vector<double>(const Matrix&)>;

enum class OutputSpace { kProbability, kMargin };
OutputSpace output_space_from_string(std::string_view s);
std::string_view to_string(OutputSpace space);

PredictFn make_predict_fn(const Model& model, OutputSpace space = OutputSpace::kProbability);

struct ShapValues {
  double base_value = 0.0;  // mean output over the background
  double prediction = 0.0;  // f(x)
  std::vector<double> phi;
};

// Value of coalition `mask` (bit j set = feature j taken from x): mean output
// with the other features replaced by each background row in turn.
std::vector<double> coalition_values(const PredictFn& f, std::span<const double> x, const Matrix& background,
                                     std::span<const std::uint64_t> masks);

inline constexpr std::size_t kExactShapMaxFeatures = 15;

// Shapley values by enumerating every coalition.
ShapValues exact_shap(const PredictFn& f, std::span<const double> x, const Matrix& background);

struct KernelShapOptions {
  // Coalitions sampled when enumeration is too large; 0 picks 2d + 2048.
  std::size_t n_coalitions = 0;
  // Every coalition is used when 2^d - 2 <= n_coalitions or d <= this.
  std::size_t full_enumeration_max_d = 12;
  std::uint64_t seed = 0;
};

// Kernel-weighted least squares with the efficiency constraint.
ShapValues kernel_shap(const PredictFn& f, std::span<const double> x, const Matrix& background,
                       const KernelShapOptions& options = {});

// Seeded subset of rows kept in source order; all rows when n >= rows.
Matrix sample_rows(const Matrix& x, std::size_t n, std::uint64_t seed);

enum class ShapMethod { kKernel, kExact };

std::vector<ShapValues> explain_rows(const PredictFn& f, const Matrix& rows, const Matrix& background,
                                     ShapMethod method, const KernelShapOptions& options = {});

struct ShapSummary {
  std::vector<std::string> features;
  std::vector<double> mean_abs;       // per feature, input order
  std::vector<std::size_t> ranking;   // feature indices, descending mean_abs, ties by name
  std::size_t instances = 0;

  const std::string& top_feature() const { return features[ranking.front()]; }
  double top_value() const { return mean_abs[ranking.front()]; }
  nlohmann::json to_json() const;
  static ShapSummary from_json(const nlohmann::json& j);
};

ShapSummary shap_summary(const std::vector<ShapValues>& values, const std::vector<std::string>& features);

// One row per explained instance: base_value, prediction, then one column per feature.
std::string phi_csv(const std::vector<ShapValues>& values, const std::vector<std::string>& features);

struct Table2Row {
  ModelKind kind = ModelKind::kGbm;
  ShapSummary summary;
};

// Columns Algorithm, MostContributingFeature, AverageShapleyValue.
std::string table2_csv(const std::vector<Table2Row>& rows);

}  // namespace crimepred
