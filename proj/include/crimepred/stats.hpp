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

#include "crimepred/matrix.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

// Sample Pearson correlation. Throws UndefinedError for a constant input and
// ArgumentError for mismatched or too-short inputs.
double pearson(std::span<const double> x, std::span<const double> y);

// Ranks starting at 1; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of the average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson chi-square test of independence on an r x c table of counts.
ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& counts);

// Contingency table of two label columns (rows/cols in lexicographic order).
std::vector<std::vector<double>> contingency_table(std::span<const std::string> a,
                                                   std::span<const std::string> b);

struct CorrelationPair {
  std::string feature_a;
  std::string feature_b;
  std::string method;  // pearson | spearman | chi_square
  double statistic = 0.0;
  std::optional<double> p_value;
  std::optional<int> dof;
};

struct CorrelationReport {
  std::vector<CorrelationPair> pairs;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct VifEntry {
  std::string feature;
  double r_squared = 0.0;
  double value = 1.0;     // 1 / (1 - R^2); +inf when infinite
  bool infinite = false;  // exact collinearity
};

struct VifReport {
  std::vector<VifEntry> entries;

  double mean_finite() const;
  nlohmann::json to_json() const;
};

// Each column regressed by least squares on all others plus an intercept.
VifReport vif(const Matrix& x, const std::vector<std::string>& names);

struct FrequencyEntry {
  std::string category;
  std::size_t count = 0;
  bool operator==(const FrequencyEntry&) const = default;
};

// Descending by count, ties in lexicographic order. Missing values are skipped.
std::vector<FrequencyEntry> rank_frequencies(std::span<const std::optional<std::string>> column);

// Multiple correspondence analysis of Q categorical variables through the
// SVD of the standardized residuals of the indicator matrix. Raw inertias are
// reported (no Benzecri correction).
class McaModel {
 public:
  // `columns[q][i]` is the category of row i for variable q.
  static McaModel fit(const std::vector<std::vector<std::string>>& columns,
                      std::size_t n_components);

  // Principal row coordinates of new rows given in the same layout as fit().
  // Unseen categories contribute zero and are counted in `unseen`.
  Matrix transform(const std::vector<std::vector<std::string>>& columns,
                   std::size_t* unseen = nullptr) const;

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }  // all non-trivial
  double total_inertia() const;
  std::size_t rank() const { return rank_; }
  std::size_t n_components() const { return n_components_; }
  std::size_t variables() const { return categories_.size(); }
  std::size_t total_categories() const;
  const std::vector<std::vector<std::string>>& categories() const { return categories_; }
  // Category principal coordinates, J x n_components.
  const Matrix& category_coordinates() const { return category_coords_; }
  // Row principal coordinates of the fitted rows.
  const Matrix& row_coordinates() const { return row_coords_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  nlohmann::json to_json() const;

 private:
  std::vector<std::vector<std::string>> categories_;  // per variable, sorted
  std::vector<double> masses_;                         // column masses c_j
  std::vector<double> eigenvalues_;
  Matrix standard_coords_;  // J x n_components, D_c^{-1/2} V
  Matrix category_coords_;
  Matrix row_coords_;
  std::size_t rank_ = 0;
  std::size_t n_components_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace crimepred
