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
#include <vector>

#include "crimepred/matrix.hpp"
#include "crimepred/rng.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

// Internal nodes send x[feature] <= threshold to `left`. Leaves have
// feature == -1 and carry `value`: the majority class for classification
// trees, the leaf weight -G/(H + lambda) for boosting trees.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double gain = 0.0;    // impurity decrease / loss reduction of the split (before gamma)
  double weight = 0.0;  // sample weight (classification) or hessian sum (boosting)

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const;
  // Depth of the deepest leaf; a single-leaf tree has depth 0.
  std::size_t depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

enum class SplitCriterion { kGini, kNewton };

struct TreeParams {
  std::size_t max_depth = 9;
  SplitCriterion criterion = SplitCriterion::kGini;
  // Random feature subset size per split; 0 means all features.
  std::size_t max_features = 0;
  std::size_t min_samples_split = 2;
  // Newton criterion only.
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 0.0;
};

double gini_impurity(double positive_weight, double total_weight);

// Row indices of X sorted by each feature, computed once and shared by every
// tree grown on the same matrix.
class SortedColumns {
 public:
  explicit SortedColumns(const Matrix& x);
  const std::vector<std::uint32_t>& order(std::size_t feature) const { return order_[feature]; }
  std::size_t features() const { return order_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

// Greedy exact split search. `weights` holds per-row multiplicities (0 drops a
// row). In kGini mode `first` holds labels in {0, 1}; in kNewton mode `first`
// holds gradients and `second` hessians. `rng` is needed when max_features
// selects a strict subset.
DecisionTree fit_tree(const Matrix& x, const SortedColumns& sorted, std::span<const double> weights,
                      std::span<const double> first, std::span<const double> second,
                      const TreeParams& params, Rng* rng = nullptr);

// Convenience overload: every row weight 1, presorting done internally.
DecisionTree fit_tree(const Matrix& x, std::span<const double> first, std::span<const double> second,
                      const TreeParams& params, Rng* rng = nullptr);

}  // namespace crimepred
