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

#include <cmath>

#include "checks.hpp"
#include "crimepred/models.hpp"

namespace crimepred {

GbmModel gbm_fit(const Matrix& x, std::span<const int> y, const GbmParams& params) {
  detail::check_training_data(x, y, "gbm_fit");
  if (!(params.base_score > 0.0 && params.base_score < 1.0)) {
    throw ArgumentError("gbm: base_score must lie in (0, 1)");
  }
  if (!(params.learning_rate > 0.0)) throw ArgumentError("gbm: learning_rate must be positive");
  if (params.objective != "binary:logistic") throw ArgumentError("gbm: unsupported objective " + params.objective);
  const std::size_t n = x.rows();

  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.criterion = SplitCriterion::kNewton;
  tp.lambda = params.lambda;
  tp.gamma = params.gamma;
  tp.min_child_weight = params.min_child_weight;

  const SortedColumns sorted(x);
  const std::vector<double> weights(n, 1.0);
  const double base_margin = std::log(params.base_score / (1.0 - params.base_score));
  std::vector<double> margin(n, base_margin);
  std::vector<double> g(n), h(n);

  GbmModel model;
  model.params = params;
  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      g[i] = p - y[i];
      h[i] = p * (1.0 - p);
    }
    DecisionTree tree = fit_tree(x, sorted, weights, g, h, tp);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += params.learning_rate * tree.predict(x.row(i));
      wrong += (margin[i] >= 0.0 ? 1 : 0) != y[i];
    }
    model.trees.push_back(std::move(tree));
    model.train_error.push_back(static_cast<double>(wrong) / static_cast<double>(n));
  }
  return model;
}

std::vector<double> gbm_margin(const GbmModel& model, const Matrix& x) {
  const double base = std::log(model.params.base_score / (1.0 - model.params.base_score));
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    out[r] = base + model.params.learning_rate * sum;
  }
  return out;
}

}  // namespace crimepred
