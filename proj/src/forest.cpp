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
#include "crimepred/parallel.hpp"

namespace crimepred {

ForestModel forest_fit(const Matrix& x, std::span<const int> y, const ForestParams& params,
                       std::uint64_t seed) {
  detail::check_training_data(x, y, "forest_fit");
  if (params.n_trees == 0) throw ArgumentError("forest: n_trees must be positive");
  if (params.criterion != "gini") throw ArgumentError("forest: unsupported criterion " + params.criterion);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.criterion = SplitCriterion::kGini;
  tp.max_features = params.max_features > 0
                        ? std::min(params.max_features, d)
                        : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));

  const SortedColumns sorted(x);
  std::vector<double> labels(y.begin(), y.end());

  ForestModel model;
  model.params = params;
  model.trees.resize(params.n_trees);
  model.tree_seeds.resize(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) model.tree_seeds[t] = derive_seed(seed, t);

  parallel_for(params.n_trees, [&](std::size_t t) {
    Rng rng(model.tree_seeds[t]);
    std::vector<double> weights(n, 1.0);
    if (params.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t draw = 0; draw < n; ++draw) weights[rng.uniform_index(n)] += 1.0;
    }
    model.trees[t] = fit_tree(x, sorted, weights, labels, {}, tp, &rng);
  });
  return model;
}

std::vector<double> forest_predict_proba(const ForestModel& model, const Matrix& x) {
  std::vector<double> out(x.rows());
  parallel_for(x.rows(), [&](std::size_t r) {
    const auto row = x.row(r);
    std::size_t votes = 0;
    for (const auto& tree : model.trees) votes += tree.predict(row) >= 0.5;
    out[r] = static_cast<double>(votes) / static_cast<double>(model.trees.size());
  });
  return out;
}

}  // namespace crimepred
