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

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

#include "checks.hpp"
#include "crimepred/models.hpp"
#include "crimepred/parallel.hpp"

namespace crimepred {

KnnModel knn_fit(const Matrix& x, std::span<const int> y, const KnnParams& params) {
  detail::check_training_data(x, y, "knn_fit");
  if (params.metric != "manhattan") throw ArgumentError("knn: unsupported metric " + params.metric);
  if (params.k == 0) throw ArgumentError("knn: k must be positive");
  if (params.k > x.rows()) {
    throw ArgumentError("knn: k = " + std::to_string(params.k) + " exceeds training size " +
                        std::to_string(x.rows()));
  }
  return KnnModel{params, x, std::vector<int>(y.begin(), y.end())};
}

std::vector<std::size_t> knn_neighbors(const KnnModel& model, std::span<const double> query) {
  const std::size_t k = model.params.k;
  const std::size_t d = model.x.cols();
  // Max-heap on (distance, index): the top is the worst neighbour kept so far.
  std::priority_queue<std::pair<double, std::size_t>> heap;
  for (std::size_t i = 0; i < model.x.rows(); ++i) {
    const double* row = model.x.data().data() + i * d;
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) dist += std::abs(row[j] - query[j]);
    if (heap.size() < k) {
      heap.emplace(dist, i);
    } else if (std::make_pair(dist, i) < heap.top()) {
      heap.pop();
      heap.emplace(dist, i);
    }
  }
  std::vector<std::size_t> out(heap.size());
  for (std::size_t p = out.size(); p > 0; --p) {
    out[p - 1] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::vector<double> knn_predict_proba(const KnnModel& model, const Matrix& x) {
  detail::check_width(x, model.x.cols(), "knn");
  std::vector<double> scores(x.rows());
  parallel_for(x.rows(), [&](std::size_t r) {
    const auto nb = knn_neighbors(model, x.row(r));
    std::size_t positive = 0;
    for (std::size_t i : nb) positive += model.y[i] == 1;
    scores[r] = static_cast<double>(positive) / static_cast<double>(nb.size());
  });
  return scores;
}

}  // namespace crimepred
