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

#include "crimepred/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "crimepred/error.hpp"
#include "crimepred/rng.hpp"

namespace crimepred {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

}  // namespace

void ResamplePlan::validate() const {
  if (smote_k < 1) throw ArgumentError("smote_k must be at least 1");
  if (!(oversample_ratio > 0.0 && oversample_ratio <= 1.0)) {
    throw ArgumentError("oversample_ratio must lie in (0, 1]");
  }
  if (!(undersample_ratio > 0.0 && undersample_ratio <= 1.0)) {
    throw ArgumentError("undersample_ratio must lie in (0, 1]");
  }
}

nlohmann::json ResamplePlan::to_json() const {
  return {{"smote_k", smote_k},
          {"oversample_ratio", oversample_ratio},
          {"undersample_ratio", undersample_ratio},
          {"seed", seed}};
}

ClassCounts count_classes(std::span<const int> y) {
  ClassCounts c;
  for (int v : y) {
    if (v == 1) {
      ++c.positive;
    } else if (v == 0) {
      ++c.negative;
    } else {
      throw ArgumentError("labels must be 0 or 1");
    }
  }
  return c;
}

nlohmann::json to_json(const ClassCounts& counts) {
  return {{"negative", counts.negative}, {"positive", counts.positive}};
}

ResampleResult smote(const Matrix& x, std::span<const int> y, const ResamplePlan& plan) {
  plan.validate();
  if (x.rows() != y.size()) throw ArgumentError("smote: row/label count mismatch");
  ResampleResult res;
  res.before = count_classes(y);
  const int minority_label = res.before.positive <= res.before.negative ? 1 : 0;
  const std::size_t n_min = minority_label == 1 ? res.before.positive : res.before.negative;
  const std::size_t n_maj = minority_label == 1 ? res.before.negative : res.before.positive;
  if (n_min < 2) throw ArgumentError("smote: minority class needs at least 2 rows");

  const auto target = static_cast<std::size_t>(std::floor(plan.oversample_ratio * static_cast<double>(n_maj)));
  const std::size_t n_new = target > n_min ? target - n_min : 0;

  std::size_t k = plan.smote_k;
  if (n_min <= k) {
    k = n_min - 1;
    res.warnings.push_back("smote_k clamped from " + std::to_string(plan.smote_k) + " to " +
                           std::to_string(k) + " (minority size " + std::to_string(n_min) + ")");
  }

  std::vector<std::size_t> minority;
  minority.reserve(n_min);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == minority_label) minority.push_back(i);
  }

  res.x = x;
  res.y.assign(y.begin(), y.end());
  res.x.reserve_rows(x.rows() + n_new);
  res.y.reserve(y.size() + n_new);

  // k nearest minority neighbours, computed on first use.
  std::vector<std::optional<std::vector<std::size_t>>> neighbours(n_min);
  auto neighbours_of = [&](std::size_t m) -> const std::vector<std::size_t>& {
    if (!neighbours[m]) {
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(n_min - 1);
      const auto base = x.row(minority[m]);
      for (std::size_t t = 0; t < n_min; ++t) {
        if (t != m) dist.emplace_back(squared_distance(base, x.row(minority[t])), t);
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
      std::vector<std::size_t> nn(k);
      for (std::size_t t = 0; t < k; ++t) nn[t] = dist[t].second;
      neighbours[m] = std::move(nn);
    }
    return *neighbours[m];
  };

  Rng rng(derive_seed(plan.seed, 1));
  std::vector<double> row(x.cols());
  for (std::size_t s = 0; s < n_new; ++s) {
    const std::size_t m = rng.uniform_index(n_min);
    const std::size_t nb = neighbours_of(m)[rng.uniform_index(k)];
    const double gap = rng.uniform01();
    const auto a = x.row(minority[m]);
    const auto b = x.row(minority[nb]);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = a[j] + gap * (b[j] - a[j]);
    res.x.append_row(row);
    res.y.push_back(minority_label);
    res.synthetic.push_back({minority[m], minority[nb], gap});
  }
  res.after = count_classes(res.y);
  return res;
}

ResampleResult random_undersample(const Matrix& x, std::span<const int> y, const ResamplePlan& plan) {
  plan.validate();
  if (x.rows() != y.size()) throw ArgumentError("undersample: row/label count mismatch");
  ResampleResult res;
  res.before = count_classes(y);
  if (res.before.positive == 0 || res.before.negative == 0) {
    throw ArgumentError("undersample: both classes must be present");
  }
  const int majority_label = res.before.negative >= res.before.positive ? 0 : 1;
  const std::size_t n_min = majority_label == 0 ? res.before.positive : res.before.negative;
  const std::size_t n_maj = majority_label == 0 ? res.before.negative : res.before.positive;
  const auto keep = static_cast<std::size_t>(std::floor(static_cast<double>(n_min) / plan.undersample_ratio));
  if (keep > n_maj) {
    throw ArgumentError("undersample: ratio needs " + std::to_string(keep) + " majority rows but only " +
                        std::to_string(n_maj) + " exist");
  }

  std::vector<std::size_t> majority;
  majority.reserve(n_maj);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == majority_label) majority.push_back(i);
  }
  Rng rng(derive_seed(plan.seed, 2));
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.uniform_index(majority.size() - i);
    std::swap(majority[i], majority[j]);
  }
  std::vector<char> retained(y.size(), 0);
  for (std::size_t i = 0; i < keep; ++i) retained[majority[i]] = 1;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != majority_label) retained[i] = 1;
  }

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (retained[i]) rows.push_back(i);
  }
  res.x = x.select_rows(rows);
  res.y.reserve(rows.size());
  for (std::size_t i : rows) res.y.push_back(y[i]);
  res.after = count_classes(res.y);
  return res;
}

ResampleResult balance(const LabeledData& data, const ResamplePlan& plan) {
  if (data.role != SplitRole::kTrain) {
    throw ArgumentError("resampling is only allowed on training data");
  }
  ResampleResult over = smote(data.x, data.y, plan);
  ResampleResult under = random_undersample(over.x, over.y, plan);
  under.before = over.before;
  // Minority rows survive undersampling, so the SMOTE parents still apply.
  under.synthetic = std::move(over.synthetic);
  under.warnings.insert(under.warnings.begin(), over.warnings.begin(), over.warnings.end());
  return under;
}

}  // namespace crimepred
