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

#include <gtest/gtest.h>

#include <random>

#include "crimepred/error.hpp"
#include "crimepred/resample.hpp"
#include "oracles.hpp"

namespace crimepred {
namespace {

LabeledData imbalanced(std::size_t n_neg, std::size_t n_pos, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  LabeledData d;
  d.x = Matrix(n_neg + n_pos, 3);
  // Evenly spaced positives; n_neg + n_pos is a multiple of n_pos in every caller.
  const std::size_t step = (n_neg + n_pos) / n_pos;
  for (std::size_t i = 0; i < n_neg + n_pos; ++i) {
    const bool pos = i % step == 0;
    d.y.push_back(pos ? 1 : 0);
    for (std::size_t j = 0; j < 3; ++j) d.x(i, j) = nd(gen) + (pos ? 2.0 : 0.0);
  }
  return d;
}

Matrix minority_rows(const Matrix& x, const std::vector<int>& y, std::size_t n) {
  Matrix m;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1) m.append_row(x.row(i));
  }
  return m;
}

TEST(Smote, SegmentOfTwoPoints) {
  const Matrix x = {{0, 0}, {1, 1}, {5, 5}, {6, 5}, {5, 6}, {7, 7}};
  const std::vector<int> y = {1, 1, 0, 0, 0, 0};
  ResamplePlan plan;
  plan.smote_k = 1;
  plan.oversample_ratio = 0.75;
  const auto r = smote(x, y, plan);
  ASSERT_EQ(r.x.rows(), 7u);
  EXPECT_EQ(r.x(6, 0), r.x(6, 1));
  EXPECT_GE(r.x(6, 0), 0.0);
  EXPECT_LE(r.x(6, 0), 1.0);
}

TEST(Smote, GeometryCountsAndDeterminism) {
  const LabeledData d = imbalanced(400, 40, 2);
  ResamplePlan plan;
  plan.seed = 17;
  plan.oversample_ratio = 1.0;
  const auto r = smote(d.x, d.y, plan);
  EXPECT_EQ(r.after.positive, r.after.negative);
  const Matrix originals = minority_rows(d.x, d.y, d.y.size());
  for (std::size_t i = d.y.size(); i < r.x.rows(); ++i) {
    EXPECT_LT(oracle::distance_to_nearest_segment(r.x.row(i), originals), 1e-9);
    const auto& o = r.synthetic[i - d.y.size()];
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(r.x(i, j), d.x(o.base, j) + o.gap * (d.x(o.neighbor, j) - d.x(o.base, j)), 1e-12);
    }
  }
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.x(i, j), d.x(i, j));
  }
  EXPECT_EQ(smote(d.x, d.y, plan).x, r.x);
}

TEST(Smote, ClampsKAndRejectsTinyMinority) {
  const Matrix x = {{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 6}, {7, 7}, {8, 8}, {9, 9}, {9, 8}, {8, 9}};
  const std::vector<int> y = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  ResamplePlan plan;
  plan.smote_k = 3;
  const auto r = smote(x, y, plan);
  EXPECT_EQ(r.warnings.size(), 1u);
  const std::vector<int> one = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_THROW(smote(x, one, plan), ArgumentError);
}

TEST(Undersample, RatioArithmeticAndErrors) {
  const LabeledData d = imbalanced(1000, 100, 3);
  ResamplePlan plan;
  plan.undersample_ratio = 0.5;
  plan.seed = 5;
  const auto r = random_undersample(d.x, d.y, plan);
  EXPECT_EQ(r.after, (ClassCounts{200, 100}));
  EXPECT_EQ(random_undersample(d.x, d.y, plan).x, r.x);
  plan.undersample_ratio = 0.05;
  EXPECT_THROW(random_undersample(d.x, d.y, plan), ArgumentError);
}

TEST(Balance, MatchesPlanExactly) {
  const LabeledData d = imbalanced(900, 60, 4);
  ResamplePlan plan;
  plan.seed = 9;
  const auto r = balance(d, plan);
  // SMOTE to floor(0.5 * 900) = 450 positives, then 450 / 1.0 negatives.
  EXPECT_EQ(r.before, (ClassCounts{900, 60}));
  EXPECT_EQ(r.after, (ClassCounts{450, 450}));
  EXPECT_EQ(balance(d, plan).x, r.x);
  ASSERT_EQ(r.synthetic.size(), 390u);
  for (const auto& o : r.synthetic) {
    EXPECT_EQ(d.y[o.base], 1);
    EXPECT_EQ(d.y[o.neighbor], 1);
  }

  LabeledData even = imbalanced(100, 100, 5);
  plan.oversample_ratio = 1.0;
  EXPECT_EQ(balance(even, plan).after, (ClassCounts{100, 100}));
  even.role = SplitRole::kTest;
  EXPECT_THROW(balance(even, plan), ArgumentError);
}

TEST(ResamplePlan, Validation) {
  ResamplePlan p;
  p.oversample_ratio = 0.0;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = {};
  p.smote_k = 0;
  EXPECT_THROW(p.validate(), ArgumentError);
}

}  // namespace
}  // namespace crimepred
