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

#include <cmath>
#include <random>

#include "crimepred/error.hpp"
#include "crimepred/explain.hpp"

namespace crimepred {
namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(n, d);
  for (double& v : m.data()) v = nd(gen);
  return m;
}

PredictFn linear(std::vector<double> w, double b) {
  return [w, b](const Matrix& x) {
    std::vector<double> out(x.rows(), b);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t j = 0; j < w.size(); ++j) out[r] += w[j] * x(r, j);
    }
    return out;
  };
}

TEST(Shap, DummyFeatures) {
  const Matrix bg = random_matrix(6, 3, 1);
  const std::vector<double> x = {0.7, -1.0, 2.0};
  const PredictFn f = [](const Matrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = std::tanh(m(r, 0));
    return out;
  };
  for (const ShapValues& s : {exact_shap(f, x, bg), kernel_shap(f, x, bg)}) {
    EXPECT_NEAR(s.phi[1], 0.0, 1e-12);
    EXPECT_NEAR(s.phi[2], 0.0, 1e-12);
    EXPECT_NEAR(s.phi[0], s.prediction - s.base_value, 1e-12);
  }
}

TEST(Shap, LinearModelClosedForm) {
  const Matrix bg = random_matrix(10, 4, 2);
  const std::vector<double> w = {1.5, -2.0, 0.0, 0.5};
  const std::vector<double> x = {0.3, 1.1, -0.4, 2.2};
  const ShapValues s = exact_shap(linear(w, 0.1), x, bg);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0;
    for (std::size_t r = 0; r < bg.rows(); ++r) mean += bg(r, j);
    mean /= static_cast<double>(bg.rows());
    EXPECT_NEAR(s.phi[j], w[j] * (x[j] - mean), 1e-12);
  }
}

TEST(Shap, SymmetricFeaturesShareCredit) {
  const Matrix bg = {{0, 0, 0}, {1, 1, 1}};
  const PredictFn f = [](const Matrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, 0) * m(r, 1) + 0.3 * m(r, 2);
    return out;
  };
  const std::vector<double> x = {2, 2, 1};
  const ShapValues s = exact_shap(f, x, bg);
  EXPECT_NEAR(s.phi[0], s.phi[1], 1e-12);
  const ShapValues k = kernel_shap(f, x, bg);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(k.phi[j], s.phi[j], 1e-9);
}

TEST(Shap, KernelEqualsExactOnNonlinearModel) {
  const Matrix bg = random_matrix(5, 8, 3);
  const PredictFn f = [](const Matrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      out[r] = 1.0 / (1.0 + std::exp(-(m(r, 0) * m(r, 3) - m(r, 5) + std::sin(m(r, 7)) * m(r, 1))));
    }
    return out;
  };
  const Matrix rows = random_matrix(5, 8, 4);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const ShapValues e = exact_shap(f, rows.row(i), bg);
    const ShapValues k = kernel_shap(f, rows.row(i), bg);
    double sum = k.base_value;
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_NEAR(k.phi[j], e.phi[j], 1e-9);
      sum += k.phi[j];
    }
    EXPECT_NEAR(sum, k.prediction, 1e-12);
  }
}

TEST(Shap, SampledKernelKeepsEfficiency) {
  const std::size_t d = 14;
  const Matrix bg = random_matrix(4, d, 5);
  std::vector<double> w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = static_cast<double>(j) - 6.0;
  const Matrix rows = random_matrix(1, d, 6);
  KernelShapOptions opt;
  opt.seed = 9;
  const ShapValues k = kernel_shap(linear(w, 0.0), rows.row(0), bg, opt);
  const ShapValues e = exact_shap(linear(w, 0.0), rows.row(0), bg);
  double sum = k.base_value;
  for (std::size_t j = 0; j < d; ++j) {
    sum += k.phi[j];
    EXPECT_NEAR(k.phi[j], e.phi[j], 1e-6);
  }
  EXPECT_NEAR(sum, k.prediction, 1e-9);
  const ShapValues again = kernel_shap(linear(w, 0.0), rows.row(0), bg, opt);
  EXPECT_EQ(again.phi, k.phi);
}

TEST(Shap, RefusesTooManyFeaturesAndPropagatesErrors) {
  const Matrix bg = random_matrix(2, 16, 7);
  const Matrix row = random_matrix(1, 16, 8);
  EXPECT_THROW(exact_shap(linear(std::vector<double>(16, 1.0), 0), row.row(0), bg), ArgumentError);
  const PredictFn bad = [](const Matrix&) -> std::vector<double> { throw std::runtime_error("boom"); };
  EXPECT_THROW(kernel_shap(bad, random_matrix(1, 3, 1).row(0), random_matrix(2, 3, 2)), std::exception);
}

TEST(Shap, SummaryRankingAndTables) {
  std::vector<ShapValues> v(2);
  v[0].phi = {0.1, -0.4, 0.2};
  v[1].phi = {-0.3, 0.2, 0.2};
  const ShapSummary s = shap_summary(v, {"Hour", "Ward", "Beat"});
  EXPECT_NEAR(s.mean_abs[1], 0.3, 1e-15);
  EXPECT_EQ(s.top_feature(), "Ward");
  EXPECT_EQ(s.ranking, (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(ShapSummary::from_json(s.to_json()).top_feature(), "Ward");
  EXPECT_EQ(table2_csv({{ModelKind::kForest, s}}),
            "Algorithm,MostContributingFeature,AverageShapleyValue\nRandom Forest,Ward,0.3000\n");
  EXPECT_EQ(phi_csv(v, {"Hour", "Ward", "Beat"}).substr(0, 45), "instance,base_value,prediction,Hour,Ward,Beat");
}

TEST(Shap, ExplainRowsIsDeterministic) {
  const Matrix bg = random_matrix(4, 3, 10);
  const Matrix rows = random_matrix(6, 3, 11);
  const PredictFn f = linear({1, 2, 3}, 0.5);
  const auto a = explain_rows(f, rows, bg, ShapMethod::kKernel);
  const auto b = explain_rows(f, rows, bg, ShapMethod::kKernel);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(a[i].phi, b[i].phi);
  EXPECT_EQ(sample_rows(rows, 3, 4), sample_rows(rows, 3, 4));
  EXPECT_EQ(sample_rows(rows, 10, 4), rows);
}

}  // namespace
}  // namespace crimepred
