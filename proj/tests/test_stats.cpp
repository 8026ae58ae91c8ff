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

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "crimepred/error.hpp"
#include "crimepred/stats.hpp"
#include "oracles.hpp"

namespace crimepred {
namespace {

TEST(Pearson, KnownValuesAndErrors) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 4, 6, 8, 10};
  const std::vector<double> z = {5, 4, 3, 2, 1};
  EXPECT_NEAR(pearson(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, z), -1.0, 1e-15);
  const std::vector<double> c = {3, 3, 3, 3, 3};
  EXPECT_THROW(pearson(x, c), UndefinedError);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), ArgumentError);
}

TEST(Spearman, RankInvarianceAndTies) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {1, 8, 27, 64, 125};
  const std::vector<double> r = {9, 7, 4, 2, 0};
  EXPECT_NEAR(spearman(x, y), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, r), -1.0, 1e-15);
  // Average ranks [1, 2.5, 2.5, 4] against [1, 2, 3, 4]: 4.5 / sqrt(4.5 * 5).
  const std::vector<double> a = {1, 2, 2, 3};
  const std::vector<double> b = {1, 2, 3, 4};
  EXPECT_EQ(average_ranks(a), (std::vector<double>{1, 2.5, 2.5, 4}));
  EXPECT_NEAR(spearman(a, b), 4.5 / std::sqrt(22.5), 1e-15);
  EXPECT_THROW(spearman(b, std::vector<double>{2, 2, 2, 2}), UndefinedError);
}

TEST(Gamma, RegularizedFunctions) {
  for (double x : {0.1, 1.0, 3.5, 20.0}) {
    EXPECT_NEAR(regularized_gamma_q(1.0, x), std::exp(-x), 1e-13);
    EXPECT_NEAR(regularized_gamma_p(1.0, x) + regularized_gamma_q(1.0, x), 1.0, 1e-14);
    EXPECT_NEAR(chi_square_sf(x, 1.0), std::erfc(std::sqrt(x / 2.0)), 1e-12);
  }
  EXPECT_NEAR(chi_square_sf(5.991464547107979, 2.0), 0.05, 1e-12);
}

TEST(ChiSquare, TwoByTwoAndIndependence) {
  const auto r = chi_square_independence({{10, 20}, {20, 10}});
  EXPECT_NEAR(r.statistic, 20.0 / 3.0, 1e-12);
  EXPECT_EQ(r.dof, 1);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(10.0 / 3.0)), 1e-12);
  const auto ind = chi_square_independence({{10, 20}, {30, 60}});
  EXPECT_NEAR(ind.statistic, 0.0, 1e-12);
  EXPECT_NEAR(ind.p_value, 1.0, 1e-12);
  EXPECT_THROW(chi_square_independence({{0, 0}, {1, 2}}), UndefinedError);
  const std::vector<std::string> a = {"x", "y", "x"}, b = {"p", "p", "q"};
  EXPECT_EQ(contingency_table(a, b), (std::vector<std::vector<double>>{{1, 1}, {1, 0}}));
}

TEST(Vif, OrthogonalDuplicatedAndOracle) {
  const Matrix ortho = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (const auto& e : vif(ortho, {"a", "b"}).entries) EXPECT_NEAR(e.value, 1.0, 1e-12);
  const Matrix dup = {{1, 1, 2}, {2, 2, 1}, {3, 3, 5}, {4, 4, 3}, {5, 5, 4}};
  const auto rd = vif(dup, {"a", "b", "c"});
  EXPECT_TRUE(rd.entries[0].infinite);
  EXPECT_TRUE(rd.entries[1].infinite);
  EXPECT_FALSE(rd.entries[2].infinite);

  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  Matrix x(40, 3);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = nd(gen);
    x(i, 1) = 0.7 * x(i, 0) + nd(gen);
    x(i, 2) = nd(gen) - 0.4 * x(i, 1);
  }
  const auto rep = vif(x, {"a", "b", "c"});
  for (std::size_t j = 0; j < 3; ++j) {
    // Normal equations of column j on the others plus an intercept.
    Eigen::MatrixXd A(40, 3);
    Eigen::VectorXd t(40);
    for (std::size_t i = 0; i < 40; ++i) {
      A(i, 0) = 1.0;
      std::size_t c = 1;
      for (std::size_t k = 0; k < 3; ++k) {
        if (k != j) A(i, c++) = x(i, k);
      }
      t[i] = x(i, j);
    }
    const Eigen::VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * t);
    const double sse = (t - A * beta).squaredNorm();
    const double sst = (t.array() - t.mean()).square().sum();
    EXPECT_NEAR(rep.entries[j].value, 1.0 / (sse / sst), 1e-9);
  }
}

TEST(Frequencies, RankingAndTies) {
  const std::vector<std::optional<std::string>> v = {"B", "A", "THEFT", "THEFT", std::nullopt, "A", "B", "THEFT"};
  const auto r = rank_frequencies(v);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], (FrequencyEntry{"THEFT", 3}));
  EXPECT_EQ(r[1], (FrequencyEntry{"A", 2}));
  EXPECT_EQ(r[2], (FrequencyEntry{"B", 2}));
  EXPECT_TRUE(rank_frequencies(std::vector<std::optional<std::string>>{}).empty());
}

std::vector<std::vector<std::string>> random_table(std::size_t n, const std::vector<int>& levels, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::vector<std::string>> cols(levels.size());
  for (std::size_t q = 0; q < levels.size(); ++q) {
    for (std::size_t i = 0; i < n; ++i) {
      // First rows cover every level so the category count is exact.
      const int v = i < static_cast<std::size_t>(levels[q]) ? static_cast<int>(i) : static_cast<int>(gen() % levels[q]);
      cols[q].push_back("c" + std::to_string(v));
    }
  }
  return cols;
}

TEST(Mca, TotalInertiaIdentity) {
  const auto two = random_table(30, {3, 2}, 1);
  EXPECT_NEAR(McaModel::fit(two, 1).total_inertia(), 1.5, 1e-9);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::vector<int> levels = {2 + static_cast<int>(s % 4), 3, 5, 2 + static_cast<int>(s % 3)};
    const auto cols = random_table(60, levels, s + 10);
    const auto m = McaModel::fit(cols, 2);
    const double J = levels[0] + levels[1] + levels[2] + levels[3];
    EXPECT_NEAR(m.total_inertia(), J / 4.0 - 1.0, 1e-9);
    EXPECT_EQ(m.total_categories(), static_cast<std::size_t>(J));
  }
}

TEST(Mca, RowCoordinatesMatchDenseSvd) {
  const std::vector<std::vector<std::string>> tiny = {{"a", "b", "a", "c", "b", "a"}, {"x", "y", "y", "x", "y", "x"}};
  for (const auto& cols : {tiny, random_table(50, {4, 3, 3}, 7)}) {
    const std::size_t k = 2;
    const auto m = McaModel::fit(cols, k);
    const Eigen::MatrixXd F = oracle::mca_rows_by_svd(cols, k);
    const Matrix& R = m.row_coordinates();
    for (std::size_t a = 0; a < k; ++a) {
      double sign = 0.0;
      for (std::size_t i = 0; i < R.rows() && sign == 0.0; ++i) {
        if (std::fabs(F(i, a)) > 1e-6) sign = (R(i, a) * F(i, a) > 0) ? 1.0 : -1.0;
      }
      for (std::size_t i = 0; i < R.rows(); ++i) EXPECT_NEAR(R(i, a), sign * F(i, a), 1e-8);
    }
    const Matrix again = m.transform(cols);
    for (std::size_t i = 0; i < R.rows(); ++i) {
      for (std::size_t a = 0; a < k; ++a) EXPECT_NEAR(again(i, a), R(i, a), 1e-9);
    }
  }
}

TEST(Mca, ClampsComponentsAndCountsUnseen) {
  const std::vector<std::vector<std::string>> cols = {{"a", "b", "a", "b"}, {"x", "y", "x", "y"}};
  const auto m = McaModel::fit(cols, 5);
  EXPECT_EQ(m.n_components(), m.rank());
  EXPECT_FALSE(m.warnings().empty());
  std::size_t unseen = 0;
  m.transform({{"a", "zzz"}, {"x", "y"}}, &unseen);
  EXPECT_EQ(unseen, 1u);
}

}  // namespace
}  // namespace crimepred
