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
#include <set>

#include "crimepred/error.hpp"
#include "crimepred/tune.hpp"

namespace crimepred {
namespace {

TEST(CvSplit, StratifiedSizes) {
  const std::vector<int> y = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto folds = cv_split(y, 5, 3);
  std::vector<std::size_t> size(5), pos(5);
  for (std::size_t i = 0; i < y.size(); ++i) {
    ++size[folds[i]];
    pos[folds[i]] += static_cast<std::size_t>(y[i]);
  }
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(size[f], 2u);
    EXPECT_EQ(pos[f], 1u);
  }
  EXPECT_EQ(cv_split(y, 5, 3), folds);
  const std::vector<int> odd = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  const auto f2 = cv_split(odd, 3, 1);
  std::vector<std::size_t> s2(3);
  for (auto f : f2) ++s2[f];
  EXPECT_LE(*std::max_element(s2.begin(), s2.end()) - *std::min_element(s2.begin(), s2.end()), 1u);
  EXPECT_THROW(cv_split(std::vector<int>{0, 0, 0, 1}, 2, 1), ArgumentError);
}

TEST(Grid, CartesianProductLastAxisFastest) {
  const ParamGrid g = ParamGrid::from_json({{"a", {1, 2}}, {"b", {"x", "y", "z"}}});
  ASSERT_EQ(g.size(), 6u);
  const auto c = g.candidates();
  EXPECT_EQ(c[0], (nlohmann::json{{"a", 1}, {"b", "x"}}));
  EXPECT_EQ(c[1], (nlohmann::json{{"a", 1}, {"b", "y"}}));
  EXPECT_EQ(c[3], (nlohmann::json{{"a", 2}, {"b", "x"}}));
  std::size_t calls = 0;
  const auto r = grid_search(g, [&](const nlohmann::json& p) {
    ++calls;
    return std::vector<double>{p["a"].get<double>() + (p["b"] == "y" ? 0.5 : 0.0)};
  });
  EXPECT_EQ(r.trials.size(), 6u);
  EXPECT_EQ(calls, 6u);
  EXPECT_EQ(r.best().params, (nlohmann::json{{"a", 2}, {"b", "y"}}));
  EXPECT_EQ(r.best().rank, 1u);
}

TEST(Grid, SingleCandidateAndFailures) {
  const ParamGrid one = ParamGrid::from_json({{"k", {5}}});
  const auto r = grid_search(one, [](const nlohmann::json&) { return std::vector<double>{0.4, 0.6}; });
  EXPECT_DOUBLE_EQ(r.best().mean, 0.5);
  const ParamGrid two = ParamGrid::from_json({{"k", {1, 2}}});
  const auto partial = grid_search(two, [](const nlohmann::json& p) {
    if (p["k"] == 1) throw ArgumentError("bad k");
    return std::vector<double>{0.3};
  });
  EXPECT_TRUE(partial.trials[0].failed);
  EXPECT_TRUE(std::isinf(partial.trials[0].mean));
  EXPECT_EQ(partial.best().params["k"], 2);
  EXPECT_THROW(grid_search(two, [](const nlohmann::json&) -> std::vector<double> { throw Error("x"); }), Error);
  const std::string ledger = partial.ledger_csv();
  EXPECT_EQ(ledger.substr(0, ledger.find('\n')), "trial,fold,params,score,mean,rank,status");
}

TEST(Bayes, FindsQuadraticOptimum) {
  const ParamSpace space = ParamSpace::from_json({{"x", {0.0, 1.0}}});
  const FoldObjective f = [](const nlohmann::json& p) {
    const double x = p["x"].get<double>();
    return std::vector<double>{-(x - 0.3) * (x - 0.3)};
  };
  BayesOptions opt;
  opt.seed = 4;
  const auto r = bayes_opt(space, f, opt);
  EXPECT_EQ(r.trials.size(), 25u);
  EXPECT_NEAR(r.best().params["x"].get<double>(), 0.3, 0.05);
  const auto again = bayes_opt(space, f, opt);
  for (std::size_t i = 0; i < r.trials.size(); ++i) EXPECT_EQ(again.trials[i].params, r.trials[i].params);
}

TEST(ParamSpace, Decoding) {
  const ParamSpace s = ParamSpace::from_json({{"C", {0.1, 10.0}}, {"k", {{"int", {5, 30}}}}, {"kernel", {"rbf", "lin", "poly"}}});
  ASSERT_EQ(s.dims.size(), 3u);
  const std::vector<double> lo = {0.0, 0.0, 0.0}, hi = {1.0, 1.0, 1.0};
  const auto a = s.decode(lo), b = s.decode(hi);
  EXPECT_NEAR(a["C"].get<double>(), 0.1, 1e-12);
  EXPECT_NEAR(b["C"].get<double>(), 10.0, 1e-12);
  EXPECT_EQ(a["k"], 5);
  EXPECT_EQ(b["k"], 30);
  EXPECT_EQ(a["kernel"], "rbf");
  EXPECT_EQ(b["kernel"], "poly");
  EXPECT_DOUBLE_EQ(halton(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(halton(2, 3), 2.0 / 3.0);
}

TEST(CrossValidate, FoldScoresWithResampling) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  Matrix x(300, 3);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < 300; ++i) {
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = nd(gen);
    y[i] = x(i, 0) + 0.3 * nd(gen) > 1.0 ? 1 : 0;
  }
  CvSetup setup;
  setup.x = &x;
  setup.y = y;
  setup.folds = 3;
  setup.fold_of = cv_split(y, 3, 1);
  setup.base.kind = ModelKind::kKnn;
  setup.resample = ResamplePlan{};
  const auto scores = cross_validate(setup, {{"k", 5}});
  ASSERT_EQ(scores.size(), 3u);
  for (double s : scores) EXPECT_GT(s, 0.5);
  EXPECT_EQ(cross_validate(setup, {{"k", 5}}), scores);
  EXPECT_THROW(cross_validate(setup, {{"bogus", 1}}), ArgumentError);
}

}  // namespace
}  // namespace crimepred
