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
#include "crimepred/models.hpp"
#include "oracles.hpp"

namespace crimepred {
namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
};

Data linear_data(std::size_t n, std::size_t d, std::uint64_t seed, double noise = 0.7) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Data out{Matrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out.x(i, j) = nd(gen);
    out.y[i] = out.x(i, 0) - 0.5 * out.x(i, 1) + noise * nd(gen) > 0 ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------

TEST(Knn, NearestSelfAndErrors) {
  const Data d = linear_data(30, 2, 1);
  const KnnModel m = knn_fit(d.x, d.y, {1, "manhattan"});
  const auto s = knn_predict_proba(m, d.x);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(s[i], d.y[i]);
  EXPECT_THROW(knn_fit(d.x, d.y, {31, "manhattan"}), ArgumentError);
  EXPECT_THROW(knn_fit(d.x, d.y, {3, "euclidean"}), ArgumentError);
}

TEST(Knn, TwentyPointOracle) {
  std::mt19937_64 gen(2);
  Matrix x(20, 2);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = static_cast<double>(gen() % 4);
    x(i, 1) = static_cast<double>(gen() % 4);
    y[i] = static_cast<int>(gen() % 2);
  }
  const KnnModel m = knn_fit(x, y, {3, "manhattan"});
  Matrix q(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    q(i, 0) = static_cast<double>(gen() % 8) / 2.0;
    q(i, 1) = static_cast<double>(gen() % 8) / 2.0;
  }
  const auto s = knn_predict_proba(m, q);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(s[i], oracle::knn_score(x, y, q.row(i), 3));
  const auto nn = knn_neighbors(m, x.row(0));
  ASSERT_EQ(nn.size(), 3u);
  EXPECT_EQ(nn[0], 0u);
}

// ---------------------------------------------------------------------------

TEST(LogReg, GradientMatchesFiniteDifferences) {
  const Data d = linear_data(200, 3, 3);
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 10; ++t) {
    std::vector<double> theta(4);
    for (auto& v : theta) v = nd(gen);
    const auto g = logreg_gradient(d.x, d.y, theta, 0.05);
    for (std::size_t j = 0; j < 4; ++j) {
      auto up = theta, dn = theta;
      up[j] += 1e-6;
      dn[j] -= 1e-6;
      const double fd = (logreg_loss(d.x, d.y, up, 0.05) - logreg_loss(d.x, d.y, dn, 0.05)) / 2e-6;
      EXPECT_NEAR(g[j], fd, 1e-7 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST(LogReg, MonotoneTraceAndInference) {
  const Data d = linear_data(2000, 3, 5);
  const LogRegModel m = logreg_fit(d.x, d.y, {});
  EXPECT_TRUE(m.trace.converged);
  for (std::size_t i = 1; i < m.trace.loss.size(); ++i) EXPECT_LE(m.trace.loss[i], m.trace.loss[i - 1]);
  ASSERT_EQ(m.std_error.size(), 4u);
  EXPECT_GT(m.coef[0], 0.0);
  EXPECT_LT(m.p_value[1], 1e-6);
  EXPECT_GT(m.p_value[3], 1e-4);
  const auto margin = logreg_margin(m, d.x);
  EXPECT_NEAR(margin[0], m.intercept + m.coef[0] * d.x(0, 0) + m.coef[1] * d.x(0, 1) + m.coef[2] * d.x(0, 2), 1e-12);
}

TEST(LogReg, SeparationFallsBackToRidge) {
  const Matrix x = {{-3}, {-2}, {-1}, {1}, {2}, {3}};
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  std::vector<std::string> warnings;
  const LogRegModel m = logreg_fit(x, y, {}, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_GT(m.trace.ridge, 0.0);
  EXPECT_TRUE(std::isfinite(m.coef[0]));
  EXPECT_GT(m.coef[0], 0.0);
}

TEST(LogReg, IterationCapRaises) {
  const Data d = linear_data(500, 3, 6);
  LogRegParams p;
  p.max_iter = 1;
  EXPECT_THROW(logreg_fit(d.x, d.y, p), ConvergenceError);
}

// ---------------------------------------------------------------------------

TEST(Svc, SmallProblemMatchesEnumeratedQp) {
  const Matrix x = {{0, 0}, {1, 0.2}, {0.3, 1}, {1.2, 1.1}, {0.6, 0.5}, {0.1, 0.7}};
  const std::vector<int> y = {0, 1, 1, 0, 1, 0};
  SvcParams p;
  p.c = 1.0;
  p.gamma = 2.0;
  const SvmModel m = svc_fit(x, y, p);
  EXPECT_NEAR(m.objective, oracle::svc_dual_optimum(x, y, 1.0, 2.0), 1e-4);
  double sum = 0.0;
  for (double a : m.dual_coef) {
    EXPECT_LE(std::fabs(a), 1.0 + 1e-12);
    sum += a;
  }
  EXPECT_LT(std::fabs(sum), 1e-6);
}

TEST(Svc, XorClustersSeparated) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd(0.0, 0.1);
  Matrix x(80, 2);
  std::vector<int> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
    x(i, 0) = a + nd(gen);
    x(i, 1) = b + nd(gen);
    y[i] = a ^ b;
  }
  SvcParams p;
  p.c = 10;
  p.gamma = 2;
  const SvmModel m = svc_fit(x, y, p);
  const auto dec = svc_decision(m, x);
  for (std::size_t i = 0; i < 80; ++i) EXPECT_EQ(dec[i] >= 0 ? 1 : 0, y[i]);
  EXPECT_LT(m.support.rows(), 80u);
}

TEST(Svc, GuardsAndConvergence) {
  const Data d = linear_data(200, 2, 8, 2.0);
  SvcParams p;
  p.max_rows = 100;
  EXPECT_THROW(svc_fit(d.x, d.y, p), ArgumentError);
  p = {};
  p.max_passes = 1;
  p.tol = 1e-9;
  p.c = 100;
  EXPECT_THROW(svc_fit(d.x, d.y, p), ConvergenceError);
  EXPECT_DOUBLE_EQ(rbf_kernel(std::vector<double>{0, 0}, std::vector<double>{1, 1}, 0.5), std::exp(-1.0));
}

// ---------------------------------------------------------------------------

TEST(Forest, DepthDeterminismAndVotes) {
  const Data d = linear_data(1500, 6, 9, 1.5);
  ForestParams p;
  p.n_trees = 15;
  const ForestModel a = forest_fit(d.x, d.y, p, 42);
  const ForestModel b = forest_fit(d.x, d.y, p, 42);
  ASSERT_EQ(a.trees.size(), 15u);
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    EXPECT_LE(a.trees[t].depth(), 9u);
    EXPECT_EQ(a.trees[t], b.trees[t]);
  }
  EXPECT_EQ(forest_predict_proba(a, d.x), forest_predict_proba(b, d.x));
  EXPECT_NE(forest_fit(d.x, d.y, p, 43).trees[0], a.trees[0]);

  ForestModel leaves;
  leaves.trees.assign(3, DecisionTree({TreeNode{-1, 0.0, -1, -1, 1.0, 0.0, 1.0}}));
  EXPECT_EQ(forest_predict_proba(leaves, d.x)[0], 1.0);
}

// ---------------------------------------------------------------------------

TEST(Gbm, SymmetricLabelsGiveZeroLeaf) {
  const Matrix x = {{1}, {2}, {3}, {4}};
  const std::vector<int> y = {1, 1, 0, 0};
  GbmParams p;
  p.n_rounds = 1;
  p.max_depth = 0;
  const GbmModel m = gbm_fit(x, y, p);
  ASSERT_EQ(m.trees[0].nodes().size(), 1u);
  EXPECT_EQ(m.trees[0].nodes()[0].value, 0.0);
}

// Spreadsheet-style ledger: per round, gradients and hessians, the best stump
// by enumerating every threshold, and the leaf weights.
std::vector<double> manual_boosting(const std::vector<double>& x, const std::vector<int>& y, std::size_t rounds,
                                    double lr, double lambda) {
  const std::size_t n = x.size();
  std::vector<double> margin(n, 0.0);
  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<double> g(n), h(n);
    double G = 0, H = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-margin[i]));
      g[i] = p - y[i];
      h[i] = p * (1 - p);
      G += g[i];
      H += h[i];
    }
    double best = 0.0, thr = 0.0;
    bool split = false;
    for (std::size_t c = 0; c + 1 < n; ++c) {
      const double t = x[c] + (x[c + 1] - x[c]) / 2.0;
      double gl = 0, hl = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] <= t) {
          gl += g[i];
          hl += h[i];
        }
      }
      const double gain =
          0.5 * (gl * gl / (hl + lambda) + (G - gl) * (G - gl) / (H - hl + lambda) - G * G / (H + lambda));
      if (gain > best) {
        best = gain;
        thr = t;
        split = true;
      }
    }
    double gl = 0, hl = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (split && x[i] <= thr) {
        gl += g[i];
        hl += h[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const bool left = split && x[i] <= thr;
      const double w = split ? (left ? -gl / (hl + lambda) : -(G - gl) / (H - hl + lambda)) : -G / (H + lambda);
      margin[i] += lr * w;
    }
  }
  return margin;
}

TEST(Gbm, TwoRoundsMatchManualLedger) {
  const std::vector<double> xs = {1, 2, 3, 4, 5, 6};
  const std::vector<int> y = {0, 0, 1, 0, 1, 1};
  Matrix x(6, 1);
  for (std::size_t i = 0; i < 6; ++i) x(i, 0) = xs[i];
  GbmParams p;
  p.n_rounds = 2;
  p.max_depth = 1;
  p.gamma = 0.0;
  p.min_child_weight = 0.0;
  const GbmModel m = gbm_fit(x, y, p);
  const auto margin = gbm_margin(m, x);
  const auto ref = manual_boosting(xs, y, 2, p.learning_rate, p.lambda);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(margin[i], ref[i], 1e-12);
  EXPECT_EQ(m.train_error.size(), 2u);
}

TEST(Gbm, GammaBlocksWeakSplits) {
  const Data d = linear_data(800, 4, 10, 1.0);
  GbmParams p;
  p.n_rounds = 30;
  const GbmModel m = gbm_fit(d.x, d.y, p);
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf()) {
        EXPECT_GT(n.gain, p.gamma);
      }
    }
  }
  p.gamma = 1e6;
  const GbmModel none = gbm_fit(d.x, d.y, p);
  for (const auto& t : none.trees) EXPECT_EQ(t.nodes().size(), 1u);
}

// ---------------------------------------------------------------------------

TEST(Model, JsonRoundTripForEveryKind) {
  const Data d = linear_data(300, 4, 11);
  for (ModelKind kind : {ModelKind::kKnn, ModelKind::kLogReg, ModelKind::kSvc, ModelKind::kForest, ModelKind::kGbm}) {
    ClassifierConfig cfg;
    cfg.kind = kind;
    cfg.forest.n_trees = 5;
    cfg.gbm.n_rounds = 10;
    cfg.seed = 3;
    const Model m = fit(d.x, d.y, cfg);
    const Model back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_EQ(predict_proba(back, d.x), predict_proba(m, d.x)) << to_string(kind);
    EXPECT_EQ(predict(back, d.x), predict(m, d.x));
    EXPECT_EQ(to_json(back).dump(), to_json(m).dump());
  }
  const Data wide = linear_data(5, 5, 12);
  ClassifierConfig cfg;
  cfg.kind = ModelKind::kLogReg;
  const Model m = fit(d.x, d.y, cfg);
  EXPECT_THROW(predict_proba(m, wide.x), ArgumentError);
}

TEST(ClassifierConfig, ParamsAndValidation) {
  ClassifierConfig c;
  c.kind = ModelKind::kSvc;
  c.set_param("C", 2.5);
  EXPECT_EQ(c.svc.c, 2.5);
  EXPECT_THROW(c.set_param("k", 3), ArgumentError);
  c.kind = ModelKind::kKnn;
  c.set_param("k", 9);
  EXPECT_EQ(c.knn.k, 9u);
  EXPECT_THROW(c.set_param("k", -1), ArgumentError);
  EXPECT_THROW(c.set_param("k", "nine"), ArgumentError);
  const auto j = c.to_json();
  EXPECT_EQ(ClassifierConfig::from_json(j).knn.k, 9u);
  EXPECT_THROW(ClassifierConfig::from_json({{"kind", "knn"}, {"bogus", 1}}), ArgumentError);
  EXPECT_EQ(model_kind_from_string("gbm"), ModelKind::kGbm);
  EXPECT_EQ(display_name(ModelKind::kGbm), "XGBoost");
  c.set_param("k", 6.6);
  EXPECT_EQ(c.knn.k, 7u);
}

}  // namespace
}  // namespace crimepred
