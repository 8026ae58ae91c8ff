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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crimepred/matrix.hpp"
#include "crimepred/tree.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

enum class ModelKind { kKnn, kLogReg, kSvc, kForest, kGbm };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);
// Human-readable algorithm name used in report tables.
std::string_view display_name(ModelKind kind);

struct KnnParams {
  std::size_t k = 14;
  std::string metric = "manhattan";
};

struct LogRegParams {
  std::size_t max_iter = 100;
  double tol = 1e-8;  // on the gradient norm of the mean loss
  double ridge = 0.0;
  double fallback_ridge = 1e-6;
};

struct SvcParams {
  double c = 1.0;
  double gamma = 0.1;
  std::string kernel = "rbf";
  double tol = 1e-3;
  std::size_t max_passes = 1000;
  std::size_t max_rows = 20000;
  std::size_t cache_mb = 256;
};

struct ForestParams {
  std::size_t n_trees = 50;
  std::size_t max_depth = 9;
  std::string criterion = "gini";
  bool bootstrap = true;
  std::size_t max_features = 0;  // 0 means ceil(sqrt(d))
};

struct GbmParams {
  double learning_rate = 0.35;
  double gamma = 0.1;
  double lambda = 1.0;
  std::size_t max_depth = 6;
  std::size_t n_rounds = 200;
  double base_score = 0.5;
  double min_child_weight = 1.0;
  std::string objective = "binary:logistic";
  std::string eval_metric = "error";
};

struct ClassifierConfig {
  ModelKind kind = ModelKind::kGbm;
  KnnParams knn;
  LogRegParams logreg;
  SvcParams svc;
  ForestParams forest;
  GbmParams gbm;
  std::uint64_t seed = 0;

  void validate() const;
  // Sets one hyperparameter of the active kind; unknown names throw.
  void set_param(std::string_view name, const nlohmann::json& value);
  // Hyperparameters of the active kind only.
  nlohmann::json params_json() const;
  nlohmann::json to_json() const;
  // Accepts {"kind": ..., "params": {...}, "seed": ...}; unknown keys throw.
  static ClassifierConfig from_json(const nlohmann::json& j);
};

struct KnnModel {
  KnnParams params;
  Matrix x;
  std::vector<int> y;
};

struct OptimizerTrace {
  std::vector<double> loss;  // mean loss after each accepted step, starting at the initial point
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  double ridge = 0.0;
  bool converged = false;
};

struct LogRegModel {
  LogRegParams params;
  double intercept = 0.0;
  std::vector<double> coef;
  // Index 0 is the intercept, then one entry per feature.
  std::vector<double> std_error;
  std::vector<double> z;
  std::vector<double> p_value;
  OptimizerTrace trace;
};

struct SvmModel {
  SvcParams params;
  Matrix support;
  std::vector<double> dual_coef;  // alpha_i * y_i with y in {-1, +1}
  double bias = 0.0;
  double objective = 0.0;  // dual objective at the solution
  std::size_t iterations = 0;
};

struct ForestModel {
  ForestParams params;
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
};

struct GbmModel {
  GbmParams params;
  std::vector<DecisionTree> trees;
  std::vector<double> train_error;  // binary error rate after each round
};

using ModelImpl = std::variant<KnnModel, LogRegModel, SvmModel, ForestModel, GbmModel>;

struct Model {
  ClassifierConfig config;
  std::size_t n_features = 0;
  ModelImpl impl;
  std::vector<std::string> warnings;
};

KnnModel knn_fit(const Matrix& x, std::span<const int> y, const KnnParams& params);
// Indices of the k nearest rows, nearest first, ties to the lower index.
std::vector<std::size_t> knn_neighbors(const KnnModel& model, std::span<const double> query);
std::vector<double> knn_predict_proba(const KnnModel& model, const Matrix& x);

// Mean negative log-likelihood plus ridge/2 * |beta|^2 at theta = (b, beta).
double logreg_loss(const Matrix& x, std::span<const int> y, std::span<const double> theta, double ridge);
std::vector<double> logreg_gradient(const Matrix& x, std::span<const int> y,
                                    std::span<const double> theta, double ridge);
LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegParams& params,
                       std::vector<std::string>* warnings = nullptr);
std::vector<double> logreg_margin(const LogRegModel& model, const Matrix& x);

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma);
SvmModel svc_fit(const Matrix& x, std::span<const int> y, const SvcParams& params);
std::vector<double> svc_decision(const SvmModel& model, const Matrix& x);

ForestModel forest_fit(const Matrix& x, std::span<const int> y, const ForestParams& params,
                       std::uint64_t seed);
std::vector<double> forest_predict_proba(const ForestModel& model, const Matrix& x);

GbmModel gbm_fit(const Matrix& x, std::span<const int> y, const GbmParams& params);
std::vector<double> gbm_margin(const GbmModel& model, const Matrix& x);

double sigmoid(double z);

Model fit(const Matrix& x, std::span<const int> y, const ClassifierConfig& config);
// Scores in [0, 1]; SVC margins pass through the logistic function.
std::vector<double> predict_proba(const Model& model, const Matrix& x);
// 1 iff score >= 0.5.
std::vector<int> predict(const Model& model, const Matrix& x);
// Raw decision values for logreg, svc and gbm; scores for knn and forest.
std::vector<double> predict_margin(const Model& model, const Matrix& x);

inline constexpr int kModelFormatVersion = 1;
nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

}  // namespace crimepred
