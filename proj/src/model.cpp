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
#include <limits>

#include "checks.hpp"
#include "crimepred/models.hpp"

namespace crimepred {
namespace {

template <typename F>
void visit(KnnParams& p, F&& f) {
  f("k", p.k);
  f("metric", p.metric);
}

template <typename F>
void visit(LogRegParams& p, F&& f) {
  f("max_iter", p.max_iter);
  f("tol", p.tol);
  f("ridge", p.ridge);
  f("fallback_ridge", p.fallback_ridge);
}

template <typename F>
void visit(SvcParams& p, F&& f) {
  f("C", p.c);
  f("gamma", p.gamma);
  f("kernel", p.kernel);
  f("tol", p.tol);
  f("max_passes", p.max_passes);
  f("max_rows", p.max_rows);
  f("cache_mb", p.cache_mb);
}

template <typename F>
void visit(ForestParams& p, F&& f) {
  f("n_trees", p.n_trees);
  f("max_depth", p.max_depth);
  f("criterion", p.criterion);
  f("bootstrap", p.bootstrap);
  f("max_features", p.max_features);
}

template <typename F>
void visit(GbmParams& p, F&& f) {
  f("learning_rate", p.learning_rate);
  f("gamma", p.gamma);
  f("lambda", p.lambda);
  f("max_depth", p.max_depth);
  f("n_rounds", p.n_rounds);
  f("base_score", p.base_score);
  f("min_child_weight", p.min_child_weight);
  f("objective", p.objective);
  f("eval_metric", p.eval_metric);
}

void assign(std::size_t& out, const nlohmann::json& v, std::string_view name) {
  if (v.is_number_unsigned() || v.is_number_integer()) {
    if (v.get<long long>() < 0) throw ArgumentError(std::string(name) + " must be non-negative");
    out = v.get<std::size_t>();
  } else if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!(d >= 0.0)) throw ArgumentError(std::string(name) + " must be non-negative");
    out = static_cast<std::size_t>(std::llround(d));
  } else {
    throw ArgumentError(std::string(name) + " must be an integer");
  }
}

void assign(double& out, const nlohmann::json& v, std::string_view name) {
  if (!v.is_number()) throw ArgumentError(std::string(name) + " must be a number");
  out = v.get<double>();
}

void assign(bool& out, const nlohmann::json& v, std::string_view name) {
  if (!v.is_boolean()) throw ArgumentError(std::string(name) + " must be a boolean");
  out = v.get<bool>();
}

void assign(std::string& out, const nlohmann::json& v, std::string_view name) {
  if (!v.is_string()) throw ArgumentError(std::string(name) + " must be a string");
  out = v.get<std::string>();
}

template <typename P>
bool set_field(P& params, std::string_view name, const nlohmann::json& value) {
  bool found = false;
  visit(params, [&](std::string_view key, auto& member) {
    if (key == name) {
      assign(member, value, name);
      found = true;
    }
  });
  return found;
}

template <typename P>
nlohmann::json fields_json(const P& params) {
  nlohmann::json j = nlohmann::json::object();
  visit(const_cast<P&>(params), [&](std::string_view key, auto& member) { j[std::string(key)] = member; });
  return j;
}

template <typename F>
decltype(auto) with_active(ClassifierConfig& c, F&& f) {
  switch (c.kind) {
    case ModelKind::kKnn: return f(c.knn);
    case ModelKind::kLogReg: return f(c.logreg);
    case ModelKind::kSvc: return f(c.svc);
    case ModelKind::kForest: return f(c.forest);
    case ModelKind::kGbm: return f(c.gbm);
  }
  throw ArgumentError("unknown model kind");
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"cols", m.cols()}, {"rows", std::move(rows)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(0, j.at("cols").get<std::size_t>());
  for (const auto& r : j.at("rows")) m.append_row(r.get<std::vector<double>>());
  return m;
}

nlohmann::json nullable(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) {
    if (std::isfinite(x)) out.push_back(x); else out.push_back(nullptr);
  }
  return out;
}

std::vector<double> from_nullable(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
  return out;
}

nlohmann::json trees_json(const std::vector<DecisionTree>& trees) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : trees) out.push_back(t.to_json());
  return out;
}

std::vector<DecisionTree> trees_from_json(const nlohmann::json& j) {
  std::vector<DecisionTree> out;
  for (const auto& t : j) out.push_back(DecisionTree::from_json(t));
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kKnn: return "knn";
    case ModelKind::kLogReg: return "logreg";
    case ModelKind::kSvc: return "svc";
    case ModelKind::kForest: return "forest";
    case ModelKind::kGbm: return "gbm";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view s) {
  for (ModelKind k : {ModelKind::kKnn, ModelKind::kLogReg, ModelKind::kSvc, ModelKind::kForest, ModelKind::kGbm}) {
    if (to_string(k) == s) return k;
  }
  throw ArgumentError("unknown model kind: " + std::string(s));
}

std::string_view display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kKnn: return "K-Nearest Neighbours";
    case ModelKind::kLogReg: return "Logistic Regression";
    case ModelKind::kSvc: return "Support Vector Machine";
    case ModelKind::kForest: return "Random Forest";
    case ModelKind::kGbm: return "XGBoost";
  }
  return "unknown";
}

void ClassifierConfig::validate() const {
  switch (kind) {
    case ModelKind::kKnn:
      if (knn.k == 0) throw ArgumentError("knn: k must be positive");
      if (knn.metric != "manhattan") throw ArgumentError("knn: unsupported metric " + knn.metric);
      break;
    case ModelKind::kLogReg:
      if (logreg.max_iter == 0 || !(logreg.tol > 0.0)) throw ArgumentError("logreg: max_iter and tol must be positive");
      if (logreg.ridge < 0.0 || !(logreg.fallback_ridge > 0.0)) throw ArgumentError("logreg: invalid ridge");
      break;
    case ModelKind::kSvc:
      if (!(svc.c > 0.0) || !(svc.gamma > 0.0) || !(svc.tol > 0.0)) throw ArgumentError("svc: C, gamma and tol must be positive");
      if (svc.kernel != "rbf") throw ArgumentError("svc: unsupported kernel " + svc.kernel);
      if (svc.max_passes == 0 || svc.cache_mb == 0) throw ArgumentError("svc: max_passes and cache_mb must be positive");
      break;
    case ModelKind::kForest:
      if (forest.n_trees == 0) throw ArgumentError("forest: n_trees must be positive");
      if (forest.criterion != "gini") throw ArgumentError("forest: unsupported criterion " + forest.criterion);
      break;
    case ModelKind::kGbm:
      if (!(gbm.learning_rate > 0.0)) throw ArgumentError("gbm: learning_rate must be positive");
      if (gbm.gamma < 0.0 || gbm.lambda < 0.0 || gbm.min_child_weight < 0.0) throw ArgumentError("gbm: gamma, lambda and min_child_weight must be non-negative");
      if (!(gbm.base_score > 0.0 && gbm.base_score < 1.0)) throw ArgumentError("gbm: base_score must lie in (0, 1)");
      if (gbm.objective != "binary:logistic") throw ArgumentError("gbm: unsupported objective " + gbm.objective);
      if (gbm.eval_metric != "error") throw ArgumentError("gbm: unsupported eval_metric " + gbm.eval_metric);
      break;
  }
}

void ClassifierConfig::set_param(std::string_view name, const nlohmann::json& value) {
  const bool found = with_active(*this, [&](auto& p) { return set_field(p, name, value); });
  if (!found) {
    throw ArgumentError("unknown " + std::string(to_string(kind)) + " parameter: " + std::string(name));
  }
}

nlohmann::json ClassifierConfig::params_json() const {
  return with_active(const_cast<ClassifierConfig&>(*this), [](auto& p) { return fields_json(p); });
}

nlohmann::json ClassifierConfig::to_json() const {
  return {{"kind", to_string(kind)}, {"params", params_json()}, {"seed", seed}};
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("model config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "kind" && key != "params" && key != "seed") throw ArgumentError("unknown model config key: " + key);
  }
  ClassifierConfig c;
  c.kind = model_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("params")) {
    for (const auto& [key, value] : j.at("params").items()) c.set_param(key, value);
  }
  c.validate();
  return c;
}

Model fit(const Matrix& x, std::span<const int> y, const ClassifierConfig& config) {
  config.validate();
  Model m;
  m.config = config;
  m.n_features = x.cols();
  switch (config.kind) {
    case ModelKind::kKnn: m.impl = knn_fit(x, y, config.knn); break;
    case ModelKind::kLogReg: m.impl = logreg_fit(x, y, config.logreg, &m.warnings); break;
    case ModelKind::kSvc: m.impl = svc_fit(x, y, config.svc); break;
    case ModelKind::kForest: m.impl = forest_fit(x, y, config.forest, config.seed); break;
    case ModelKind::kGbm: m.impl = gbm_fit(x, y, config.gbm); break;
  }
  return m;
}

std::vector<double> predict_margin(const Model& model, const Matrix& x) {
  detail::check_width(x, model.n_features, "predict");
  return std::visit(
      [&](const auto& impl) -> std::vector<double> {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, KnnModel>) return knn_predict_proba(impl, x);
        if constexpr (std::is_same_v<T, LogRegModel>) return logreg_margin(impl, x);
        if constexpr (std::is_same_v<T, SvmModel>) return svc_decision(impl, x);
        if constexpr (std::is_same_v<T, ForestModel>) return forest_predict_proba(impl, x);
        if constexpr (std::is_same_v<T, GbmModel>) return gbm_margin(impl, x);
      },
      model.impl);
}

std::vector<double> predict_proba(const Model& model, const Matrix& x) {
  std::vector<double> out = predict_margin(model, x);
  const bool link = model.config.kind == ModelKind::kLogReg || model.config.kind == ModelKind::kSvc ||
                    model.config.kind == ModelKind::kGbm;
  if (link) {
    for (double& v : out) v = sigmoid(v);
  }
  return out;
}

std::vector<int> predict(const Model& model, const Matrix& x) {
  const auto scores = predict_proba(model, x);
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= 0.5 ? 1 : 0;
  return out;
}

nlohmann::json to_json(const Model& model) {
  nlohmann::json state = std::visit(
      [](const auto& impl) -> nlohmann::json {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          return {{"x", matrix_json(impl.x)}, {"y", impl.y}};
        } else if constexpr (std::is_same_v<T, LogRegModel>) {
          return {{"intercept", impl.intercept},
                  {"coef", impl.coef},
                  {"std_error", nullable(impl.std_error)},
                  {"z", nullable(impl.z)},
                  {"p_value", nullable(impl.p_value)},
                  {"trace",
                   {{"loss", impl.trace.loss},
                    {"iterations", impl.trace.iterations},
                    {"gradient_norm", impl.trace.gradient_norm},
                    {"ridge", impl.trace.ridge},
                    {"converged", impl.trace.converged}}}};
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          return {{"support", matrix_json(impl.support)},
                  {"dual_coef", impl.dual_coef},
                  {"bias", impl.bias},
                  {"objective", impl.objective},
                  {"iterations", impl.iterations}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          return {{"tree_seeds", impl.tree_seeds}, {"trees", trees_json(impl.trees)}};
        } else {
          return {{"train_error", impl.train_error}, {"trees", trees_json(impl.trees)}};
        }
      },
      model.impl);
  return {{"format_version", kModelFormatVersion},
          {"kind", to_string(model.config.kind)},
          {"seed", model.config.seed},
          {"params", model.config.params_json()},
          {"n_features", model.n_features},
          {"warnings", model.warnings},
          {"state", std::move(state)}};
}

Model model_from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw ArgumentError("unsupported model format version " + std::to_string(version));
  }
  Model m;
  m.config = ClassifierConfig::from_json(
      {{"kind", j.at("kind")}, {"seed", j.at("seed")}, {"params", j.at("params")}});
  m.n_features = j.at("n_features").get<std::size_t>();
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  const auto& s = j.at("state");
  switch (m.config.kind) {
    case ModelKind::kKnn:
      m.impl = KnnModel{m.config.knn, matrix_from_json(s.at("x")), s.at("y").get<std::vector<int>>()};
      break;
    case ModelKind::kLogReg: {
      LogRegModel lr;
      lr.params = m.config.logreg;
      lr.intercept = s.at("intercept").get<double>();
      lr.coef = s.at("coef").get<std::vector<double>>();
      lr.std_error = from_nullable(s.at("std_error"));
      lr.z = from_nullable(s.at("z"));
      lr.p_value = from_nullable(s.at("p_value"));
      const auto& t = s.at("trace");
      lr.trace.loss = t.at("loss").get<std::vector<double>>();
      lr.trace.iterations = t.at("iterations").get<std::size_t>();
      lr.trace.gradient_norm = t.at("gradient_norm").get<double>();
      lr.trace.ridge = t.at("ridge").get<double>();
      lr.trace.converged = t.at("converged").get<bool>();
      m.impl = std::move(lr);
      break;
    }
    case ModelKind::kSvc: {
      SvmModel sv;
      sv.params = m.config.svc;
      sv.support = matrix_from_json(s.at("support"));
      sv.dual_coef = s.at("dual_coef").get<std::vector<double>>();
      sv.bias = s.at("bias").get<double>();
      sv.objective = s.at("objective").get<double>();
      sv.iterations = s.at("iterations").get<std::size_t>();
      m.impl = std::move(sv);
      break;
    }
    case ModelKind::kForest: {
      ForestModel f;
      f.params = m.config.forest;
      f.tree_seeds = s.at("tree_seeds").get<std::vector<std::uint64_t>>();
      f.trees = trees_from_json(s.at("trees"));
      m.impl = std::move(f);
      break;
    }
    case ModelKind::kGbm: {
      GbmModel g;
      g.params = m.config.gbm;
      g.train_error = s.at("train_error").get<std::vector<double>>();
      g.trees = trees_from_json(s.at("trees"));
      m.impl = std::move(g);
      break;
    }
  }
  return m;
}

}  // namespace crimepred
