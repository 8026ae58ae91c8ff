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

#include "crimepred/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "crimepred/csv.hpp"
#include "crimepred/error.hpp"

namespace crimepred {
namespace {

struct ClassTotals {
  std::uint64_t positive = 0;
  std::uint64_t negative = 0;
};

ClassTotals check_scored(std::span<const int> y, std::span<const double> scores) {
  if (y.size() != scores.size()) throw ArgumentError("roc: label/score length mismatch");
  ClassTotals t;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw ArgumentError("roc: labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw ArgumentError("roc: scores must be finite");
    (y[i] == 1 ? t.positive : t.negative) += 1;
  }
  if (t.positive == 0 || t.negative == 0) {
    throw UndefinedError("AUC is undefined when only one class is present");
  }
  return t;
}

nlohmann::json json_threshold(double t) {
  if (std::isinf(t)) return nullptr;
  return t;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ArgumentError("confusion: length mismatch (" + std::to_string(y_true.size()) + " vs " +
                        std::to_string(y_pred.size()) + ")");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw ArgumentError("confusion: values must be 0 or 1");
    if (t == 1) {
      (p == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (p == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm) {
  PrecisionRecallF1 r;
  const double tp = static_cast<double>(cm.tp);
  if (cm.tp + cm.fp == 0) {
    r.precision_undefined = true;
  } else {
    r.precision = tp / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    r.recall_undefined = true;
  } else {
    r.recall = tp / static_cast<double>(cm.tp + cm.fn);
  }
  if (r.precision + r.recall == 0.0) {
    r.f1_undefined = true;
  } else {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) return 0.0;
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

RocResult roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  const ClassTotals totals = check_scored(y_true, scores);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult out;
  const double P = static_cast<double>(totals.positive);
  const double N = static_cast<double>(totals.negative);
  out.curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0, fp = 0;
  // Twice the area in units of (1/P) x (1/N), kept integral.
  std::uint64_t twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::uint64_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      (y_true[order[i]] == 1 ? tp : fp) += 1;
    }
    twice_area += (fp - fp0) * (tp + tp0);
    out.curve.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P, s});
  }
  out.auc = static_cast<double>(twice_area) / (2.0 * P * N);
  return out;
}

double mann_whitney_auc(std::span<const int> y_true, std::span<const double> scores) {
  const ClassTotals totals = check_scored(y_true, scores);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum over positives of twice their average rank.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t a = 0; a < order.size();) {
    std::size_t b = a;
    while (b + 1 < order.size() && scores[order[b + 1]] == scores[order[a]]) ++b;
    const std::uint64_t twice_rank = (a + 1) + (b + 1);
    for (std::size_t i = a; i <= b; ++i) {
      if (y_true[order[i]] == 1) twice_rank_sum += twice_rank;
    }
    a = b + 1;
  }
  const std::uint64_t P = totals.positive, N = totals.negative;
  const std::uint64_t twice_u = twice_rank_sum - P * (P + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
}

EvalReport evaluate(std::span<const int> y_true, std::span<const double> scores, const EvalMetadata& metadata) {
  if (y_true.size() != scores.size()) throw ArgumentError("evaluate: label/score length mismatch");
  EvalReport rep;
  rep.metadata = metadata;
  rep.rows = y_true.size();
  std::vector<int> pred(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= 0.5 ? 1 : 0;
  rep.confusion = confusion(y_true, pred);
  rep.prf = precision_recall_f1(rep.confusion);
  rep.accuracy = accuracy(rep.confusion);
  try {
    RocResult roc = roc_auc(y_true, scores);
    rep.auc = roc.auc;
    rep.roc = std::move(roc.curve);
  } catch (const UndefinedError& e) {
    rep.auc_error = e.what();
  }
  return rep;
}

EvalReport evaluate(const Model& model, const Matrix& x_test, std::span<const int> y_test,
                    const EvalMetadata& metadata) {
  const auto scores = predict_proba(model, x_test);
  return evaluate(y_test, scores, metadata);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json roc_points = nlohmann::json::array();
  for (const auto& p : roc) roc_points.push_back({p.fpr, p.tpr, json_threshold(p.threshold)});
  nlohmann::json j = {
      {"algorithm", display_name(metadata.kind)},
      {"kind", to_string(metadata.kind)},
      {"features", metadata.features},
      {"techniques", metadata.techniques},
      {"sample_size", metadata.sample_size},
      {"rows", rows},
      {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp}, {"fn", confusion.fn}, {"tn", confusion.tn}}},
      {"precision", prf.precision},
      {"recall", prf.recall},
      {"f1", prf.f1},
      {"accuracy", accuracy},
      {"zero_division",
       {{"precision", prf.precision_undefined}, {"recall", prf.recall_undefined}, {"f1", prf.f1_undefined}}},
      {"auc_roc", auc ? nlohmann::json(*auc) : nlohmann::json(nullptr)},
      {"roc", std::move(roc_points)}};
  if (auc_error) j["auc_error"] = *auc_error;
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.metadata.kind = model_kind_from_string(j.at("kind").get<std::string>());
  r.metadata.features = j.at("features").get<std::vector<std::string>>();
  r.metadata.techniques = j.at("techniques").get<std::vector<std::string>>();
  r.metadata.sample_size = j.at("sample_size").get<std::size_t>();
  r.rows = j.at("rows").get<std::size_t>();
  const auto& c = j.at("confusion");
  r.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("fn").get<std::size_t>(),
                 c.at("tn").get<std::size_t>()};
  r.prf = precision_recall_f1(r.confusion);
  r.accuracy = j.at("accuracy").get<double>();
  if (!j.at("auc_roc").is_null()) r.auc = j.at("auc_roc").get<double>();
  if (j.contains("auc_error")) r.auc_error = j.at("auc_error").get<std::string>();
  for (const auto& p : j.at("roc")) {
    r.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                     p.at(2).is_null() ? std::numeric_limits<double>::infinity() : p.at(2).get<double>()});
  }
  return r;
}

std::string roc_csv(const std::vector<RocPoint>& curve) {
  std::ostringstream out;
  csv::write_row(out, {"fpr", "tpr", "threshold"});
  for (const auto& p : curve) {
    csv::write_row(out, {csv::format_double(p.fpr), csv::format_double(p.tpr),
                         std::isinf(p.threshold) ? "inf" : csv::format_double(p.threshold)});
  }
  return out.str();
}

std::string table1_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  csv::write_row(out, {"Algorithm", "Features", "Techniques", "SampleSize", "F1", "AUC"});
  for (const auto& r : reports) {
    csv::write_row(out, {std::string(display_name(r.metadata.kind)), join(r.metadata.features, "; "),
                         r.metadata.techniques.empty() ? "None" : join(r.metadata.techniques, "; "),
                         std::to_string(r.metadata.sample_size), fixed4(r.prf.f1),
                         r.auc ? fixed4(*r.auc) : "NA"});
  }
  return out.str();
}

}  // namespace crimepred
