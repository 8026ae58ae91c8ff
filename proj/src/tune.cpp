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

#include "crimepred/tune.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "crimepred/csv.hpp"
#include "crimepred/error.hpp"
#include "crimepred/metrics.hpp"
#include "crimepred/parallel.hpp"
#include "crimepred/rng.hpp"

namespace crimepred {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

void run_trial(Trial& trial, const FoldObjective& objective) {
  try {
    trial.fold_scores = objective(trial.params);
    if (trial.fold_scores.empty()) throw Error("objective returned no scores");
    double sum = 0.0;
    for (double s : trial.fold_scores) {
      if (std::isnan(s)) throw Error("objective returned NaN");
      sum += s;
    }
    trial.mean = sum / static_cast<double>(trial.fold_scores.size());
  } catch (const std::exception& e) {
    trial.failed = true;
    trial.error = e.what();
    trial.mean = kNegInf;
    trial.fold_scores.clear();
  }
}

// Ranks trials and picks the best; ties go to the earliest trial.
void finish(SearchResult& result) {
  std::vector<std::size_t> order(result.trials.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return result.trials[a].mean > result.trials[b].mean; });
  for (std::size_t r = 0; r < order.size(); ++r) result.trials[order[r]].rank = r + 1;
  if (order.empty() || result.trials[order.front()].failed) {
    std::string msg = "search: every trial failed";
    if (!result.trials.empty()) msg += " (first error: " + result.trials.front().error + ")";
    throw Error(msg);
  }
  result.best_trial = order.front();
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::vector<std::size_t> cv_split(std::span<const int> y, std::size_t folds, std::uint64_t seed) {
  const std::size_t n = y.size();
  if (folds < 2) throw ArgumentError("cv_split: need at least 2 folds");
  if (folds > n) throw ArgumentError("cv_split: more folds than rows");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] != 0 && y[i] != 1) throw ArgumentError("cv_split: labels must be 0 or 1");
    by_class[y[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (!by_class[c].empty() && by_class[c].size() < folds) {
      throw ArgumentError("cv_split: class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                          " rows, fewer than " + std::to_string(folds) + " folds");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> fold_of(n);
  std::size_t deal = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t i : members) fold_of[i] = deal++ % folds;
  }
  return fold_of;
}

void ParamGrid::validate() const {
  if (axes.empty()) throw ArgumentError("grid: no parameters");
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw ArgumentError("grid: parameter " + name + " has no values");
  }
}

std::size_t ParamGrid::size() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.second.size();
  return n;
}

std::vector<nlohmann::json> ParamGrid::candidates() const {
  validate();
  std::vector<nlohmann::json> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t t = 0; t < size(); ++t) {
    nlohmann::json p = nlohmann::json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) p[axes[a].first] = axes[a].second[idx[a]];
    out.push_back(std::move(p));
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
    }
  }
  return out;
}

ParamGrid ParamGrid::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("grid must be an object of value lists");
  ParamGrid g;
  for (const auto& [name, values] : j.items()) {
    if (!values.is_array()) throw ArgumentError("grid: values of " + name + " must be a list");
    g.axes.emplace_back(name, std::vector<nlohmann::json>(values.begin(), values.end()));
  }
  g.validate();
  return g;
}

nlohmann::json ParamDimension::decode(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  switch (type) {
    case Type::kReal: return lo + u * (hi - lo);
    case Type::kInteger: return static_cast<long long>(std::llround(lo + u * (hi - lo)));
    case Type::kChoice: {
      const auto k = std::min(choices.size() - 1, static_cast<std::size_t>(u * static_cast<double>(choices.size())));
      return choices[k];
    }
  }
  return nullptr;
}

void ParamSpace::validate() const {
  if (dims.empty()) throw ArgumentError("space: no parameters");
  for (const auto& d : dims) {
    if (d.type == ParamDimension::Type::kChoice) {
      if (d.choices.empty()) throw ArgumentError("space: parameter " + d.name + " has no choices");
    } else if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi)) {
      throw ArgumentError("space: parameter " + d.name + " needs finite bounds with lo < hi");
    }
  }
}

nlohmann::json ParamSpace::decode(std::span<const double> u) const {
  nlohmann::json p = nlohmann::json::object();
  for (std::size_t i = 0; i < dims.size(); ++i) p[dims[i].name] = dims[i].decode(u[i]);
  return p;
}

ParamSpace ParamSpace::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("space must be an object");
  ParamSpace s;
  for (const auto& [name, spec] : j.items()) {
    ParamDimension d;
    d.name = name;
    if (spec.is_object() && spec.contains("int")) {
      d.type = ParamDimension::Type::kInteger;
      d.lo = spec.at("int").at(0).get<double>();
      d.hi = spec.at("int").at(1).get<double>();
    } else if (spec.is_array() && spec.size() == 2 && spec[0].is_number() && spec[1].is_number()) {
      d.type = ParamDimension::Type::kReal;
      d.lo = spec[0].get<double>();
      d.hi = spec[1].get<double>();
    } else if (spec.is_array()) {
      d.type = ParamDimension::Type::kChoice;
      d.choices.assign(spec.begin(), spec.end());
    } else {
      throw ArgumentError("space: cannot interpret the entry for " + name);
    }
    s.dims.push_back(std::move(d));
  }
  s.validate();
  return s;
}

double halton(std::size_t index, std::size_t base) {
  double f = 1.0, r = 0.0;
  for (std::size_t i = index; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

SearchResult grid_search(const ParamGrid& grid, const FoldObjective& objective) {
  SearchResult result;
  result.method = "grid";
  const auto candidates = grid.candidates();
  result.trials.resize(candidates.size());
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    result.trials[t].index = t;
    result.trials[t].params = candidates[t];
  }
  parallel_for(result.trials.size(), [&](std::size_t t) { run_trial(result.trials[t], objective); });
  finish(result);
  return result;
}

SearchResult bayes_opt(const ParamSpace& space, const FoldObjective& objective, const BayesOptions& options) {
  space.validate();
  const std::size_t D = space.dims.size();
  if (D > std::size(kPrimes)) throw ArgumentError("bayes_opt: too many dimensions");
  if (options.n_initial == 0 || options.n_iter < options.n_initial) {
    throw ArgumentError("bayes_opt: n_iter must be at least the initial design size");
  }
  Rng rng(options.seed);
  SearchResult result;
  result.method = "bayes";

  std::vector<double> shift(D);
  for (double& s : shift) s = rng.uniform01();
  for (std::size_t t = 0; t < options.n_initial; ++t) {
    Trial trial;
    trial.index = t;
    for (std::size_t i = 0; i < D; ++i) trial.point.push_back(std::fmod(halton(t + 1, kPrimes[i]) + shift[i], 1.0));
    trial.params = space.decode(trial.point);
    result.trials.push_back(std::move(trial));
  }
  parallel_for(options.n_initial, [&](std::size_t t) { run_trial(result.trials[t], objective); });

  const double inv2l2 = 1.0 / (2.0 * options.length_scale * options.length_scale);
  auto kernel = [&](std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < D; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-d2 * inv2l2);
  };

  for (std::size_t t = options.n_initial; t < options.n_iter; ++t) {
    const std::size_t m = result.trials.size();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& tr : result.trials) {
      if (!tr.failed) worst = std::min(worst, tr.mean);
    }
    if (!std::isfinite(worst)) worst = 0.0;
    Eigen::VectorXd y(static_cast<long>(m));
    for (std::size_t i = 0; i < m; ++i) y[static_cast<long>(i)] = result.trials[i].failed ? worst : result.trials[i].mean;
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().mean());
    y = (y.array() - mean) / (sd > 0.0 ? sd : 1.0);

    Eigen::MatrixXd K(static_cast<long>(m), static_cast<long>(m));
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        K(static_cast<long>(a), static_cast<long>(b)) = kernel(result.trials[a].point, result.trials[b].point);
      }
    }
    double jitter = options.noise;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0; attempt < 8; ++attempt, jitter *= 10.0) {
      llt.compute(K + jitter * Eigen::MatrixXd::Identity(static_cast<long>(m), static_cast<long>(m)));
      if (llt.info() == Eigen::Success) break;
    }
    if (llt.info() != Eigen::Success) throw Error("bayes_opt: surrogate covariance is not positive definite");
    const Eigen::VectorXd alpha = llt.solve(y);
    const double best_y = y.maxCoeff();
    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (y[static_cast<long>(i)] > y[static_cast<long>(best_idx)]) best_idx = i;
    }

    std::vector<double> best_point;
    double best_ei = -1.0;
    std::vector<double> u(D);
    Eigen::VectorXd ks(static_cast<long>(m));
    for (std::size_t c = 0; c < options.n_candidates; ++c) {
      const bool local = c % 4 == 3;
      for (std::size_t i = 0; i < D; ++i) {
        u[i] = local ? std::clamp(result.trials[best_idx].point[i] + 0.05 * rng.normal(), 0.0, 1.0) : rng.uniform01();
      }
      for (std::size_t i = 0; i < m; ++i) ks[static_cast<long>(i)] = kernel(u, result.trials[i].point);
      const double mu = ks.dot(alpha);
      const Eigen::VectorXd v = llt.matrixL().solve(ks);
      const double sigma = std::sqrt(std::max(1e-12, 1.0 - v.squaredNorm()));
      const double z = (mu - best_y) / sigma;
      const double ei = (mu - best_y) * normal_cdf(z) + sigma * normal_pdf(z);
      if (ei > best_ei) {
        best_ei = ei;
        best_point = u;
      }
    }

    Trial trial;
    trial.index = t;
    trial.point = best_point;
    trial.params = space.decode(trial.point);
    run_trial(trial, objective);
    result.trials.push_back(std::move(trial));
  }
  finish(result);
  return result;
}

nlohmann::json SearchResult::to_json() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : trials) {
    nlohmann::json j = {{"trial", t.index},
                        {"params", t.params},
                        {"fold_scores", t.fold_scores},
                        {"mean", t.failed ? nlohmann::json(nullptr) : nlohmann::json(t.mean)},
                        {"rank", t.rank},
                        {"status", t.failed ? "failed" : "ok"}};
    if (t.failed) j["error"] = t.error;
    ts.push_back(std::move(j));
  }
  return {{"method", method},
          {"best_trial", best_trial},
          {"best_params", best().params},
          {"best_score", best().mean},
          {"trials", std::move(ts)}};
}

std::string SearchResult::ledger_csv() const {
  std::ostringstream out;
  csv::write_row(out, {"trial", "fold", "params", "score", "mean", "rank", "status"});
  for (const auto& t : trials) {
    const std::string params = t.params.dump();
    const std::string mean = t.failed ? "-inf" : csv::format_double(t.mean);
    if (t.failed) {
      csv::write_row(out, {std::to_string(t.index), "", params, "", mean, std::to_string(t.rank), "failed"});
      continue;
    }
    for (std::size_t f = 0; f < t.fold_scores.size(); ++f) {
      csv::write_row(out, {std::to_string(t.index), std::to_string(f), params, csv::format_double(t.fold_scores[f]),
                           mean, std::to_string(t.rank), "ok"});
    }
  }
  return out.str();
}

std::vector<double> cross_validate(const CvSetup& setup, const nlohmann::json& params) {
  if (!setup.x || setup.x->rows() != setup.y.size() || setup.fold_of.size() != setup.y.size()) {
    throw ArgumentError("cross_validate: inconsistent inputs");
  }
  ClassifierConfig config = setup.base;
  for (const auto& [name, value] : params.items()) config.set_param(name, value);
  config.validate();

  std::vector<double> scores(setup.folds);
  for (std::size_t f = 0; f < setup.folds; ++f) {
    std::vector<std::size_t> train_idx, valid_idx;
    for (std::size_t i = 0; i < setup.y.size(); ++i) (setup.fold_of[i] == f ? valid_idx : train_idx).push_back(i);
    LabeledData train{setup.x->select_rows(train_idx), {}, SplitRole::kTrain};
    for (std::size_t i : train_idx) train.y.push_back(setup.y[i]);
    if (setup.resample) {
      ResamplePlan plan = *setup.resample;
      plan.seed = derive_seed(plan.seed, f);
      ResampleResult balanced = balance(train, plan);
      train.x = std::move(balanced.x);
      train.y = std::move(balanced.y);
    }
    const Model model = fit(train.x, train.y, config);
    const Matrix valid = setup.x->select_rows(valid_idx);
    std::vector<int> truth;
    for (std::size_t i : valid_idx) truth.push_back(setup.y[i]);
    scores[f] = precision_recall_f1(confusion(truth, predict(model, valid))).f1;
  }
  return scores;
}

FoldObjective cv_objective(const CvSetup& setup) {
  return [&setup](const nlohmann::json& params) { return cross_validate(setup, params); };
}

}  // namespace crimepred
