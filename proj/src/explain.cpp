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

#include "crimepred/explain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "crimepred/csv.hpp"
#include "crimepred/error.hpp"
#include "crimepred/parallel.hpp"
#include "crimepred/rng.hpp"

namespace crimepred {
namespace {

constexpr std::size_t kMaxBatchRows = 1 << 16;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

std::uint64_t full_mask(std::size_t d) { return d >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1; }

}  // namespace

OutputSpace output_space_from_string(std::string_view s) {
  if (s == "probability") return OutputSpace::kProbability;
  if (s == "margin") return OutputSpace::kMargin;
  throw ArgumentError("unknown output space: " + std::string(s));
}

std::string_view to_string(OutputSpace space) {
  return space == OutputSpace::kProbability ? "probability" : "margin";
}

PredictFn make_predict_fn(const Model& model, OutputSpace space) {
  if (space == OutputSpace::kMargin) {
    return [&model](const Matrix& x) { return predict_margin(model, x); };
  }
  return [&model](const Matrix& x) { return predict_proba(model, x); };
}

std::vector<double> coalition_values(const PredictFn& f, std::span<const double> x, const Matrix& background,
                                     std::span<const std::uint64_t> masks) {
  const std::size_t d = x.size();
  const std::size_t B = background.rows();
  if (B == 0) throw ArgumentError("shap: background set is empty");
  if (background.cols() != d) throw ArgumentError("shap: background width does not match the instance");
  std::vector<double> values(masks.size());
  const std::size_t per_batch = std::max<std::size_t>(1, kMaxBatchRows / B);
  for (std::size_t start = 0; start < masks.size(); start += per_batch) {
    const std::size_t stop = std::min(masks.size(), start + per_batch);
    Matrix batch((stop - start) * B, d);
    for (std::size_t m = start; m < stop; ++m) {
      for (std::size_t b = 0; b < B; ++b) {
        auto out = batch.row((m - start) * B + b);
        const auto bg = background.row(b);
        for (std::size_t j = 0; j < d; ++j) out[j] = (masks[m] >> j) & 1 ? x[j] : bg[j];
      }
    }
    std::vector<double> pred;
    try {
      pred = f(batch);
    } catch (const std::exception& e) {
      throw Error("shap: model evaluation failed for coalitions " + std::to_string(start) + ".." +
                  std::to_string(stop - 1) + ": " + e.what());
    }
    if (pred.size() != batch.rows()) throw Error("shap: model returned the wrong number of outputs");
    for (std::size_t m = start; m < stop; ++m) {
      double sum = 0.0;
      for (std::size_t b = 0; b < B; ++b) sum += pred[(m - start) * B + b];
      values[m] = sum / static_cast<double>(B);
    }
  }
  return values;
}

ShapValues exact_shap(const PredictFn& f, std::span<const double> x, const Matrix& background) {
  const std::size_t d = x.size();
  if (d == 0) throw ArgumentError("exact_shap: no features");
  if (d > kExactShapMaxFeatures) {
    throw ArgumentError("exact_shap: " + std::to_string(d) + " features exceed the enumeration limit of " +
                        std::to_string(kExactShapMaxFeatures));
  }
  const std::uint64_t n_masks = std::uint64_t{1} << d;
  std::vector<std::uint64_t> masks(n_masks);
  std::iota(masks.begin(), masks.end(), std::uint64_t{0});
  const std::vector<double> v = coalition_values(f, x, background, masks);

  std::vector<double> weight(d);
  for (std::size_t s = 0; s < d; ++s) weight[s] = 1.0 / (static_cast<double>(d) * binomial(d - 1, s));

  ShapValues out;
  out.base_value = v[0];
  out.prediction = v[n_masks - 1];
  out.phi.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    double acc = 0.0;
    for (std::uint64_t S = 0; S < n_masks; ++S) {
      if (S & bit) continue;
      acc += weight[static_cast<std::size_t>(std::popcount(S))] * (v[S | bit] - v[S]);
    }
    out.phi[i] = acc;
  }
  return out;
}

ShapValues kernel_shap(const PredictFn& f, std::span<const double> x, const Matrix& background,
                       const KernelShapOptions& options) {
  const std::size_t d = x.size();
  if (d == 0) throw ArgumentError("kernel_shap: no features");
  if (d >= 64) throw ArgumentError("kernel_shap: at most 63 features are supported");
  const std::uint64_t all = full_mask(d);
  const std::size_t budget = options.n_coalitions > 0 ? options.n_coalitions : 2 * d + 2048;
  if (budget < d + 2 && d > options.full_enumeration_max_d) {
    throw ArgumentError("kernel_shap: n_coalitions must be at least d + 2");
  }

  std::vector<std::uint64_t> masks;
  std::vector<double> weights;
  const bool enumerate = d <= options.full_enumeration_max_d || (d < 40 && (std::uint64_t{1} << d) - 2 <= budget);
  if (enumerate) {
    for (std::uint64_t S = 1; S < all; ++S) {
      const auto s = static_cast<std::size_t>(std::popcount(S));
      masks.push_back(S);
      weights.push_back(static_cast<double>(d - 1) /
                        (binomial(d, s) * static_cast<double>(s) * static_cast<double>(d - s)));
    }
  } else {
    // Paired sampling with sizes drawn from the kernel's size marginal.
    std::vector<double> size_cdf(d, 0.0);
    for (std::size_t s = 1; s < d; ++s) {
      size_cdf[s] = size_cdf[s - 1] + static_cast<double>(d - 1) / (static_cast<double>(s) * static_cast<double>(d - s));
    }
    Rng rng(options.seed);
    std::map<std::uint64_t, double> counts;
    std::vector<std::size_t> features(d);
    for (std::size_t drawn = 0; drawn < budget; drawn += 2) {
      const double u = rng.uniform01() * size_cdf[d - 1];
      std::size_t s = 1;
      while (s < d - 1 && size_cdf[s] <= u) ++s;
      std::iota(features.begin(), features.end(), std::size_t{0});
      std::uint64_t S = 0;
      for (std::size_t k = 0; k < s; ++k) {
        const std::size_t j = k + rng.uniform_index(d - k);
        std::swap(features[k], features[j]);
        S |= std::uint64_t{1} << features[k];
      }
      counts[S] += 1.0;
      counts[all & ~S] += 1.0;
    }
    for (const auto& [S, c] : counts) {
      masks.push_back(S);
      weights.push_back(c);
    }
  }

  std::vector<std::uint64_t> ends = {0, all};
  const std::vector<double> v_ends = coalition_values(f, x, background, ends);
  ShapValues out;
  out.base_value = v_ends[0];
  out.prediction = v_ends[1];
  const double delta = out.prediction - out.base_value;
  if (d == 1) {
    out.phi = {delta};
    return out;
  }
  const std::vector<double> v = coalition_values(f, x, background, masks);

  // Minimise sum w (v_S - v_0 - z_S . phi)^2 subject to sum(phi) = delta.
  const auto D = static_cast<long>(d);
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(D + 1, D + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(D + 1);
  for (std::size_t m = 0; m < masks.size(); ++m) {
    const double target = v[m] - out.base_value;
    for (long a = 0; a < D; ++a) {
      if (!((masks[m] >> a) & 1)) continue;
      rhs[a] += weights[m] * target;
      for (long b = 0; b < D; ++b) {
        if ((masks[m] >> b) & 1) kkt(a, b) += weights[m];
      }
    }
  }
  for (long a = 0; a < D; ++a) {
    kkt(a, D) = 1.0;
    kkt(D, a) = 1.0;
  }
  rhs[D] = delta;
  const Eigen::VectorXd sol = kkt.colPivHouseholderQr().solve(rhs);
  out.phi.assign(sol.data(), sol.data() + d);
  // Remove solver round-off from the efficiency constraint.
  const double residual = delta - std::accumulate(out.phi.begin(), out.phi.end(), 0.0);
  for (double& p : out.phi) p += residual / static_cast<double>(d);
  return out;
}

Matrix sample_rows(const Matrix& x, std::size_t n, std::uint64_t seed) {
  if (n >= x.rows()) return x;
  Rng rng(seed);
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return x.select_rows(idx);
}

std::vector<ShapValues> explain_rows(const PredictFn& f, const Matrix& rows, const Matrix& background,
                                     ShapMethod method, const KernelShapOptions& options) {
  std::vector<ShapValues> out(rows.rows());
  parallel_for(rows.rows(), [&](std::size_t r) {
    if (method == ShapMethod::kExact) {
      out[r] = exact_shap(f, rows.row(r), background);
    } else {
      KernelShapOptions opts = options;
      opts.seed = derive_seed(options.seed, r);
      out[r] = kernel_shap(f, rows.row(r), background, opts);
    }
  });
  return out;
}

ShapSummary shap_summary(const std::vector<ShapValues>& values, const std::vector<std::string>& features) {
  if (values.empty()) throw ArgumentError("shap_summary: no explained instances");
  ShapSummary s;
  s.features = features;
  s.instances = values.size();
  s.mean_abs.assign(features.size(), 0.0);
  for (const auto& v : values) {
    if (v.phi.size() != features.size()) throw ArgumentError("shap_summary: attribution width mismatch");
    for (std::size_t j = 0; j < features.size(); ++j) s.mean_abs[j] += std::abs(v.phi[j]);
  }
  for (double& m : s.mean_abs) m /= static_cast<double>(values.size());
  s.ranking.resize(features.size());
  std::iota(s.ranking.begin(), s.ranking.end(), std::size_t{0});
  std::sort(s.ranking.begin(), s.ranking.end(), [&](std::size_t a, std::size_t b) {
    if (s.mean_abs[a] != s.mean_abs[b]) return s.mean_abs[a] > s.mean_abs[b];
    return features[a] < features[b];
  });
  return s;
}

nlohmann::json ShapSummary::to_json() const {
  nlohmann::json ranked = nlohmann::json::array();
  for (std::size_t j : ranking) ranked.push_back({{"feature", features[j]}, {"mean_abs_shap", mean_abs[j]}});
  return {{"instances", instances}, {"ranking", std::move(ranked)}};
}

ShapSummary ShapSummary::from_json(const nlohmann::json& j) {
  ShapSummary s;
  s.instances = j.at("instances").get<std::size_t>();
  for (const auto& e : j.at("ranking")) {
    s.ranking.push_back(s.features.size());
    s.features.push_back(e.at("feature").get<std::string>());
    s.mean_abs.push_back(e.at("mean_abs_shap").get<double>());
  }
  return s;
}

std::string phi_csv(const std::vector<ShapValues>& values, const std::vector<std::string>& features) {
  std::ostringstream out;
  std::vector<std::string> header = {"instance", "base_value", "prediction"};
  header.insert(header.end(), features.begin(), features.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<std::string> row = {std::to_string(i), csv::format_double(values[i].base_value),
                                    csv::format_double(values[i].prediction)};
    for (double p : values[i].phi) row.push_back(csv::format_double(p));
    csv::write_row(out, row);
  }
  return out.str();
}

std::string table2_csv(const std::vector<Table2Row>& rows) {
  std::ostringstream out;
  csv::write_row(out, {"Algorithm", "MostContributingFeature", "AverageShapleyValue"});
  for (const auto& r : rows) {
    char value[32];
    std::snprintf(value, sizeof(value), "%.4f", r.summary.top_value());
    csv::write_row(out, {std::string(display_name(r.kind)), r.summary.top_feature(), value});
  }
  return out.str();
}

}  // namespace crimepred
