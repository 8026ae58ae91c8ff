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

#include "crimepred/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "crimepred/csv.hpp"
#include "crimepred/error.hpp"

namespace crimepred {
namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 100000;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), modified Lentz.
double gamma_q_fraction(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("correlation: length mismatch");
  if (x.size() < 2) throw ArgumentError("correlation: need at least 2 observations");
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedError("correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ArgumentError("regularized gamma: need a > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ArgumentError("regularized gamma: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi_square_sf(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(dof / 2.0, statistic / 2.0);
}

ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& counts) {
  const std::size_t r = counts.size();
  if (r < 2) throw ArgumentError("chi-square: need at least 2 rows");
  const std::size_t c = counts[0].size();
  if (c < 2) throw ArgumentError("chi-square: need at least 2 columns");
  std::vector<double> row_sum(r, 0.0), col_sum(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (counts[i].size() != c) throw ArgumentError("chi-square: ragged table");
    for (std::size_t j = 0; j < c; ++j) {
      if (counts[i][j] < 0.0) throw ArgumentError("chi-square: negative count");
      row_sum[i] += counts[i][j];
      col_sum[j] += counts[i][j];
      total += counts[i][j];
    }
  }
  for (double s : row_sum) {
    if (s == 0.0) throw UndefinedError("chi-square: degenerate table (zero row margin)");
  }
  for (double s : col_sum) {
    if (s == 0.0) throw UndefinedError("chi-square: degenerate table (zero column margin)");
  }
  ChiSquareResult res;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double expected = row_sum[i] * col_sum[j] / total;
      const double diff = counts[i][j] - expected;
      res.statistic += diff * diff / expected;
    }
  }
  res.dof = static_cast<int>((r - 1) * (c - 1));
  res.p_value = chi_square_sf(res.statistic, res.dof);
  return res;
}

std::vector<std::vector<double>> contingency_table(std::span<const std::string> a,
                                                   std::span<const std::string> b) {
  if (a.size() != b.size()) throw ArgumentError("contingency_table: length mismatch");
  std::map<std::string, std::size_t> ia, ib;
  for (const auto& v : a) ia.emplace(v, 0);
  for (const auto& v : b) ib.emplace(v, 0);
  std::size_t k = 0;
  for (auto& [_, idx] : ia) idx = k++;
  k = 0;
  for (auto& [_, idx] : ib) idx = k++;
  std::vector<std::vector<double>> t(ia.size(), std::vector<double>(ib.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) t[ia[a[i]]][ib[b[i]]] += 1.0;
  return t;
}

nlohmann::json CorrelationReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pairs) {
    nlohmann::json e = {{"feature_a", p.feature_a}, {"feature_b", p.feature_b},
                        {"method", p.method}, {"statistic", p.statistic}};
    e["p_value"] = p.p_value ? nlohmann::json(*p.p_value) : nlohmann::json(nullptr);
    if (p.dof) e["dof"] = *p.dof;
    j.push_back(std::move(e));
  }
  return j;
}

std::string CorrelationReport::to_csv() const {
  std::ostringstream out;
  csv::write_row(out, {"feature_a", "feature_b", "method", "statistic", "p_value"});
  for (const auto& p : pairs) {
    csv::write_row(out, {p.feature_a, p.feature_b, p.method, nlohmann::json(p.statistic).dump(),
                         p.p_value ? nlohmann::json(*p.p_value).dump() : std::string()});
  }
  return out.str();
}

double VifReport::mean_finite() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : entries) {
    if (!e.infinite) {
      sum += e.value;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json VifReport::to_json() const {
  nlohmann::json j;
  j["features"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["features"].push_back({{"feature", e.feature},
                             {"r_squared", e.r_squared},
                             {"vif", e.infinite ? nlohmann::json(nullptr) : nlohmann::json(e.value)},
                             {"infinite", e.infinite}});
  }
  const double mean = mean_finite();
  j["mean_finite_vif"] = std::isnan(mean) ? nlohmann::json(nullptr) : nlohmann::json(mean);
  return j;
}

VifReport vif(const Matrix& x, const std::vector<std::string>& names) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (d < 2) throw ArgumentError("vif: need at least 2 features");
  if (n <= d) throw ArgumentError("vif: need more rows than features");
  if (names.size() != d) throw ArgumentError("vif: one name per column required");
  constexpr double kCollinear = 1e-10;

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
      x.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  VifReport report;
  for (std::size_t j = 0; j < d; ++j) {
    Eigen::MatrixXd design(n, d);
    design.col(0).setOnes();
    Eigen::Index col = 1;
    for (std::size_t t = 0; t < d; ++t) {
      if (t != j) design.col(col++) = xm.col(static_cast<Eigen::Index>(t));
    }
    const Eigen::VectorXd target = xm.col(static_cast<Eigen::Index>(j));
    const double mean = target.mean();
    const double sst = (target.array() - mean).square().sum();
    VifEntry e;
    e.feature = names[j];
    if (sst == 0.0) {
      e.r_squared = 1.0;
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
      const Eigen::VectorXd beta = qr.solve(target);
      const double ssr = (target - design * beta).squaredNorm();
      e.r_squared = std::clamp(1.0 - ssr / sst, 0.0, 1.0);
    }
    if (e.r_squared >= 1.0 - kCollinear) {
      e.infinite = true;
      e.value = std::numeric_limits<double>::infinity();
    } else {
      e.value = 1.0 / (1.0 - e.r_squared);
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::vector<FrequencyEntry> rank_frequencies(std::span<const std::optional<std::string>> column) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : column) {
    if (v) ++counts[*v];
  }
  std::vector<FrequencyEntry> out;
  out.reserve(counts.size());
  for (auto& [cat, n] : counts) out.push_back({cat, n});
  // The map is already lexicographic, so a stable sort keeps that tie order.
  std::stable_sort(out.begin(), out.end(),
                   [](const FrequencyEntry& a, const FrequencyEntry& b) { return a.count > b.count; });
  return out;
}

// ---------------------------------------------------------------------------

McaModel McaModel::fit(const std::vector<std::vector<std::string>>& columns,
                       std::size_t n_components) {
  const std::size_t q = columns.size();
  if (q < 2) throw ArgumentError("mca: need at least 2 categorical variables");
  const std::size_t n = columns[0].size();
  if (n == 0) throw ArgumentError("mca: no rows");
  for (const auto& c : columns) {
    if (c.size() != n) throw ArgumentError("mca: variables differ in length");
  }

  McaModel model;
  // Global category index per (variable, category).
  std::vector<std::map<std::string, std::size_t>> index(q);
  std::size_t j_total = 0;
  for (std::size_t v = 0; v < q; ++v) {
    for (const auto& cat : columns[v]) index[v].emplace(cat, 0);
    std::vector<std::string> cats;
    for (auto& [cat, idx] : index[v]) {
      idx = j_total++;
      cats.push_back(cat);
    }
    model.categories_.push_back(std::move(cats));
  }
  const std::size_t J = j_total;
  const double nd = static_cast<double>(n);
  const double qd = static_cast<double>(q);

  // Burt matrix Z'Z and column masses.
  Eigen::MatrixXd burt = Eigen::MatrixXd::Zero(J, J);
  std::vector<std::size_t> cat_of(q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t v = 0; v < q; ++v) cat_of[v] = index[v].at(columns[v][i]);
    for (std::size_t a = 0; a < q; ++a) {
      for (std::size_t b = 0; b < q; ++b) burt(cat_of[a], cat_of[b]) += 1.0;
    }
  }
  model.masses_.resize(J);
  for (std::size_t j = 0; j < J; ++j) model.masses_[j] = burt(j, j) / (nd * qd);

  // S'S where S = D_r^{-1/2} (P - r c') D_c^{-1/2}.
  Eigen::MatrixXd cross(J, J);
  for (std::size_t a = 0; a < J; ++a) {
    for (std::size_t b = 0; b < J; ++b) {
      const double ca = model.masses_[a], cb = model.masses_[b];
      cross(a, b) = (burt(a, b) / (nd * qd * qd) - ca * cb) / std::sqrt(ca * cb);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cross);
  if (eig.info() != Eigen::Success) throw ConvergenceError("mca: eigendecomposition failed");
  const Eigen::VectorXd values = eig.eigenvalues();
  const Eigen::MatrixXd vectors = eig.eigenvectors();

  // Descending order; drop the numerically-zero tail (includes the trivial
  // direction sqrt(c)).
  const double top = values.size() ? std::max(values(values.size() - 1), 0.0) : 0.0;
  const double tol = 1e-12 * std::max(1.0, top);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index t = values.size() - 1; t >= 0; --t) {
    if (values(t) > tol) kept.push_back(t);
  }
  model.rank_ = kept.size();
  for (auto t : kept) model.eigenvalues_.push_back(values(t));

  model.n_components_ = n_components;
  if (n_components > model.rank_) {
    model.warnings_.push_back("n_components " + std::to_string(n_components) + " exceeds rank " +
                              std::to_string(model.rank_) + "; clamped");
    model.n_components_ = model.rank_;
  }
  const std::size_t K = model.n_components_;
  model.standard_coords_ = Matrix(J, K);
  model.category_coords_ = Matrix(J, K);
  for (std::size_t k = 0; k < K; ++k) {
    Eigen::VectorXd v = vectors.col(kept[k]);
    // Deterministic sign: largest-magnitude entry positive.
    Eigen::Index arg = 0;
    for (Eigen::Index t = 1; t < v.size(); ++t) {
      if (std::fabs(v(t)) > std::fabs(v(arg)) + 1e-12) arg = t;
    }
    if (v(arg) < 0.0) v = -v;
    const double sigma = std::sqrt(model.eigenvalues_[k]);
    for (std::size_t j = 0; j < J; ++j) {
      model.standard_coords_(j, k) = v(static_cast<Eigen::Index>(j)) / std::sqrt(model.masses_[j]);
      model.category_coords_(j, k) = model.standard_coords_(j, k) * sigma;
    }
  }
  model.row_coords_ = model.transform(columns);
  return model;
}

Matrix McaModel::transform(const std::vector<std::vector<std::string>>& columns,
                           std::size_t* unseen) const {
  const std::size_t q = categories_.size();
  if (columns.size() != q) throw ArgumentError("mca transform: variable count mismatch");
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  Matrix out(n, n_components_);
  std::size_t missed = 0;
  std::size_t offset = 0;
  for (std::size_t v = 0; v < q; ++v) {
    const auto& cats = categories_[v];
    for (std::size_t i = 0; i < n; ++i) {
      auto it = std::lower_bound(cats.begin(), cats.end(), columns[v][i]);
      if (it == cats.end() || *it != columns[v][i]) {
        ++missed;
        continue;
      }
      const std::size_t j = offset + static_cast<std::size_t>(it - cats.begin());
      for (std::size_t k = 0; k < n_components_; ++k) {
        out(i, k) += standard_coords_(j, k) / static_cast<double>(q);
      }
    }
    offset += cats.size();
  }
  if (unseen) *unseen = missed;
  return out;
}

double McaModel::total_inertia() const {
  return std::accumulate(eigenvalues_.begin(), eigenvalues_.end(), 0.0);
}

std::size_t McaModel::total_categories() const {
  std::size_t j = 0;
  for (const auto& c : categories_) j += c.size();
  return j;
}

nlohmann::json McaModel::to_json() const {
  nlohmann::json j;
  j["variables"] = variables();
  j["total_categories"] = total_categories();
  j["eigenvalues"] = eigenvalues_;
  j["total_inertia"] = total_inertia();
  j["rank"] = rank_;
  j["n_components"] = n_components_;
  j["categories"] = categories_;
  j["warnings"] = warnings_;
  return j;
}

}  // namespace crimepred
