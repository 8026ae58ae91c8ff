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

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>

#include "checks.hpp"
#include "crimepred/models.hpp"
#include "crimepred/parallel.hpp"

namespace crimepred {
namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel rows K(i, .).
class KernelCache {
 public:
  KernelCache(const Matrix& x, double gamma, std::size_t cache_mb) : x_(x), gamma_(gamma) {
    const std::size_t n = x.rows();
    const std::size_t bytes = cache_mb * (std::size_t{1} << 20);
    capacity_ = std::clamp<std::size_t>(bytes / (sizeof(double) * std::max<std::size_t>(n, 1)), 2, n);
    rows_.reserve(capacity_);
    slot_of_.assign(n, -1);
    where_.resize(n);
  }

  const std::vector<double>& row(std::size_t i) {
    if (slot_of_[i] >= 0) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return rows_[static_cast<std::size_t>(slot_of_[i])];
    }
    std::size_t slot;
    if (rows_.size() < capacity_) {
      slot = rows_.size();
      rows_.emplace_back(x_.rows());
    } else {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      slot = static_cast<std::size_t>(slot_of_[victim]);
      slot_of_[victim] = -1;
    }
    auto& out = rows_[slot];
    const auto xi = x_.row(i);
    for (std::size_t t = 0; t < x_.rows(); ++t) out[t] = rbf_kernel(xi, x_.row(t), gamma_);
    lru_.push_front(i);
    where_[i] = lru_.begin();
    slot_of_[i] = static_cast<long>(slot);
    return out;
  }

 private:
  const Matrix& x_;
  double gamma_;
  std::size_t capacity_ = 2;
  std::vector<std::vector<double>> rows_;
  std::vector<long> slot_of_;
  std::list<std::size_t> lru_;
  std::vector<std::list<std::size_t>::iterator> where_;
};

}  // namespace

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
  double d2 = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double diff = u[j] - v[j];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

SvmModel svc_fit(const Matrix& x, std::span<const int> labels, const SvcParams& params) {
  detail::check_training_data(x, labels, "svc_fit");
  if (params.kernel != "rbf") throw ArgumentError("svc: unsupported kernel " + params.kernel);
  if (!(params.c > 0.0) || !(params.gamma > 0.0) || !(params.tol > 0.0)) {
    throw ArgumentError("svc: C, gamma and tol must be positive");
  }
  const std::size_t n = x.rows();
  if (n > params.max_rows) {
    throw ArgumentError("svc: " + std::to_string(n) + " training rows exceed the max_rows guard of " +
                        std::to_string(params.max_rows));
  }
  std::vector<double> y(n);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    pos += labels[i] == 1;
  }
  if (pos == 0 || pos == n) throw ArgumentError("svc_fit: both classes must be present");

  const double C = params.c;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  KernelCache cache(x, params.gamma, params.cache_mb);
  auto is_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
  auto is_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

  const std::size_t max_iter = params.max_passes * std::max<std::size_t>(n, 100);
  std::size_t iter = 0;
  bool converged = false;
  double gap = 0.0;
  for (; iter < max_iter; ++iter) {
    // Second-order working set selection.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (is_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    const std::vector<double>* ki = i < n ? &cache.row(i) : nullptr;
    for (std::size_t t = 0; t < n; ++t) {
      if (!is_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * grad[t]);
      const double b = gmax + y[t] * grad[t];
      if (ki && b > 0.0) {
        double a = 2.0 - 2.0 * (*ki)[t];
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best) {
          best = obj;
          j = t;
        }
      }
    }
    gap = gmax + gmax2;
    if (gap < params.tol || j == n) {
      converged = true;
      break;
    }

    const std::vector<double>& Ki = *ki;
    const std::vector<double>& Kj = cache.row(j);
    const double kij = Ki[j];
    const double old_i = alpha[i], old_j = alpha[j];
    double quad = 2.0 - 2.0 * kij;
    if (quad <= 0.0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = (alpha[i] - old_i) * y[i];
    const double dj = (alpha[j] - old_j) * y[j];
    // Row i is most recently used, so fetching row j never evicts it.
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (Ki[t] * di + Kj[t] * dj);
  }

  if (!converged) {
    std::size_t violations = 0;
    double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (is_up(t)) gmax = std::max(gmax, -y[t] * grad[t]);
      if (is_low(t)) gmin = std::min(gmin, -y[t] * grad[t]);
    }
    for (std::size_t t = 0; t < n; ++t) {
      if ((is_up(t) && -y[t] * grad[t] > gmin + params.tol) || (is_low(t) && -y[t] * grad[t] < gmax - params.tol)) {
        ++violations;
      }
    }
    throw ConvergenceError("svc: SMO did not converge after " + std::to_string(iter) + " iterations; " +
                           std::to_string(violations) + " KKT violations remain (gap " +
                           std::to_string(gap) + ")");
  }

  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  SvmModel model;
  model.params = params;
  model.bias = -rho;
  model.iterations = iter;
  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
  model.objective = -0.5 * obj;
  model.support = Matrix(0, x.cols());
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support.append_row(x.row(t));
      model.dual_coef.push_back(alpha[t] * y[t]);
    }
  }
  return model;
}

std::vector<double> svc_decision(const SvmModel& model, const Matrix& x) {
  detail::check_width(x, model.support.cols(), "svc");
  std::vector<double> out(x.rows());
  parallel_for(x.rows(), [&](std::size_t r) {
    const auto q = x.row(r);
    double f = model.bias;
    for (std::size_t s = 0; s < model.dual_coef.size(); ++s) {
      f += model.dual_coef[s] * rbf_kernel(model.support.row(s), q, model.params.gamma);
    }
    out[r] = f;
  });
  return out;
}

}  // namespace crimepred
