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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "checks.hpp"
#include "crimepred/models.hpp"

namespace crimepred {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double linear(std::span<const double> row, std::span<const double> theta) {
  double z = theta[0];
  for (std::size_t j = 0; j < row.size(); ++j) z += theta[j + 1] * row[j];
  return z;
}

struct Newton {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Gradient and Hessian of the mean loss at theta.
Newton derivatives(const Matrix& x, std::span<const int> y, const Eigen::VectorXd& theta, double ridge) {
  const std::size_t p = x.cols() + 1;
  const double n = static_cast<double>(x.rows());
  Newton out{Eigen::VectorXd::Zero(static_cast<long>(p)),
             Eigen::MatrixXd::Zero(static_cast<long>(p), static_cast<long>(p))};
  std::vector<double> xt(p);
  xt[0] = 1.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    std::copy(row.begin(), row.end(), xt.begin() + 1);
    const double mu = sigmoid(linear(row, std::span<const double>(theta.data(), p)));
    const double r = mu - y[i];
    const double w = mu * (1.0 - mu);
    for (std::size_t a = 0; a < p; ++a) {
      out.gradient[static_cast<long>(a)] += r * xt[a];
      const double wa = w * xt[a];
      for (std::size_t b = 0; b <= a; ++b) out.hessian(static_cast<long>(a), static_cast<long>(b)) += wa * xt[b];
    }
  }
  out.gradient /= n;
  out.hessian /= n;
  out.hessian = out.hessian.selfadjointView<Eigen::Lower>();
  for (std::size_t a = 1; a < p; ++a) {
    out.gradient[static_cast<long>(a)] += ridge * theta[static_cast<long>(a)];
    out.hessian(static_cast<long>(a), static_cast<long>(a)) += ridge;
  }
  return out;
}

bool perfectly_separated(const Matrix& x, std::span<const int> y, const Eigen::VectorXd& theta) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double z = linear(x.row(i), std::span<const double>(theta.data(), theta.size()));
    if ((y[i] == 1) != (z > 0.0)) return false;
  }
  return true;
}

struct SeparationDetected {};

LogRegModel newton_fit(const Matrix& x, std::span<const int> y, const LogRegParams& params, double ridge,
                       bool detect_separation) {
  const std::size_t p = x.cols() + 1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<long>(p));
  auto loss_at = [&](const Eigen::VectorXd& t) {
    return logreg_loss(x, y, std::span<const double>(t.data(), p), ridge);
  };

  LogRegModel model;
  model.params = params;
  model.trace.ridge = ridge;
  double loss = loss_at(theta);
  model.trace.loss.push_back(loss);

  for (std::size_t iter = 0;; ++iter) {
    const Newton nd = derivatives(x, y, theta, ridge);
    model.trace.gradient_norm = nd.gradient.norm();
    if (model.trace.gradient_norm < params.tol) {
      model.trace.converged = true;
      break;
    }
    if (iter >= params.max_iter) break;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(nd.hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      if (detect_separation) throw SeparationDetected{};
      break;
    }
    const Eigen::VectorXd step = -ldlt.solve(nd.gradient);
    const double slope = nd.gradient.dot(step);
    double t = 1.0;
    Eigen::VectorXd candidate = theta + step;
    double next = loss_at(candidate);
    while (next > loss + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      candidate = theta + t * step;
      next = loss_at(candidate);
    }
    if (!(next <= loss)) {
      // No descent left at double precision.
      model.trace.converged = std::abs(slope) <= 1e-15 * std::max(1.0, std::abs(loss));
      break;
    }
    theta = candidate;
    loss = next;
    model.trace.loss.push_back(loss);
    model.trace.iterations = iter + 1;
    if (detect_separation &&
        (theta.cwiseAbs().maxCoeff() > 1e4 || (loss < 1e-6 && perfectly_separated(x, y, theta)))) {
      throw SeparationDetected{};
    }
  }

  if (!model.trace.converged) {
    std::ostringstream msg;
    msg << "logreg: no convergence after " << model.trace.iterations
        << " iterations (gradient norm " << model.trace.gradient_norm << ", loss " << loss
        << ", ridge " << ridge << ")";
    throw ConvergenceError(msg.str());
  }

  model.intercept = theta[0];
  model.coef.assign(theta.data() + 1, theta.data() + p);

  const Newton nd = derivatives(x, y, theta, ridge);
  const Eigen::MatrixXd info = nd.hessian * static_cast<double>(x.rows());
  const Eigen::MatrixXd cov =
      info.ldlt().solve(Eigen::MatrixXd::Identity(static_cast<long>(p), static_cast<long>(p)));
  model.std_error.resize(p);
  model.z.resize(p);
  model.p_value.resize(p);
  for (std::size_t a = 0; a < p; ++a) {
    const double var = cov(static_cast<long>(a), static_cast<long>(a));
    const double se = var > 0.0 ? std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
    model.std_error[a] = se;
    model.z[a] = theta[static_cast<long>(a)] / se;
    model.p_value[a] = std::isfinite(model.z[a]) ? std::erfc(std::abs(model.z[a]) / std::sqrt(2.0)) : 1.0;
  }
  return model;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logreg_loss(const Matrix& x, std::span<const int> y, std::span<const double> theta, double ridge) {
  if (theta.size() != x.cols() + 1) throw ArgumentError("logreg_loss: parameter length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double z = linear(x.row(i), theta);
    total += softplus(z) - y[i] * z;
  }
  double penalty = 0.0;
  for (std::size_t j = 1; j < theta.size(); ++j) penalty += theta[j] * theta[j];
  return total / static_cast<double>(x.rows()) + 0.5 * ridge * penalty;
}

std::vector<double> logreg_gradient(const Matrix& x, std::span<const int> y,
                                    std::span<const double> theta, double ridge) {
  if (theta.size() != x.cols() + 1) throw ArgumentError("logreg_gradient: parameter length mismatch");
  std::vector<double> g(theta.size(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double r = sigmoid(linear(row, theta)) - y[i];
    g[0] += r;
    for (std::size_t j = 0; j < row.size(); ++j) g[j + 1] += r * row[j];
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] /= static_cast<double>(x.rows());
    if (j > 0) g[j] += ridge * theta[j];
  }
  return g;
}

LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegParams& params,
                       std::vector<std::string>* warnings) {
  detail::check_training_data(x, y, "logreg_fit");
  std::size_t pos = 0;
  for (int v : y) pos += v == 1;
  if (pos < 2 || y.size() - pos < 2) throw ArgumentError("logreg_fit: need at least 2 rows of each class");
  if (params.ridge > 0.0) return newton_fit(x, y, params, params.ridge, false);
  try {
    return newton_fit(x, y, params, 0.0, true);
  } catch (const SeparationDetected&) {
    if (warnings) {
      warnings->push_back("logreg: separation detected, refitting with ridge " +
                          std::to_string(params.fallback_ridge));
    }
    return newton_fit(x, y, params, params.fallback_ridge, false);
  }
}

std::vector<double> logreg_margin(const LogRegModel& model, const Matrix& x) {
  detail::check_width(x, model.coef.size(), "logreg");
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double z = model.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) z += model.coef[j] * row[j];
    out[i] = z;
  }
  return out;
}

}  // namespace crimepred
