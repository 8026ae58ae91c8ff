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

#include "crimepred/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crimepred/error.hpp"

namespace crimepred {
namespace {

constexpr double kMinGiniGain = 1e-12;

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // compared across candidates
  double gain = 0.0;   // reported on the node
};

class Builder {
 public:
  Builder(const Matrix& x, const SortedColumns& sorted, std::span<const double> w,
          std::span<const double> first, std::span<const double> second, const TreeParams& params,
          Rng* rng)
      : x_(x), w_(w), a_(first), b_(second), params_(params), rng_(rng) {
    const std::size_t d = x.cols();
    order_.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      const auto& src = sorted.order(f);
      order_[f].reserve(src.size());
      for (std::uint32_t r : src) {
        if (w_[r] > 0.0) order_[f].push_back(r);
      }
    }
    goes_left_.assign(x.rows(), 0);
    buffer_.resize(order_.empty() ? 0 : order_[0].size());
    features_.resize(d);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  std::vector<TreeNode> build() {
    if (order_.empty() || order_[0].empty()) {
      return {TreeNode{}};
    }
    grow(0, order_[0].size(), 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    double W = 0.0, A = 0.0, B = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      const std::uint32_t r = order_[0][p];
      W += w_[r];
      A += w_[r] * a_[r];
      if (newton()) B += w_[r] * b_[r];
    }
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    TreeNode node;
    node.weight = newton() ? B : W;
    if (newton()) {
      node.value = -A / (B + params_.lambda);
    } else {
      node.value = A > W - A ? 1.0 : 0.0;
    }

    bool can_split = depth < params_.max_depth && W >= static_cast<double>(params_.min_samples_split);
    if (!newton() && (A <= 0.0 || A >= W)) can_split = false;  // pure
    if (!can_split) {
      nodes_[index] = node;
      return index;
    }

    const Candidate best = search(begin, end, W, A, B);
    if (best.feature < 0) {
      nodes_[index] = node;
      return index;
    }

    std::size_t n_left = 0;
    for (std::size_t p = begin; p < end; ++p) {
      const std::uint32_t r = order_[0][p];
      goes_left_[r] = x_(r, static_cast<std::size_t>(best.feature)) <= best.threshold;
      n_left += goes_left_[r];
    }
    for (auto& ord : order_) {
      auto out_left = buffer_.begin();
      auto out_right = buffer_.begin() + static_cast<long>(n_left);
      for (std::size_t p = begin; p < end; ++p) {
        const std::uint32_t r = ord[p];
        if (goes_left_[r]) {
          *out_left++ = r;
        } else {
          *out_right++ = r;
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<long>(end - begin),
                ord.begin() + static_cast<long>(begin));
    }

    node.feature = best.feature;
    node.threshold = best.threshold;
    node.gain = best.gain;
    node.left = grow(begin, begin + n_left, depth + 1);
    node.right = grow(begin + n_left, end, depth + 1);
    nodes_[index] = node;
    return index;
  }

  Candidate search(std::size_t begin, std::size_t end, double W, double A, double B) {
    std::size_t n_features = features_.size();
    if (params_.max_features > 0 && params_.max_features < features_.size()) {
      if (!rng_) throw ArgumentError("fit_tree: feature subsampling needs a random generator");
      for (std::size_t i = 0; i < params_.max_features; ++i) {
        const std::size_t j = i + rng_->uniform_index(features_.size() - i);
        std::swap(features_[i], features_[j]);
      }
      n_features = params_.max_features;
      std::sort(features_.begin(), features_.begin() + static_cast<long>(n_features));
    }

    Candidate best;
    best.score = newton() ? 0.0 : kMinGiniGain;
    const double parent_gini = newton() ? 0.0 : gini_impurity(A, W);
    const double parent_term = newton() ? A * A / (B + params_.lambda) : 0.0;

    for (std::size_t fi = 0; fi < n_features; ++fi) {
      const std::size_t f = features_[fi];
      const auto& ord = order_[f];
      double wl = 0.0, al = 0.0, bl = 0.0;
      for (std::size_t p = begin; p + 1 < end; ++p) {
        const std::uint32_t r = ord[p];
        wl += w_[r];
        al += w_[r] * a_[r];
        if (newton()) bl += w_[r] * b_[r];
        const double lo = x_(r, f);
        const double hi = x_(ord[p + 1], f);
        if (!(lo < hi)) continue;

        double score, gain;
        if (newton()) {
          const double hr = B - bl;
          if (bl < params_.min_child_weight || hr < params_.min_child_weight) continue;
          const double gr = A - al;
          gain = 0.5 * (al * al / (bl + params_.lambda) + gr * gr / (hr + params_.lambda) - parent_term);
          score = gain - params_.gamma;
        } else {
          const double wr = W - wl;
          gain = parent_gini - (wl / W) * gini_impurity(al, wl) - (wr / W) * gini_impurity(A - al, wr);
          score = gain;
        }
        if (score > best.score) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = Candidate{static_cast<int>(f), threshold, score, gain};
        }
      }
    }
    return best;
  }

  bool newton() const { return params_.criterion == SplitCriterion::kNewton; }

  const Matrix& x_;
  std::span<const double> w_, a_, b_;
  const TreeParams& params_;
  Rng* rng_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> buffer_;
  std::vector<std::size_t> features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

double gini_impurity(double positive_weight, double total_weight) {
  if (total_weight <= 0.0) return 0.0;
  const double p = positive_weight / total_weight;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

SortedColumns::SortedColumns(const Matrix& x) {
  if (x.rows() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("tree: too many rows");
  }
  order_.resize(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& ord = order_[f];
    ord.resize(x.rows());
    std::iota(ord.begin(), ord.end(), std::uint32_t{0});
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (std::isnan(x(r, f))) throw ArgumentError("tree: input contains missing values");
    }
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
  }
}

DecisionTree fit_tree(const Matrix& x, const SortedColumns& sorted, std::span<const double> weights,
                      std::span<const double> first, std::span<const double> second,
                      const TreeParams& params, Rng* rng) {
  if (weights.size() != x.rows() || first.size() != x.rows()) {
    throw ArgumentError("fit_tree: target length mismatch");
  }
  if (params.criterion == SplitCriterion::kNewton && second.size() != x.rows()) {
    throw ArgumentError("fit_tree: hessian length mismatch");
  }
  Builder builder(x, sorted, weights, first, second, params, rng);
  return DecisionTree(builder.build());
}

DecisionTree fit_tree(const Matrix& x, std::span<const double> first, std::span<const double> second,
                      const TreeParams& params, Rng* rng) {
  const SortedColumns sorted(x);
  const std::vector<double> ones(x.rows(), 1.0);
  return fit_tree(x, sorted, ones, first, second, params, rng);
}

double DecisionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) return 0.0;
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& n = nodes_[i];
    if (!n.is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(n.left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(n.right), d + 1);
    }
  }
  return deepest;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.value}, {"weight", n.weight}});
    } else {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"gain", n.gain},
                       {"value", n.value},
                       {"weight", n.weight}});
    }
  }
  return nodes;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& nj : j) {
    TreeNode n;
    if (nj.contains("leaf")) {
      n.value = nj.at("leaf").get<double>();
    } else {
      n.feature = nj.at("feature").get<int>();
      n.threshold = nj.at("threshold").get<double>();
      n.left = nj.at("left").get<int>();
      n.right = nj.at("right").get<int>();
      n.gain = nj.at("gain").get<double>();
      n.value = nj.at("value").get<double>();
    }
    n.weight = nj.at("weight").get<double>();
    nodes.push_back(n);
  }
  return DecisionTree(std::move(nodes));
}

}  // namespace crimepred
