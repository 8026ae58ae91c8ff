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

#include <cmath>
#include <span>
#include <string>

#include "crimepred/error.hpp"
#include "crimepred/matrix.hpp"

namespace crimepred::detail {

inline void check_training_data(const Matrix& x, std::span<const int> y, const std::string& who) {
  if (x.rows() != y.size()) throw ArgumentError(who + ": row/label count mismatch");
  if (x.rows() == 0 || x.cols() == 0) throw ArgumentError(who + ": empty training data");
  for (int v : y) {
    if (v != 0 && v != 1) throw ArgumentError(who + ": labels must be 0 or 1");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ArgumentError(who + ": training data has missing or non-finite values");
  }
}

inline void check_width(const Matrix& x, std::size_t expected, const std::string& who) {
  if (x.cols() != expected) {
    throw ArgumentError(who + ": expected " + std::to_string(expected) + " features, got " +
                        std::to_string(x.cols()));
  }
}

}  // namespace crimepred::detail
