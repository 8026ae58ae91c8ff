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
#include <stdexcept>
#include <string>

namespace crimepred {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad ratio, n too large, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Input header does not match the expected column schema.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& column, const std::string& what)
      : Error(what), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

// A cell could not be parsed in strict mode. `row` is the 1-based data row.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& column, const std::string& what)
      : Error(what), row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// Statistic is mathematically undefined on the given input.
class UndefinedError : public Error {
 public:
  using Error::Error;
};

// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace crimepred
