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

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace crimepred::csv {

// Streaming reader for comma-delimited text with RFC 4180 quoting. Quoted
// fields may contain commas, doubled quotes and line breaks.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. `line()` is the 1-based physical
  // line the returned record started on.
  std::optional<std::vector<std::string>> next();
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

// Quotes a field only when it needs it.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Splits a whole document; convenience for small inputs and tests.
std::vector<std::vector<std::string>> parse(std::string_view text);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace crimepred::csv
