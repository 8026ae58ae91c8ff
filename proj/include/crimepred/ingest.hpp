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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crimepred {

// Wall-clock timestamp as it appears in the crime export
// ("MM/DD/YYYY hh:mm:ss AM/PM"). No time zone.
struct Timestamp {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;  // 0-23
  int minute = 0;
  int second = 0;

  auto operator<=>(const Timestamp&) const = default;
};

std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);

// One row of the 22-column export. Every field may be missing (nullopt).
struct CrimeRecord {
  std::optional<std::int64_t> id;
  std::optional<std::string> case_number;
  std::optional<Timestamp> date;
  std::optional<std::string> block;
  std::optional<std::string> iucr;
  std::optional<std::string> primary_type;
  std::optional<std::string> description;
  std::optional<std::string> location_description;
  std::optional<bool> arrest;
  std::optional<bool> domestic;
  std::optional<std::int64_t> beat;
  std::optional<std::int64_t> district;
  std::optional<std::int64_t> ward;
  std::optional<std::int64_t> community_area;
  std::optional<std::string> fbi_code;
  std::optional<double> x_coordinate;
  std::optional<double> y_coordinate;
  std::optional<std::int64_t> year;
  std::optional<Timestamp> updated_on;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<std::string> location;

  bool operator==(const CrimeRecord&) const = default;
};

enum class Weekday : std::uint8_t { kMonday, kTuesday, kWednesday, kThursday, kFriday, kSaturday, kSunday };

std::string_view weekday_name(Weekday day);
const std::array<std::string_view, 7>& weekday_names();

// Columns added when Date is replaced by calendar features.
struct TemporalFeatures {
  std::optional<int> week_number;  // ISO week, 1-53
  std::optional<int> month;        // 1-12
  std::optional<Weekday> weekday;
  std::optional<int> hour;  // 0-23

  bool operator==(const TemporalFeatures&) const = default;
};

// Source columns in published order, followed by derived calendar columns.
enum class Column : std::uint8_t {
  kId,
  kCaseNumber,
  kDate,
  kBlock,
  kIucr,
  kPrimaryType,
  kDescription,
  kLocationDescription,
  kArrest,
  kDomestic,
  kBeat,
  kDistrict,
  kWard,
  kCommunityArea,
  kFbiCode,
  kXCoordinate,
  kYCoordinate,
  kYear,
  kUpdatedOn,
  kLatitude,
  kLongitude,
  kLocation,
  kWeekNumber,
  kMonth,
  kWeekday,
  kHour,
};

inline constexpr std::size_t kSourceColumnCount = 22;

std::string_view column_name(Column column);
std::optional<Column> column_from_name(std::string_view name);
const std::vector<Column>& source_columns();

struct TableRow {
  std::size_t source_row = 0;  // 0-based data row in the source file; row identity
  CrimeRecord record;
  TemporalFeatures temporal;

  bool operator==(const TableRow&) const = default;
};

struct Provenance {
  std::string source;
  std::size_t row_count = 0;
  std::string loaded_at;         // UTC, ISO 8601
  std::size_t invalid_cells = 0;  // cells turned into missing marks in lenient mode
  std::size_t repaired_years = 0; // Year cells overwritten from Date
};

// Rows plus the set of active columns. Operations never modify a table in
// place; they return a new one.
struct RawTable {
  std::vector<TableRow> rows;
  std::vector<Column> columns = source_columns();
  Provenance provenance;

  std::size_t size() const { return rows.size(); }
  bool has_column(Column c) const;
};

struct SplitPair {
  RawTable train;
  RawTable test;
  double ratio = 0.8;
  std::uint64_t seed = 0;
};

// Cell as CSV text; missing cells are the empty string.
std::string format_cell(const TableRow& row, Column column);

// Missing-mark convention: empty, "NA", or whitespace only.
bool is_missing_mark(std::string_view cell);

RawTable load_csv(const std::filesystem::path& path, bool strict = false);
RawTable read_csv(std::istream& in, bool strict = false, std::string source = "<stream>");
void write_csv(const RawTable& table, const std::filesystem::path& path);
void write_csv(const RawTable& table, std::ostream& out);

RawTable shuffle(const RawTable& table, std::uint64_t seed);

// Row-level random split. |train| = floor(ratio * n).
SplitPair split(const RawTable& table, double ratio, std::uint64_t seed);

// Uniform subset of n rows without replacement; selected rows keep their
// relative order.
RawTable sample(const RawTable& table, std::size_t n, std::uint64_t seed);

std::size_t split_train_size(std::size_t n, double ratio);

}  // namespace crimepred
