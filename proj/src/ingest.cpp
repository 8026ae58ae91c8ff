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

#include "crimepred/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <span>
#include <sstream>

#include "crimepred/csv.hpp"
#include "crimepred/error.hpp"
#include "crimepred/rng.hpp"

namespace crimepred {
namespace {

constexpr std::array<std::string_view, 26> kColumnNames = {
    "ID",          "Case Number",    "Date",           "Block",         "IUCR",
    "Primary Type", "Description",   "Location Description", "Arrest", "Domestic",
    "Beat",        "District",       "Ward",           "Community Area", "FBI Code",
    "X Coordinate", "Y Coordinate",  "Year",           "Updated On",    "Latitude",
    "Longitude",   "Location",       "Week Number",    "Month",         "Weekday",
    "Hour"};

constexpr std::array<std::string_view, 7> kWeekdayNames = {
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t v = 0;
  if (parse_number(s, v)) return v;
  // Some exports write integral columns as "12.0".
  double d = 0;
  if (parse_number(s, d) && std::isfinite(d) && d == std::floor(d) &&
      std::fabs(d) < 9.0e15) {
    return static_cast<std::int64_t>(d);
  }
  return std::nullopt;
}

std::optional<double> parse_real(std::string_view s) {
  double d = 0;
  if (parse_number(s, d) && std::isfinite(d)) return d;
  return std::nullopt;
}

std::optional<bool> parse_bool(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "true" || lower == "1") return true;
  if (lower == "false" || lower == "0") return false;
  return std::nullopt;
}

std::string format_real(double v) { return csv::format_double(v); }

// Parses `text` into the field for `column`. Returns false when the text is
// not a valid value; missing marks are handled by the caller.
bool assign_cell(CrimeRecord& r, Column column, std::string_view text) {
  auto set_string = [&](std::optional<std::string>& field) {
    field = std::string(text);
    return true;
  };
  auto set_int = [&](std::optional<std::int64_t>& field) {
    field = parse_integer(text);
    return field.has_value();
  };
  auto set_real = [&](std::optional<double>& field) {
    field = parse_real(text);
    return field.has_value();
  };
  auto set_bool = [&](std::optional<bool>& field) {
    field = parse_bool(text);
    return field.has_value();
  };
  auto set_time = [&](std::optional<Timestamp>& field) {
    field = parse_timestamp(text);
    return field.has_value();
  };
  switch (column) {
    case Column::kId: return set_int(r.id);
    case Column::kCaseNumber: return set_string(r.case_number);
    case Column::kDate: return set_time(r.date);
    case Column::kBlock: return set_string(r.block);
    case Column::kIucr: return set_string(r.iucr);
    case Column::kPrimaryType: return set_string(r.primary_type);
    case Column::kDescription: return set_string(r.description);
    case Column::kLocationDescription: return set_string(r.location_description);
    case Column::kArrest: return set_bool(r.arrest);
    case Column::kDomestic: return set_bool(r.domestic);
    case Column::kBeat: return set_int(r.beat);
    case Column::kDistrict: return set_int(r.district);
    case Column::kWard: return set_int(r.ward);
    case Column::kCommunityArea: return set_int(r.community_area);
    case Column::kFbiCode: return set_string(r.fbi_code);
    case Column::kXCoordinate: return set_real(r.x_coordinate);
    case Column::kYCoordinate: return set_real(r.y_coordinate);
    case Column::kYear: return set_int(r.year);
    case Column::kUpdatedOn: return set_time(r.updated_on);
    case Column::kLatitude: return set_real(r.latitude);
    case Column::kLongitude: return set_real(r.longitude);
    case Column::kLocation: return set_string(r.location);
    default: return false;
  }
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RawTable with_rows(const RawTable& like, std::vector<TableRow> rows) {
  RawTable out;
  out.columns = like.columns;
  out.provenance = like.provenance;
  out.provenance.row_count = rows.size();
  out.rows = std::move(rows);
  return out;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  // MM/DD/YYYY hh:mm:ss AM
  if (text.size() != 22) return std::nullopt;
  auto two = [&](std::size_t pos, int& out) {
    return std::isdigit(static_cast<unsigned char>(text[pos])) &&
           std::isdigit(static_cast<unsigned char>(text[pos + 1])) &&
           parse_number(text.substr(pos, 2), out);
  };
  Timestamp ts;
  int hour12 = 0;
  if (!two(0, ts.month) || text[2] != '/' || !two(3, ts.day) || text[5] != '/' ||
      !parse_number(text.substr(6, 4), ts.year) || text[10] != ' ' || !two(11, hour12) ||
      text[13] != ':' || !two(14, ts.minute) || text[16] != ':' || !two(17, ts.second) ||
      text[19] != ' ') {
    return std::nullopt;
  }
  const std::string_view meridiem = text.substr(20, 2);
  if (meridiem != "AM" && meridiem != "PM") return std::nullopt;
  if (ts.month < 1 || ts.month > 12 || ts.day < 1 || ts.day > days_in_month(ts.year, ts.month) ||
      hour12 < 1 || hour12 > 12 || ts.minute > 59 || ts.second > 59) {
    return std::nullopt;
  }
  ts.hour = hour12 % 12 + (meridiem == "PM" ? 12 : 0);
  return ts;
}

std::string format_timestamp(const Timestamp& ts) {
  int hour12 = ts.hour % 12;
  if (hour12 == 0) hour12 = 12;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d %02d:%02d:%02d %s", ts.month, ts.day, ts.year,
                hour12, ts.minute, ts.second, ts.hour < 12 ? "AM" : "PM");
  return buf;
}

std::string_view weekday_name(Weekday day) { return kWeekdayNames[static_cast<int>(day)]; }
const std::array<std::string_view, 7>& weekday_names() { return kWeekdayNames; }

std::string_view column_name(Column column) { return kColumnNames[static_cast<int>(column)]; }

std::optional<Column> column_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kColumnNames.size(); ++i) {
    if (kColumnNames[i] == name) return static_cast<Column>(i);
  }
  return std::nullopt;
}

const std::vector<Column>& source_columns() {
  static const std::vector<Column> kColumns = [] {
    std::vector<Column> cols;
    for (std::size_t i = 0; i < kSourceColumnCount; ++i) cols.push_back(static_cast<Column>(i));
    return cols;
  }();
  return kColumns;
}

bool RawTable::has_column(Column c) const {
  return std::find(columns.begin(), columns.end(), c) != columns.end();
}

bool is_missing_mark(std::string_view cell) {
  const auto t = trim(cell);
  return t.empty() || t == "NA";
}

std::string format_cell(const TableRow& row, Column column) {
  const CrimeRecord& r = row.record;
  auto str = [](const std::optional<std::string>& v) { return v ? *v : std::string(); };
  auto num = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  auto real = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  auto boolean = [](const std::optional<bool>& v) {
    return v ? std::string(*v ? "true" : "false") : std::string();
  };
  auto time = [](const std::optional<Timestamp>& v) { return v ? format_timestamp(*v) : std::string(); };
  auto small = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  switch (column) {
    case Column::kId: return num(r.id);
    case Column::kCaseNumber: return str(r.case_number);
    case Column::kDate: return time(r.date);
    case Column::kBlock: return str(r.block);
    case Column::kIucr: return str(r.iucr);
    case Column::kPrimaryType: return str(r.primary_type);
    case Column::kDescription: return str(r.description);
    case Column::kLocationDescription: return str(r.location_description);
    case Column::kArrest: return boolean(r.arrest);
    case Column::kDomestic: return boolean(r.domestic);
    case Column::kBeat: return num(r.beat);
    case Column::kDistrict: return num(r.district);
    case Column::kWard: return num(r.ward);
    case Column::kCommunityArea: return num(r.community_area);
    case Column::kFbiCode: return str(r.fbi_code);
    case Column::kXCoordinate: return real(r.x_coordinate);
    case Column::kYCoordinate: return real(r.y_coordinate);
    case Column::kYear: return num(r.year);
    case Column::kUpdatedOn: return time(r.updated_on);
    case Column::kLatitude: return real(r.latitude);
    case Column::kLongitude: return real(r.longitude);
    case Column::kLocation: return str(r.location);
    case Column::kWeekNumber: return small(row.temporal.week_number);
    case Column::kMonth: return small(row.temporal.month);
    case Column::kWeekday:
      return row.temporal.weekday ? std::string(weekday_name(*row.temporal.weekday)) : std::string();
    case Column::kHour: return small(row.temporal.hour);
  }
  return {};
}

RawTable read_csv(std::istream& in, bool strict, std::string source) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw SchemaError("", "input has no header row");

  // Position of each schema column in the file.
  std::array<std::size_t, kSourceColumnCount> position{};
  for (std::size_t i = 0; i < kSourceColumnCount; ++i) {
    const auto name = kColumnNames[i];
    auto it = std::find_if(header->begin(), header->end(),
                           [&](const std::string& h) { return trim(h) == name; });
    if (it == header->end()) {
      throw SchemaError(std::string(name), "missing required column \"" + std::string(name) + "\"");
    }
    position[i] = static_cast<std::size_t>(it - header->begin());
  }

  RawTable table;
  table.provenance.source = std::move(source);
  table.provenance.loaded_at = now_utc();
  std::size_t data_row = 0;
  while (auto fields = reader.next()) {
    if (fields->size() == 1 && trim((*fields)[0]).empty()) continue;  // blank line
    ++data_row;
    if (fields->size() != header->size()) {
      if (strict) {
        throw ParseError(data_row, "", "row " + std::to_string(data_row) + " has " +
                                           std::to_string(fields->size()) + " fields, expected " +
                                           std::to_string(header->size()));
      }
      fields->resize(header->size());
    }
    TableRow row;
    row.source_row = data_row - 1;
    for (std::size_t i = 0; i < kSourceColumnCount; ++i) {
      const std::string& cell = (*fields)[position[i]];
      if (is_missing_mark(cell)) continue;
      if (!assign_cell(row.record, static_cast<Column>(i), cell)) {
        if (strict) {
          throw ParseError(data_row, std::string(kColumnNames[i]),
                           "row " + std::to_string(data_row) + ", column \"" +
                               std::string(kColumnNames[i]) + "\": cannot parse \"" + cell + "\"");
        }
        ++table.provenance.invalid_cells;
      }
    }
    auto& rec = row.record;
    if (rec.date && rec.year && *rec.year != rec.date->year) {
      if (strict) {
        throw ParseError(data_row, "Year",
                         "row " + std::to_string(data_row) + ": Year disagrees with Date");
      }
      rec.year = rec.date->year;
      ++table.provenance.repaired_years;
    }
    table.rows.push_back(std::move(row));
  }
  table.provenance.row_count = table.rows.size();
  return table;
}

RawTable load_csv(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  return read_csv(in, strict, path.string());
}

void write_csv(const RawTable& table, std::ostream& out) {
  std::vector<std::string> fields;
  for (Column c : table.columns) fields.emplace_back(column_name(c));
  csv::write_row(out, fields);
  for (const auto& row : table.rows) {
    fields.clear();
    for (Column c : table.columns) fields.push_back(format_cell(row, c));
    csv::write_row(out, fields);
  }
}

void write_csv(const RawTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  write_csv(table, out);
}

RawTable shuffle(const RawTable& table, std::uint64_t seed) {
  Rng rng(seed);
  const auto order = rng.permutation(table.size());
  std::vector<TableRow> rows;
  rows.reserve(order.size());
  for (std::size_t i : order) rows.push_back(table.rows[i]);
  return with_rows(table, std::move(rows));
}

std::size_t split_train_size(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ArgumentError("split ratio must lie in (0, 1), got " + format_real(ratio));
  }
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
}

SplitPair split(const RawTable& table, double ratio, std::uint64_t seed) {
  const std::size_t n_train = split_train_size(table.size(), ratio);
  Rng rng(seed);
  const auto order = rng.permutation(table.size());
  std::vector<TableRow> train, test;
  train.reserve(n_train);
  test.reserve(table.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : test).push_back(table.rows[order[i]]);
  }
  return SplitPair{with_rows(table, std::move(train)), with_rows(table, std::move(test)), ratio, seed};
}

RawTable sample(const RawTable& table, std::size_t n, std::uint64_t seed) {
  if (n > table.size()) {
    throw ArgumentError("sample size " + std::to_string(n) + " exceeds row count " +
                        std::to_string(table.size()));
  }
  Rng rng(seed);
  // Partial Fisher-Yates over indices, then restore source order.
  std::vector<std::size_t> idx(table.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.uniform_index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<TableRow> rows;
  rows.reserve(n);
  for (std::size_t i : idx) rows.push_back(table.rows[i]);
  return with_rows(table, std::move(rows));
}

}  // namespace crimepred
