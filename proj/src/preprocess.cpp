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

#include "crimepred/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "crimepred/error.hpp"
#include "crimepred/parallel.hpp"

namespace crimepred {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Days since 1970-01-01 in the proleptic Gregorian calendar.
long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

int year_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return static_cast<int>(y + (m <= 2));
}

// Monday = 0.
int weekday_index(long days) {
  const long wd = (days + 3) % 7;  // 1970-01-01 was a Thursday
  return static_cast<int>(wd < 0 ? wd + 7 : wd);
}

std::string upper_trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

template <typename T>
std::optional<double> as_number(const std::optional<T>& v) {
  if (!v) return std::nullopt;
  return static_cast<double>(*v);
}

template <typename T>
std::optional<std::string> as_label(const std::optional<T>& v) {
  if (!v) return std::nullopt;
  if constexpr (std::is_same_v<T, std::string>) {
    return *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    return std::string(*v ? "1" : "0");
  } else {
    return std::to_string(*v);
  }
}

std::vector<double> to_column(const std::vector<std::optional<double>>& values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] ? *values[i] : kNaN;
  return out;
}

bool wants_scaling(const FeatureSpec& spec, ScaleMode mode) {
  if (spec.transform == Transform::kStandardize) return true;
  if (mode != ScaleMode::kAllNonBinary) return false;
  return spec.kind != FeatureKind::kBinary && spec.transform != Transform::kOneHot;
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kNumeric: return "numeric";
    case FeatureKind::kNominal: return "nominal";
    case FeatureKind::kOrdinal: return "ordinal";
    case FeatureKind::kBinary: return "binary";
  }
  return "numeric";
}

std::string_view to_string(Transform transform) {
  switch (transform) {
    case Transform::kNone: return "none";
    case Transform::kLabelEncode: return "label_encode";
    case Transform::kOneHot: return "one_hot";
    case Transform::kStandardize: return "standardize";
  }
  return "none";
}

FeatureKind feature_kind_from_string(std::string_view s) {
  if (s == "numeric") return FeatureKind::kNumeric;
  if (s == "nominal") return FeatureKind::kNominal;
  if (s == "ordinal") return FeatureKind::kOrdinal;
  if (s == "binary") return FeatureKind::kBinary;
  throw ArgumentError("unknown feature kind \"" + std::string(s) + "\"");
}

Transform transform_from_string(std::string_view s) {
  if (s == "none") return Transform::kNone;
  if (s == "label_encode") return Transform::kLabelEncode;
  if (s == "one_hot") return Transform::kOneHot;
  if (s == "standardize") return Transform::kStandardize;
  throw ArgumentError("unknown transform \"" + std::string(s) + "\"");
}

ScaleMode scale_mode_from_string(std::string_view s) {
  if (s == "none") return ScaleMode::kNone;
  if (s == "numeric") return ScaleMode::kNumeric;
  if (s == "all_non_binary") return ScaleMode::kAllNonBinary;
  throw ArgumentError("unknown scale mode \"" + std::string(s) + "\"");
}

std::string_view to_string(ScaleMode mode) {
  switch (mode) {
    case ScaleMode::kNone: return "none";
    case ScaleMode::kNumeric: return "numeric";
    case ScaleMode::kAllNonBinary: return "all_non_binary";
  }
  return "none";
}

void FeatureSpec::validate() const {
  const bool categorical = kind == FeatureKind::kNominal || kind == FeatureKind::kOrdinal;
  if (transform == Transform::kStandardize && kind != FeatureKind::kNumeric) {
    throw ArgumentError("feature \"" + name + "\": standardize requires a numeric feature");
  }
  if ((transform == Transform::kLabelEncode || transform == Transform::kOneHot) && !categorical) {
    throw ArgumentError("feature \"" + name + "\": " + std::string(to_string(transform)) +
                        " requires a nominal or ordinal feature");
  }
}

FeatureKind default_feature_kind(std::string_view name) {
  static const std::map<std::string, FeatureKind, std::less<>> kKinds = {
      {"X Coordinate", FeatureKind::kNumeric},   {"Y Coordinate", FeatureKind::kNumeric},
      {"Latitude", FeatureKind::kNumeric},       {"Longitude", FeatureKind::kNumeric},
      {"Year", FeatureKind::kNumeric},           {"ID", FeatureKind::kNumeric},
      {"Beat", FeatureKind::kNominal},           {"District", FeatureKind::kNominal},
      {"Ward", FeatureKind::kNominal},           {"Community Area", FeatureKind::kNominal},
      {"Block", FeatureKind::kNominal},          {"Location Description", FeatureKind::kNominal},
      {"Weekday", FeatureKind::kNominal},        {"Primary Type", FeatureKind::kNominal},
      {"IUCR", FeatureKind::kNominal},           {"FBI Code", FeatureKind::kNominal},
      {"Description", FeatureKind::kNominal},    {"Case Number", FeatureKind::kNominal},
      {"Location", FeatureKind::kNominal},       {"Month", FeatureKind::kOrdinal},
      {"Hour", FeatureKind::kOrdinal},           {"Week Number", FeatureKind::kOrdinal},
      {"Domestic", FeatureKind::kBinary},        {"Arrest", FeatureKind::kBinary},
      {"Is_AV", FeatureKind::kBinary},           {"Is_DR", FeatureKind::kBinary},
      {"Is_ST", FeatureKind::kBinary},           {"Is_TR", FeatureKind::kBinary},
  };
  auto it = kKinds.find(name);
  if (it == kKinds.end()) throw ArgumentError("unknown feature \"" + std::string(name) + "\"");
  return it->second;
}

FeatureSpec default_feature_spec(std::string_view name, bool scaled) {
  FeatureSpec spec{std::string(name), default_feature_kind(name), Transform::kNone};
  switch (spec.kind) {
    case FeatureKind::kNumeric:
      spec.transform = scaled ? Transform::kStandardize : Transform::kNone;
      break;
    case FeatureKind::kNominal: spec.transform = Transform::kLabelEncode; break;
    case FeatureKind::kOrdinal:
    case FeatureKind::kBinary: spec.transform = Transform::kNone; break;
  }
  return spec;
}

// ---------------------------------------------------------------------------

const std::vector<Column>& leakage_columns() {
  static const std::vector<Column> kLeakage = {
      Column::kId,        Column::kCaseNumber,  Column::kFbiCode,  Column::kIucr,
      Column::kArrest,    Column::kUpdatedOn,   Column::kDescription, Column::kLocation,
      Column::kLatitude,  Column::kLongitude};
  return kLeakage;
}

RawTable drop_leakage_features(const RawTable& table, std::span<const Column> keep) {
  RawTable out = table;
  const auto& leak = leakage_columns();
  std::erase_if(out.columns, [&](Column c) {
    const bool leaky = std::find(leak.begin(), leak.end(), c) != leak.end();
    const bool kept = std::find(keep.begin(), keep.end(), c) != keep.end();
    return leaky && !kept;
  });
  return out;
}

RawTable zero_coordinate_to_missing(const RawTable& table) {
  RawTable out = table;
  for (auto& row : out.rows) {
    auto& r = row.record;
    if (r.x_coordinate && *r.x_coordinate == 0.0) r.x_coordinate.reset();
    if (r.y_coordinate && *r.y_coordinate == 0.0) r.y_coordinate.reset();
  }
  return out;
}

int iso_week_number(int year, int month, int day) {
  const long days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  // The ISO week belongs to the year containing its Thursday.
  const long thursday = days - weekday_index(days) + 3;
  const int iso_year = year_from_days(thursday);
  return static_cast<int>((thursday - days_from_civil(iso_year, 1, 1)) / 7 + 1);
}

Weekday weekday_of(int year, int month, int day) {
  return static_cast<Weekday>(
      weekday_index(days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day))));
}

TemporalFeatures temporal_features(const Timestamp& ts) {
  TemporalFeatures t;
  t.week_number = iso_week_number(ts.year, ts.month, ts.day);
  t.month = ts.month;
  t.weekday = weekday_of(ts.year, ts.month, ts.day);
  t.hour = ts.hour;
  return t;
}

RawTable derive_temporal(const RawTable& table) {
  if (!table.has_column(Column::kDate)) {
    if (table.has_column(Column::kWeekNumber)) return table;
    throw SchemaError("Date", "derive_temporal requires the Date column");
  }
  RawTable out = table;
  std::erase(out.columns, Column::kDate);
  for (Column c : {Column::kWeekNumber, Column::kMonth, Column::kWeekday, Column::kHour}) {
    out.columns.push_back(c);
  }
  for (auto& row : out.rows) {
    row.temporal = row.record.date ? temporal_features(*row.record.date) : TemporalFeatures{};
  }
  return out;
}

BlockFlags derive_block_flags(std::string_view block) {
  const std::string text = upper_trimmed(block);
  const auto space = text.find_last_of(" \t");
  const std::string token = space == std::string::npos ? text : text.substr(space + 1);
  BlockFlags flags;
  if (text.empty()) return flags;
  flags.is_av = token == "AV" || token == "AVE";
  flags.is_dr = token == "DR";
  flags.is_st = token == "ST";
  flags.is_tr = token == "TR" || token == "TRL";
  return flags;
}

TargetVector make_target(const RawTable& table) {
  if (!table.has_column(Column::kPrimaryType)) {
    throw SchemaError("Primary Type", "make_target requires the Primary Type column");
  }
  TargetVector target;
  target.labels.reserve(table.size());
  target.kept_rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& pt = table.rows[i].record.primary_type;
    if (!pt || upper_trimmed(*pt).empty()) {
      ++target.excluded;
      continue;
    }
    target.labels.push_back(upper_trimmed(*pt) == target.positive_class ? 1 : 0);
    target.kept_rows.push_back(i);
  }
  return target;
}

RawTable select_rows(const RawTable& table, std::span<const std::size_t> positions) {
  RawTable out;
  out.columns = table.columns;
  out.provenance = table.provenance;
  out.rows.reserve(positions.size());
  for (std::size_t p : positions) out.rows.push_back(table.rows.at(p));
  out.provenance.row_count = out.rows.size();
  return out;
}

// ---------------------------------------------------------------------------

LabelEncoder LabelEncoder::fit(std::span<const std::optional<std::string>> values) {
  std::vector<std::string> cats;
  for (const auto& v : values) {
    if (v) cats.push_back(*v);
  }
  if (cats.empty()) throw ArgumentError("label encoder needs at least one non-missing value");
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  return from_vocabulary(std::move(cats));
}

LabelEncoder LabelEncoder::from_vocabulary(std::vector<std::string> ordered) {
  LabelEncoder enc;
  enc.categories_ = std::move(ordered);
  for (std::size_t i = 0; i < enc.categories_.size(); ++i) {
    if (!enc.index_.emplace(enc.categories_[i], i).second) {
      throw ArgumentError("duplicate category \"" + enc.categories_[i] + "\"");
    }
  }
  return enc;
}

std::optional<std::size_t> LabelEncoder::code(std::string_view category) const {
  auto it = index_.find(category);
  return it == index_.end() ? unknown_code() : it->second;
}

LabelEncoder::Applied LabelEncoder::apply(std::span<const std::optional<std::string>> values) const {
  Applied out;
  out.codes.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) {
      out.codes[i] = kNaN;
      continue;
    }
    const std::size_t c = *code(*values[i]);
    if (c == unknown_code()) ++out.unseen;
    out.codes[i] = static_cast<double>(c);
  }
  return out;
}

const std::string& LabelEncoder::decode(std::size_t code) const {
  if (code >= categories_.size()) {
    throw ArgumentError("code " + std::to_string(code) + " is the unknown bucket");
  }
  return categories_[code];
}

nlohmann::json LabelEncoder::to_json() const { return nlohmann::json(categories_); }

LabelEncoder LabelEncoder::from_json(const nlohmann::json& j) {
  return from_vocabulary(j.get<std::vector<std::string>>());
}

std::vector<std::vector<double>> one_hot(std::span<const std::optional<std::string>> values,
                                         const LabelEncoder& encoder) {
  std::vector<std::vector<double>> cols(encoder.size(), std::vector<double>(values.size(), 0.0));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    const std::size_t c = *encoder.code(*values[i]);
    if (c < encoder.size()) cols[c][i] = 1.0;
  }
  return cols;
}

StandardizerParams fit_standardizer(std::span<const double> column) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : column) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  StandardizerParams p;
  if (n == 0) return p;
  p.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : column) {
    if (!std::isnan(v)) ss += (v - p.mean) * (v - p.mean);
  }
  p.sd = std::sqrt(ss / static_cast<double>(n));
  return p;
}

std::vector<double> standardize(const StandardizerParams& params, std::span<const double> column) {
  std::vector<double> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (std::isnan(column[i])) {
      out[i] = kNaN;
    } else {
      out[i] = params.sd > 0.0 ? (column[i] - params.mean) / params.sd : 0.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> EncodedMatrix::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

std::size_t EncodedMatrix::missing_cells() const {
  return static_cast<std::size_t>(
      std::count_if(values.data().begin(), values.data().end(), [](double v) { return std::isnan(v); }));
}

RawFeature extract_feature(const RawTable& table, std::string_view name) {
  RawFeature f;
  const std::size_t n = table.size();
  f.numbers.resize(n);
  f.labels.resize(n);

  if (name == "Is_AV" || name == "Is_DR" || name == "Is_ST" || name == "Is_TR") {
    if (!table.has_column(Column::kBlock)) {
      throw SchemaError("Block", "feature \"" + std::string(name) + "\" needs the Block column");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& block = table.rows[i].record.block;
      const BlockFlags flags = derive_block_flags(block ? *block : std::string_view{});
      const bool v = name == "Is_AV" ? flags.is_av
                     : name == "Is_DR" ? flags.is_dr
                     : name == "Is_ST" ? flags.is_st
                                       : flags.is_tr;
      f.numbers[i] = v ? 1.0 : 0.0;
      f.labels[i] = v ? "1" : "0";
    }
    return f;
  }

  const auto column = column_from_name(name);
  if (!column || !table.has_column(*column)) {
    throw SchemaError(std::string(name), "feature \"" + std::string(name) + "\" is not available");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.rows[i].record;
    const auto& t = table.rows[i].temporal;
    auto set = [&](const auto& v) {
      f.labels[i] = as_label(v);
      if constexpr (!std::is_same_v<std::decay_t<decltype(v)>, std::optional<std::string>>) {
        f.numbers[i] = as_number(v);
      }
    };
    switch (*column) {
      case Column::kId: set(r.id); break;
      case Column::kCaseNumber: set(r.case_number); break;
      case Column::kBlock: set(r.block); break;
      case Column::kIucr: set(r.iucr); break;
      case Column::kPrimaryType: set(r.primary_type); break;
      case Column::kDescription: set(r.description); break;
      case Column::kLocationDescription: set(r.location_description); break;
      case Column::kArrest: set(r.arrest); break;
      case Column::kDomestic: set(r.domestic); break;
      case Column::kBeat: set(r.beat); break;
      case Column::kDistrict: set(r.district); break;
      case Column::kWard: set(r.ward); break;
      case Column::kCommunityArea: set(r.community_area); break;
      case Column::kFbiCode: set(r.fbi_code); break;
      case Column::kXCoordinate: set(r.x_coordinate); break;
      case Column::kYCoordinate: set(r.y_coordinate); break;
      case Column::kYear: set(r.year); break;
      case Column::kLatitude: set(r.latitude); break;
      case Column::kLongitude: set(r.longitude); break;
      case Column::kLocation: set(r.location); break;
      case Column::kWeekNumber: set(t.week_number); break;
      case Column::kMonth: set(t.month); break;
      case Column::kHour: set(t.hour); break;
      case Column::kWeekday:
        if (t.weekday) {
          f.labels[i] = std::string(weekday_name(*t.weekday));
          f.numbers[i] = static_cast<double>(*t.weekday);
        }
        break;
      case Column::kDate:
      case Column::kUpdatedOn:
        throw SchemaError(std::string(name), "timestamp columns are not model features");
    }
  }
  return f;
}

FeatureEncoder FeatureEncoder::fit(const RawTable& train, std::vector<FeatureSpec> specs,
                                   ScaleMode scale) {
  FeatureEncoder enc;
  enc.scale_ = scale;
  for (const auto& spec : specs) {
    spec.validate();
    const RawFeature raw = extract_feature(train, spec.name);
    switch (spec.transform) {
      case Transform::kLabelEncode:
      case Transform::kOneHot: {
        LabelEncoder le;
        if (spec.name == "Weekday") {
          std::vector<std::string> days(weekday_names().begin(), weekday_names().end());
          le = LabelEncoder::from_vocabulary(std::move(days));
        } else {
          le = LabelEncoder::fit(raw.labels);
        }
        if (spec.transform == Transform::kOneHot) {
          for (const auto& cat : le.categories()) {
            enc.columns_.push_back({spec.name + "_" + cat, spec.name, spec.kind, true, std::nullopt});
          }
        } else {
          EncodedColumn col{spec.name, spec.name, spec.kind, false, std::nullopt};
          if (wants_scaling(spec, scale)) col.scaling = fit_standardizer(le.apply(raw.labels).codes);
          enc.columns_.push_back(std::move(col));
        }
        enc.encoders_.emplace(spec.name, std::move(le));
        break;
      }
      case Transform::kNone:
      case Transform::kStandardize: {
        const bool has_numbers =
            std::any_of(raw.numbers.begin(), raw.numbers.end(), [](const auto& v) { return v.has_value(); }) ||
            std::all_of(raw.labels.begin(), raw.labels.end(), [](const auto& v) { return !v.has_value(); });
        if (!has_numbers) {
          throw ArgumentError("feature \"" + spec.name + "\" is not numeric; use label_encode or one_hot");
        }
        EncodedColumn col{spec.name, spec.name, spec.kind, false, std::nullopt};
        if (wants_scaling(spec, scale)) col.scaling = fit_standardizer(to_column(raw.numbers));
        enc.columns_.push_back(std::move(col));
        break;
      }
    }
  }
  enc.specs_ = std::move(specs);
  return enc;
}

EncodedMatrix FeatureEncoder::transform(const RawTable& table) const {
  EncodedMatrix out;
  out.columns = columns_;
  out.values = Matrix(table.size(), columns_.size());
  std::size_t col = 0;
  auto put = [&](const std::vector<double>& values) {
    const auto& info = columns_[col];
    out.values.set_column(col, info.scaling ? standardize(*info.scaling, values) : values);
    ++col;
  };
  for (const auto& spec : specs_) {
    const RawFeature raw = extract_feature(table, spec.name);
    if (spec.transform == Transform::kOneHot) {
      const auto& le = encoders_.at(spec.name);
      for (auto& c : one_hot(raw.labels, le)) put(c);
      std::size_t unseen = 0;
      for (const auto& v : raw.labels) {
        if (v && *le.code(*v) == le.unknown_code()) ++unseen;
      }
      if (unseen) out.unseen_counts[spec.name] = unseen;
    } else if (spec.transform == Transform::kLabelEncode) {
      auto applied = encoders_.at(spec.name).apply(raw.labels);
      if (applied.unseen) out.unseen_counts[spec.name] = applied.unseen;
      put(applied.codes);
    } else {
      put(to_column(raw.numbers));
    }
  }
  return out;
}

nlohmann::json FeatureEncoder::to_json() const {
  nlohmann::json j;
  j["scale"] = to_string(scale_);
  for (const auto& s : specs_) {
    j["features"].push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"transform", to_string(s.transform)}});
  }
  j["encoders"] = nlohmann::json::object();
  for (const auto& [name, le] : encoders_) j["encoders"][name] = le.to_json();
  for (const auto& c : columns_) {
    nlohmann::json cj = {{"name", c.name}, {"feature", c.feature}, {"kind", to_string(c.kind)},
                         {"indicator", c.indicator}};
    if (c.scaling) cj["scaling"] = {{"mean", c.scaling->mean}, {"sd", c.scaling->sd}};
    j["columns"].push_back(std::move(cj));
  }
  return j;
}

// ---------------------------------------------------------------------------

Matrix knn_impute(const Matrix& target, const Matrix& donors, std::span<const bool> categorical,
                  std::size_t k, ImputeReport* report) {
  const std::size_t d = target.cols();
  if (donors.cols() != d || categorical.size() != d) {
    throw ArgumentError("knn_impute: column count mismatch");
  }
  if (k == 0) throw ArgumentError("knn_impute: k must be positive");

  // Donor statistics used to put columns on a common scale for distance.
  std::vector<double> center(d, 0.0), scale(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto p = fit_standardizer(donors.column(j));
    center[j] = p.mean;
    scale[j] = p.sd > 0.0 ? p.sd : 1.0;
  }

  Matrix out = target;
  std::vector<std::size_t> queries;
  for (std::size_t i = 0; i < target.rows(); ++i) {
    const auto row = target.row(i);
    const auto missing = std::count_if(row.begin(), row.end(), [](double v) { return std::isnan(v); });
    if (missing == 0) continue;
    if (static_cast<std::size_t>(missing) == d) {
      throw ArgumentError("knn_impute: row " + std::to_string(i) + " has no observed features");
    }
    queries.push_back(i);
  }

  struct QueryResult {
    std::size_t imputed = 0;
    std::size_t clamped = 0;
    std::string error;
  };
  std::vector<QueryResult> results(queries.size());

  parallel_for(queries.size(), [&](std::size_t q) {
    const std::size_t i = queries[q];
    const auto x = target.row(i);
    std::vector<double> dist(donors.rows());
    for (std::size_t r = 0; r < donors.rows(); ++r) {
      const auto y = donors.row(r);
      double ss = 0.0;
      std::size_t shared = 0;
      for (std::size_t j = 0; j < d; ++j) {
        if (std::isnan(x[j]) || std::isnan(y[j])) continue;
        const double diff = (x[j] - y[j]) / scale[j];
        ss += diff * diff;
        ++shared;
      }
      dist[r] = shared == 0 ? std::numeric_limits<double>::infinity()
                            : std::sqrt(ss * static_cast<double>(d) / static_cast<double>(shared));
    }
    std::vector<std::size_t> eligible;
    eligible.reserve(donors.rows());
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isnan(x[j])) continue;
      eligible.clear();
      for (std::size_t r = 0; r < donors.rows(); ++r) {
        if (!std::isnan(donors(r, j))) eligible.push_back(r);
      }
      if (eligible.empty()) {
        results[q].error = "no donor observes column " + std::to_string(j);
        return;
      }
      const std::size_t kk = std::min(k, eligible.size());
      if (kk < k) ++results[q].clamped;
      auto closer = [&](std::size_t a, std::size_t b) {
        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
      };
      std::partial_sort(eligible.begin(), eligible.begin() + static_cast<long>(kk), eligible.end(), closer);
      double value = 0.0;
      if (categorical[j]) {
        std::vector<double> votes;
        for (std::size_t t = 0; t < kk; ++t) votes.push_back(donors(eligible[t], j));
        std::sort(votes.begin(), votes.end());
        std::size_t best_count = 0;
        for (std::size_t a = 0; a < votes.size();) {
          std::size_t b = a;
          while (b < votes.size() && votes[b] == votes[a]) ++b;
          if (b - a > best_count) {
            best_count = b - a;
            value = votes[a];
          }
          a = b;
        }
      } else {
        for (std::size_t t = 0; t < kk; ++t) value += donors(eligible[t], j);
        value /= static_cast<double>(kk);
      }
      out(i, j) = value;
      ++results[q].imputed;
    }
  });

  ImputeReport local;
  for (const auto& r : results) {
    if (!r.error.empty()) throw ArgumentError("knn_impute: " + r.error);
    local.imputed_cells += r.imputed;
    local.clamped += r.clamped;
  }
  if (local.clamped) {
    local.warnings.push_back(std::to_string(local.clamped) + " cell(s) imputed from fewer than k=" +
                             std::to_string(k) + " donors");
  }
  if (report) *report = std::move(local);
  return out;
}

EncodedMatrix knn_impute(const EncodedMatrix& matrix, const EncodedMatrix& donors, std::size_t k,
                         ImputeReport* report) {
  // std::vector<bool> is not contiguous, so the flags live in a plain array.
  const std::size_t d = matrix.columns.size();
  auto categorical = std::make_unique<bool[]>(d);
  for (std::size_t j = 0; j < d; ++j) categorical[j] = matrix.columns[j].kind != FeatureKind::kNumeric;
  EncodedMatrix out = matrix;
  out.values = knn_impute(matrix.values, donors.values,
                          std::span<const bool>(categorical.get(), d), k, report);
  return out;
}

EncodedMatrix knn_impute(const EncodedMatrix& matrix, std::size_t k, ImputeReport* report) {
  return knn_impute(matrix, matrix, k, report);
}

}  // namespace crimepred
