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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crimepred/ingest.hpp"
#include "crimepred/matrix.hpp"
#include <nlohmann/json.hpp>

namespace crimepred {

enum class FeatureKind { kNumeric, kNominal, kOrdinal, kBinary };
enum class Transform { kNone, kLabelEncode, kOneHot, kStandardize };

std::string_view to_string(FeatureKind kind);
std::string_view to_string(Transform transform);
FeatureKind feature_kind_from_string(std::string_view s);
Transform transform_from_string(std::string_view s);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  Transform transform = Transform::kNone;

  // Throws ArgumentError when kind and transform are incompatible.
  void validate() const;
  bool operator==(const FeatureSpec&) const = default;
};

// Kind assignment used when a config lists a feature by name only.
// Coordinates and Year are numeric; geography codes, Block, Location
// Description and Weekday nominal; Month/Hour/Week Number ordinal;
// Domestic/Arrest and the Is_* street flags binary.
FeatureKind default_feature_kind(std::string_view name);

// Numeric features are standardized when `scaled`; nominal features are
// label encoded; ordinal and binary features pass through.
FeatureSpec default_feature_spec(std::string_view name, bool scaled);

// ---------------------------------------------------------------------------
// Table-level transforms.

// Columns that are recorded after the fact or duplicate the target/location.
const std::vector<Column>& leakage_columns();

// Removes the leakage columns except those listed in `keep`. Idempotent and
// tolerant of columns that are already gone.
RawTable drop_leakage_features(const RawTable& table, std::span<const Column> keep = {});

// X/Y coordinates of exactly 0 mean "not recorded"; they become missing.
RawTable zero_coordinate_to_missing(const RawTable& table);

int iso_week_number(int year, int month, int day);
Weekday weekday_of(int year, int month, int day);
TemporalFeatures temporal_features(const Timestamp& ts);

// Replaces Date with Week Number, Month, Weekday and Hour.
RawTable derive_temporal(const RawTable& table);

struct BlockFlags {
  bool is_av = false;
  bool is_dr = false;
  bool is_st = false;
  bool is_tr = false;
  bool operator==(const BlockFlags&) const = default;
};

// Street-type flags from the trailing token of a block address:
// AV/AVE, DR, ST, TR/TRL.
BlockFlags derive_block_flags(std::string_view block);

struct TargetVector {
  std::vector<int> labels;  // 1 = theft
  std::string positive_class = "THEFT";
  std::vector<std::size_t> kept_rows;  // table row positions that received a label
  std::size_t excluded = 0;            // rows without a Primary Type
};

TargetVector make_target(const RawTable& table);

// Keeps only the table rows listed in `positions`, in that order.
RawTable select_rows(const RawTable& table, std::span<const std::size_t> positions);

// ---------------------------------------------------------------------------
// Encoders.

class LabelEncoder {
 public:
  LabelEncoder() = default;

  // Distinct non-missing categories, coded 0..k-1 in lexicographic order.
  static LabelEncoder fit(std::span<const std::optional<std::string>> values);
  // Categories coded in the given order.
  static LabelEncoder from_vocabulary(std::vector<std::string> ordered);

  std::size_t size() const { return categories_.size(); }
  const std::vector<std::string>& categories() const { return categories_; }
  std::size_t unknown_code() const { return categories_.size(); }

  // nullopt for a missing value; unknown_code() for an unseen category.
  std::optional<std::size_t> code(std::string_view category) const;

  struct Applied {
    std::vector<double> codes;  // NaN where the input is missing
    std::size_t unseen = 0;
  };
  Applied apply(std::span<const std::optional<std::string>> values) const;

  // Inverse of code() on seen categories. Throws for the unknown bucket.
  const std::string& decode(std::size_t code) const;

  nlohmann::json to_json() const;
  static LabelEncoder from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> categories_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// k indicator columns; a row is all zeros for a missing or unseen value.
std::vector<std::vector<double>> one_hot(std::span<const std::optional<std::string>> values,
                                         const LabelEncoder& encoder);

struct StandardizerParams {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation; 0 for a constant column
};

// NaN entries are ignored when fitting and preserved when transforming.
StandardizerParams fit_standardizer(std::span<const double> column);
std::vector<double> standardize(const StandardizerParams& params, std::span<const double> column);

// ---------------------------------------------------------------------------
// Encoded design matrix.

enum class ScaleMode { kNone, kNumeric, kAllNonBinary };
ScaleMode scale_mode_from_string(std::string_view s);
std::string_view to_string(ScaleMode mode);

struct EncodedColumn {
  std::string name;     // e.g. "Beat" or "Weekday_Friday"
  std::string feature;  // originating FeatureSpec name
  FeatureKind kind = FeatureKind::kNumeric;
  bool indicator = false;  // one-hot member
  std::optional<StandardizerParams> scaling;
};

struct EncodedMatrix {
  Matrix values;  // NaN marks missing until imputation
  std::vector<EncodedColumn> columns;
  std::map<std::string, std::size_t> unseen_counts;  // per feature, at transform time

  std::vector<std::string> column_names() const;
  std::size_t missing_cells() const;
};

// Raw per-row values of one feature before encoding.
struct RawFeature {
  std::vector<std::optional<double>> numbers;      // for kNone / kStandardize
  std::vector<std::optional<std::string>> labels;  // for kLabelEncode / kOneHot
};

// Extracts a feature by published column name, derived calendar name, or one
// of Is_AV/Is_DR/Is_ST/Is_TR. Throws SchemaError when the column is absent.
RawFeature extract_feature(const RawTable& table, std::string_view name);

// Fitted per-feature encoders and scalers, learned from training rows only.
class FeatureEncoder {
 public:
  static FeatureEncoder fit(const RawTable& train, std::vector<FeatureSpec> specs,
                            ScaleMode scale);

  EncodedMatrix transform(const RawTable& table) const;

  const std::vector<FeatureSpec>& specs() const { return specs_; }
  const std::vector<EncodedColumn>& columns() const { return columns_; }
  const std::map<std::string, LabelEncoder>& encoders() const { return encoders_; }

  nlohmann::json to_json() const;

 private:
  std::vector<FeatureSpec> specs_;
  ScaleMode scale_ = ScaleMode::kNone;
  std::map<std::string, LabelEncoder> encoders_;
  std::vector<EncodedColumn> columns_;
};

struct ImputeReport {
  std::size_t imputed_cells = 0;
  std::size_t clamped = 0;  // cells imputed from fewer than k donors
  std::vector<std::string> warnings;
};

// Fills NaN cells of `target` from the k nearest rows of `donors` that have the
// cell observed. Distance is Euclidean over mutually observed columns after
// per-column standardization (donor statistics), rescaled by
// d / (number of mutually observed columns). Numeric columns take the donor
// mean; columns flagged in `categorical` take the donor mode, ties to the
// smallest code.
Matrix knn_impute(const Matrix& target, const Matrix& donors, std::span<const bool> categorical,
                  std::size_t k, ImputeReport* report = nullptr);

// Self-imputation: donors are the rows of the matrix itself.
EncodedMatrix knn_impute(const EncodedMatrix& matrix, std::size_t k, ImputeReport* report = nullptr);
// Imputes `matrix` from the rows of `donors` (typically the training matrix).
EncodedMatrix knn_impute(const EncodedMatrix& matrix, const EncodedMatrix& donors, std::size_t k,
                         ImputeReport* report = nullptr);

}  // namespace crimepred
