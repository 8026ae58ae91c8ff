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

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include "crimepred/error.hpp"
#include "crimepred/preprocess.hpp"
#include "test_util.hpp"

namespace crimepred {
namespace {

using testing::synthetic_table;

std::vector<std::string> names(const RawTable& t) {
  std::vector<std::string> out;
  for (Column c : t.columns) out.emplace_back(column_name(c));
  return out;
}

TEST(DropLeakage, KeepsTwelveColumnsInOrder) {
  const RawTable t = synthetic_table(5, 1);
  const RawTable d = drop_leakage_features(t);
  EXPECT_EQ(names(d), (std::vector<std::string>{"Date", "Block", "Primary Type", "Location Description", "Domestic",
                                                "Beat", "District", "Ward", "Community Area", "X Coordinate",
                                                "Y Coordinate", "Year"}));
  EXPECT_EQ(names(drop_leakage_features(d)), names(d));
  RawTable partial = t;
  std::erase(partial.columns, Column::kArrest);
  EXPECT_EQ(names(drop_leakage_features(partial)), names(d));
  const Column keep[] = {Column::kArrest};
  EXPECT_TRUE(drop_leakage_features(t, keep).has_column(Column::kArrest));
}

// ISO week from std::chrono: the week containing the Thursday of the date.
int chrono_iso_week(int y, int m, int d) {
  using namespace std::chrono;
  const sys_days day = year_month_day{year{y}, month{static_cast<unsigned>(m)}, std::chrono::day{static_cast<unsigned>(d)}};
  const int iso_dow = weekday{day}.iso_encoding();
  const sys_days thursday = day + days{4 - iso_dow};
  const year_month_day t{thursday};
  const sys_days jan1 = year_month_day{t.year(), January, std::chrono::day{1}};
  return static_cast<int>((thursday - jan1).count() / 7) + 1;
}

TEST(Temporal, CalendarOracle) {
  const auto f = temporal_features(*parse_timestamp("03/15/2023 02:30:00 PM"));
  EXPECT_EQ(f.month, 3);
  EXPECT_EQ(f.hour, 14);
  EXPECT_EQ(f.weekday, Weekday::kWednesday);
  EXPECT_EQ(f.week_number, 11);
  const auto g = temporal_features(*parse_timestamp("01/01/2020 12:00:00 AM"));
  EXPECT_EQ(g.hour, 0);
  EXPECT_EQ(g.month, 1);

  using namespace std::chrono;
  for (sys_days d = sys_days{2000y / January / 1}; d < sys_days{2030y / January / 1}; d += days{3}) {
    const year_month_day ymd{d};
    const int y = static_cast<int>(ymd.year());
    const int m = static_cast<int>(static_cast<unsigned>(ymd.month()));
    const int dd = static_cast<int>(static_cast<unsigned>(ymd.day()));
    ASSERT_EQ(iso_week_number(y, m, dd), chrono_iso_week(y, m, dd)) << y << "-" << m << "-" << dd;
    ASSERT_EQ(static_cast<unsigned>(weekday_of(y, m, dd)) + 1, weekday{d}.iso_encoding());
  }
}

TEST(Temporal, MissingDateGivesMissingFields) {
  RawTable t = synthetic_table(3, 2);
  t.rows[1].record.date.reset();
  const RawTable d = derive_temporal(t);
  EXPECT_FALSE(d.has_column(Column::kDate));
  EXPECT_TRUE(d.has_column(Column::kWeekday));
  EXPECT_EQ(d.rows[1].temporal, TemporalFeatures{});
  EXPECT_TRUE(d.rows[0].temporal.hour.has_value());
}

TEST(BlockFlags, SuffixTokens) {
  EXPECT_EQ(derive_block_flags("001XX N STATE ST"), (BlockFlags{false, false, true, false}));
  EXPECT_EQ(derive_block_flags("0000X W OHIO DR"), (BlockFlags{false, true, false, false}));
  EXPECT_EQ(derive_block_flags("012XX S ASHLAND AVE"), (BlockFlags{true, false, false, false}));
  EXPECT_EQ(derive_block_flags("W RIVER TRL"), (BlockFlags{false, false, false, true}));
  EXPECT_EQ(derive_block_flags(""), BlockFlags{});
  EXPECT_EQ(derive_block_flags("STATE STREET"), BlockFlags{});
}

TEST(Target, TheftIsPositive) {
  RawTable t = synthetic_table(40, 3);
  t.rows[0].record.primary_type = "THEFT";
  t.rows[1].record.primary_type = "BATTERY";
  t.rows[2].record.primary_type.reset();
  const TargetVector y = make_target(t);
  EXPECT_EQ(y.excluded, 1u);
  EXPECT_EQ(y.labels.size(), 39u);
  EXPECT_EQ(y.labels[0], 1);
  EXPECT_EQ(y.labels[1], 0);
  EXPECT_EQ(y.kept_rows[2], 3u);
  for (auto& r : t.rows) r.record.primary_type = "THEFT";
  const auto all = make_target(t).labels;
  EXPECT_TRUE(std::all_of(all.begin(), all.end(), [](int v) { return v == 1; }));
}

TEST(LabelEncoder, LexicographicCodesAndUnknownBucket) {
  const std::vector<std::optional<std::string>> v = {"APARTMENT", "STREET", "ALLEY", std::nullopt, "STREET"};
  const LabelEncoder le = LabelEncoder::fit(v);
  EXPECT_EQ(le.categories(), (std::vector<std::string>{"ALLEY", "APARTMENT", "STREET"}));
  EXPECT_EQ(le.code("ALLEY"), 0u);
  EXPECT_EQ(le.code("STREET"), 2u);
  const std::vector<std::optional<std::string>> q = {"SIDEWALK", std::nullopt, "ALLEY"};
  const auto applied = le.apply(q);
  EXPECT_EQ(applied.codes[0], 3.0);
  EXPECT_TRUE(std::isnan(applied.codes[1]));
  EXPECT_EQ(applied.codes[2], 0.0);
  EXPECT_EQ(applied.unseen, 1u);
  EXPECT_EQ(le.decode(1), "APARTMENT");
  EXPECT_THROW(le.decode(3), Error);
  EXPECT_EQ(LabelEncoder::from_json(le.to_json()).categories(), le.categories());
}

TEST(OneHot, IndicatorRows) {
  const LabelEncoder le = LabelEncoder::fit(std::vector<std::optional<std::string>>{"a", "b", "c"});
  const auto cols = one_hot(std::vector<std::optional<std::string>>{"b", std::nullopt, "zzz"}, le);
  ASSERT_EQ(cols.size(), 3u);
  EXPECT_EQ(cols[0][0] + cols[1][0] + cols[2][0], 1.0);
  EXPECT_EQ(cols[1][0], 1.0);
  for (std::size_t r : {1u, 2u}) EXPECT_EQ(cols[0][r] + cols[1][r] + cols[2][r], 0.0);
}

TEST(OneHot, WeekdayExpandsToSevenColumns) {
  const RawTable t = derive_temporal(synthetic_table(200, 4));
  const auto enc = FeatureEncoder::fit(t, {{"Weekday", FeatureKind::kNominal, Transform::kOneHot}}, ScaleMode::kNone);
  const auto m = enc.transform(t);
  EXPECT_EQ(m.column_names(), (std::vector<std::string>{"Weekday_Monday", "Weekday_Tuesday", "Weekday_Wednesday",
                                                         "Weekday_Thursday", "Weekday_Friday", "Weekday_Saturday",
                                                         "Weekday_Sunday"}));
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    double s = 0;
    for (double v : m.values.row(r)) s += v;
    EXPECT_EQ(s, 1.0);
  }
}

TEST(Standardize, MeanZeroUnitSd) {
  const std::vector<double> x = {3, 7, 1, 9, 4, NAN, 12};
  const auto p = fit_standardizer(x);
  const auto z = standardize(p, x);
  double s = 0, ss = 0;
  int n = 0;
  for (double v : z) {
    if (std::isnan(v)) continue;
    s += v;
    ss += v * v;
    ++n;
  }
  EXPECT_NEAR(s / n, 0.0, 1e-9);
  EXPECT_NEAR(std::sqrt(ss / n), 1.0, 1e-9);
  EXPECT_TRUE(std::isnan(z[5]));
  const std::vector<double> c = {5, 5, 5};
  for (double v : standardize(fit_standardizer(c), c)) EXPECT_EQ(v, 0.0);
}

TEST(FeatureSpec, Compatibility) {
  EXPECT_THROW((FeatureSpec{"Ward", FeatureKind::kNominal, Transform::kStandardize}.validate()), ArgumentError);
  EXPECT_THROW((FeatureSpec{"Year", FeatureKind::kNumeric, Transform::kOneHot}.validate()), ArgumentError);
  EXPECT_NO_THROW((FeatureSpec{"Month", FeatureKind::kOrdinal, Transform::kLabelEncode}.validate()));
  EXPECT_EQ(default_feature_spec("X Coordinate", true).transform, Transform::kStandardize);
  EXPECT_EQ(default_feature_spec("Ward", true).transform, Transform::kLabelEncode);
  EXPECT_EQ(default_feature_spec("Hour", true).transform, Transform::kNone);
}

TEST(FeatureEncoder, FrozenOnTrainingRows) {
  const RawTable train = derive_temporal(synthetic_table(300, 5));
  const RawTable test = derive_temporal(synthetic_table(100, 6));
  std::vector<FeatureSpec> specs = {default_feature_spec("X Coordinate", true), default_feature_spec("Ward", true),
                                    default_feature_spec("Hour", true), {"Is_ST", FeatureKind::kBinary, Transform::kNone}};
  const auto enc = FeatureEncoder::fit(train, specs, ScaleMode::kNumeric);
  const auto a = enc.transform(test);
  const auto b = FeatureEncoder::fit(train, specs, ScaleMode::kNumeric).transform(test);
  EXPECT_EQ(a.values.data().size(), b.values.data().size());
  for (std::size_t i = 0; i < a.values.data().size(); ++i) {
    const double u = a.values.data()[i], v = b.values.data()[i];
    EXPECT_TRUE((std::isnan(u) && std::isnan(v)) || u == v);
  }
  const auto& scaling = enc.columns()[0].scaling;
  ASSERT_TRUE(scaling);
  const auto raw = extract_feature(train, "X Coordinate");
  double s = 0;
  int n = 0;
  for (const auto& v : raw.numbers) {
    if (v) {
      s += *v;
      ++n;
    }
  }
  EXPECT_NEAR(scaling->mean, s / n, 1e-6);
  EXPECT_THROW(extract_feature(drop_leakage_features(train), "Arrest"), SchemaError);
}

TEST(ZeroCoordinates, BecomeMissing) {
  RawTable t = synthetic_table(3, 7);
  t.rows[0].record.x_coordinate = 0.0;
  t.rows[1].record.x_coordinate = 1150000.0;
  const RawTable z = zero_coordinate_to_missing(t);
  EXPECT_FALSE(z.rows[0].record.x_coordinate.has_value());
  EXPECT_EQ(z.rows[1].record.x_coordinate, 1150000.0);
}

TEST(KnnImpute, IdentityWithoutMissingCells) {
  const Matrix m = {{1, 2}, {3, 4}, {5, 7}};
  const bool cat[] = {false, false};
  EXPECT_EQ(knn_impute(m, m, cat, 2), m);
}

TEST(KnnImpute, NearestRowCopiedWithKOne) {
  const Matrix donors = {{1, 10, 100}, {5, 50, 500}, {9, 90, 900}};
  const Matrix target = {{5, 50, NAN}};
  const bool cat[] = {false, false, false};
  EXPECT_EQ(knn_impute(target, donors, cat, 1)(0, 2), 500.0);
}

TEST(KnnImpute, TwoNearestMeanOnToyMatrix) {
  const Matrix m = {{0, 0, 1}, {1, 0, 3}, {4, 4, 8}, {0.5, 0.2, NAN}};
  const bool cat[] = {false, false, false};
  ImputeReport report;
  const Matrix out = knn_impute(m, m, cat, 2, &report);
  // Hand oracle: rows 0 and 1 are the two nearest donors on the shared columns.
  EXPECT_DOUBLE_EQ(out(3, 2), (1.0 + 3.0) / 2.0);
  EXPECT_EQ(report.imputed_cells, 1u);
  const bool cat2[] = {false, false, true};
  const Matrix few = {{0, 0, 1}, {0.1, 0.1, NAN}};
  ImputeReport r2;
  EXPECT_EQ(knn_impute(few, few, cat2, 5, &r2)(1, 2), 1.0);
  EXPECT_EQ(r2.clamped, 1u);
  EXPECT_FALSE(r2.warnings.empty());
  const Matrix empty_row = {{NAN, NAN, NAN}};
  EXPECT_THROW(knn_impute(empty_row, m, cat, 1), ArgumentError);
}

}  // namespace
}  // namespace crimepred
