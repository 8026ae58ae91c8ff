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

#include <algorithm>
#include <set>
#include <sstream>

#include "crimepred/csv.hpp"
#include "crimepred/error.hpp"
#include "crimepred/ingest.hpp"
#include "test_util.hpp"

namespace crimepred {
namespace {

using testing::kHeader;
using testing::synthetic_table;

RawTable parse(const std::string& body, bool strict = false) {
  std::istringstream in(std::string(kHeader) + body);
  return read_csv(in, strict);
}

const char* kRow =
    "12345,JA100001,03/15/2023 02:30:00 PM,001XX N STATE ST,0820,THEFT,$500 AND UNDER,STREET,false,false,"
    "0111,1,42,32,06,1176346,1900904,2023,03/22/2023 04:46:28 PM,41.883,-87.627,\"(41.883, -87.627)\"\n";

TEST(Csv, QuotedFieldsAndEscapes) {
  const auto rows = csv::parse("a,\"b,c\",\"say \"\"hi\"\"\"\n\"multi\nline\",x,\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b,c", "say \"hi\""}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"multi\nline", "x", ""}));
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("plain"), "plain");
}

TEST(Timestamp, ParsesTwelveHourClock) {
  auto ts = parse_timestamp("03/15/2023 02:30:00 PM");
  ASSERT_TRUE(ts);
  EXPECT_EQ(ts->hour, 14);
  EXPECT_EQ(ts->month, 3);
  ts = parse_timestamp("01/01/2020 12:00:00 AM");
  ASSERT_TRUE(ts);
  EXPECT_EQ(ts->hour, 0);
  ts = parse_timestamp("01/01/2020 12:05:00 PM");
  ASSERT_TRUE(ts);
  EXPECT_EQ(ts->hour, 12);
  EXPECT_FALSE(parse_timestamp("2020-01-01 00:00"));
  EXPECT_FALSE(parse_timestamp("13/01/2020 01:00:00 AM"));
  EXPECT_EQ(format_timestamp(*parse_timestamp("03/15/2023 02:30:00 PM")), "03/15/2023 02:30:00 PM");
}

TEST(LoadCsv, ParsesAllColumns) {
  const RawTable t = parse(kRow);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.columns.size(), kSourceColumnCount);
  const auto& r = t.rows[0].record;
  EXPECT_EQ(r.id, 12345);
  EXPECT_EQ(r.primary_type, "THEFT");
  EXPECT_EQ(r.beat, 111);
  EXPECT_EQ(r.ward, 42);
  EXPECT_EQ(r.arrest, false);
  EXPECT_DOUBLE_EQ(*r.x_coordinate, 1176346.0);
  EXPECT_EQ(r.location, "(41.883, -87.627)");
  EXPECT_EQ(t.provenance.row_count, 1u);
}

TEST(LoadCsv, HeaderOnlyGivesEmptyTable) {
  const RawTable t = parse("");
  EXPECT_EQ(t.size(), 0u);
  EXPECT_EQ(t.columns.size(), kSourceColumnCount);
}

TEST(LoadCsv, BlankWardIsMissing) {
  std::string row = kRow;
  row.replace(row.find(",42,"), 4, ",,");
  const RawTable t = parse(row);
  EXPECT_FALSE(t.rows[0].record.ward.has_value());
  EXPECT_TRUE(is_missing_mark("NA"));
  EXPECT_TRUE(is_missing_mark("  "));
  EXPECT_FALSE(is_missing_mark("0"));
}

TEST(LoadCsv, MissingColumnNamesIt) {
  std::string header = kHeader;
  header.replace(header.find("Ward"), 4, "Wards");
  std::istringstream in(header + kRow);
  try {
    read_csv(in);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "Ward");
  }
}

TEST(LoadCsv, StrictModeReportsRowAndColumn) {
  std::string bad = kRow;
  bad.replace(bad.find(",0111,"), 6, ",beat?,");
  try {
    parse(std::string(kRow) + bad, true);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "Beat");
  }
  const RawTable lenient = parse(std::string(kRow) + bad, false);
  EXPECT_FALSE(lenient.rows[1].record.beat.has_value());
  EXPECT_EQ(lenient.provenance.invalid_cells, 1u);
}

TEST(LoadCsv, WriteReadRoundTrip) {
  const RawTable t = synthetic_table(300, 4);
  std::ostringstream out;
  write_csv(t, out);
  std::istringstream in(out.str());
  const RawTable back = read_csv(in);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back.rows[i].record, t.rows[i].record);
}

TEST(LoadCsv, FileErrors) {
  EXPECT_THROW(load_csv("/nonexistent/crimes.csv"), ArgumentError);
}

std::multiset<std::size_t> identities(const RawTable& t) {
  std::multiset<std::size_t> s;
  for (const auto& r : t.rows) s.insert(r.source_row);
  return s;
}

TEST(Shuffle, DeterministicPermutation) {
  const RawTable t = synthetic_table(200, 1);
  const RawTable a = shuffle(t, 9);
  const RawTable b = shuffle(t, 9);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(identities(a), identities(t));
  EXPECT_NE(a.rows, t.rows);
  EXPECT_EQ(shuffle(RawTable{}, 3).size(), 0u);
}

TEST(Split, Arithmetic) {
  EXPECT_EQ(split_train_size(7724493, 0.8), 6179594u);
  EXPECT_EQ(7724493 - split_train_size(7724493, 0.8), 1544899u);
  EXPECT_EQ(split_train_size(10, 0.8), 8u);
  std::mt19937_64 gen(5);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = gen() % 100000;
    const double ratio = 0.01 + 0.98 * static_cast<double>(gen() % 1000) / 1000.0;
    const std::size_t expect = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    EXPECT_EQ(split_train_size(n, ratio), expect) << n << " " << ratio;
  }
}

TEST(Split, PartitionsRowsByIdentity) {
  const RawTable t = synthetic_table(10, 2);
  const SplitPair s = split(t, 0.8, 7);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  auto all = identities(s.train);
  for (auto id : identities(s.test)) {
    EXPECT_EQ(all.count(id), 0u);
    all.insert(id);
  }
  EXPECT_EQ(all, identities(t));
  EXPECT_EQ(split(t, 0.8, 7).train.rows, s.train.rows);
  EXPECT_THROW(split(t, 0.0, 1), ArgumentError);
  EXPECT_THROW(split(t, 1.0, 1), ArgumentError);
}

TEST(Sample, SizesAndErrors) {
  const RawTable t = synthetic_table(50, 3);
  EXPECT_EQ(sample(t, 20, 1).size(), 20u);
  EXPECT_EQ(sample(t, 0, 1).size(), 0u);
  const RawTable all = sample(t, 50, 1);
  EXPECT_EQ(all.rows, t.rows);
  EXPECT_THROW(sample(t, 51, 1), ArgumentError);
  const RawTable s = sample(t, 20, 4);
  EXPECT_EQ(s.rows, sample(t, 20, 4).rows);
  EXPECT_TRUE(std::is_sorted(s.rows.begin(), s.rows.end(),
                             [](const TableRow& a, const TableRow& b) { return a.source_row < b.source_row; }));
}

}  // namespace
}  // namespace crimepred
