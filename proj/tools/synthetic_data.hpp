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
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "crimepred/csv.hpp"
#include "crimepred/rng.hpp"

namespace crimepred::testing {

// Writes `n` rows of synthetic incident reports in the public Chicago
// schema. Theft is the most frequent type and depends on location type,
// hour and street, so the models have something to learn. About one percent
// of Ward and coordinate cells are blank.
inline void write_synthetic_csv(std::ostream& out, std::size_t n, std::uint64_t seed) {
  struct Offence {
    const char* type;
    const char* iucr;
    const char* description;
    const char* fbi;
  };
  static const Offence kOffences[] = {
      {"THEFT", "0810", "OVER $500", "06"},
      {"THEFT", "0820", "$500 AND UNDER", "06"},
      {"THEFT", "0860", "RETAIL THEFT", "06"},
      {"BATTERY", "0460", "SIMPLE", "08B"},
      {"BATTERY", "0486", "DOMESTIC BATTERY SIMPLE", "08B"},
      {"CRIMINAL DAMAGE", "1310", "TO PROPERTY", "14"},
      {"CRIMINAL DAMAGE", "1320", "TO VEHICLE", "14"},
      {"NARCOTICS", "1811", "POSS: CANNABIS 30GMS OR LESS", "18"},
      {"NARCOTICS", "2027", "POSS: CRACK", "18"},
      {"ASSAULT", "0560", "SIMPLE", "08A"},
      {"BURGLARY", "0610", "FORCIBLE ENTRY", "05"},
      {"MOTOR VEHICLE THEFT", "0910", "AUTOMOBILE", "07"},
      {"DECEPTIVE PRACTICE", "1150", "CREDIT CARD FRAUD", "11"},
  };
  static const char* kLocations[] = {"STREET",      "RESIDENCE",         "APARTMENT", "SIDEWALK",
                                     "RETAIL STORE", "PARKING LOT",      "RESTAURANT", "SMALL RETAIL STORE",
                                     "ALLEY",       "DEPARTMENT STORE", "OTHER"};
  static const char* kStreets[] = {"W MADISON ST", "N STATE ST",    "S HALSTED ST", "W 63RD ST",   "N CLARK ST",
                                   "S ASHLAND AVE", "W NORTH AVE",  "N LAKE SHORE DR", "S COTTAGE GROVE AVE",
                                   "W FOSTER AVE",  "N LINCOLN AVE", "W RIVER TRL",  "E 79TH ST",   "S KEDZIE AVE",
                                   "W CERMAK RD",   "N SHERIDAN RD", "S PULASKI RD", "W ADDISON ST"};
  Rng rng(seed);
  csv::write_row(out, {"ID", "Case Number", "Date", "Block", "IUCR", "Primary Type", "Description",
                       "Location Description", "Arrest", "Domestic", "Beat", "District", "Ward", "Community Area",
                       "FBI Code", "X Coordinate", "Y Coordinate", "Year", "Updated On", "Latitude", "Longitude",
                       "Location"});
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    const int year = 2015 + static_cast<int>(rng.uniform_index(9));
    const int month = 1 + static_cast<int>(rng.uniform_index(12));
    const int day = 1 + static_cast<int>(rng.uniform_index(28));
    const int hour = static_cast<int>(rng.uniform_index(24));
    const int minute = static_cast<int>(rng.uniform_index(60));
    const std::size_t loc = rng.uniform_index(std::size(kLocations));
    const std::size_t street = rng.uniform_index(std::size(kStreets));
    const bool domestic = rng.uniform01() < (loc == 1 || loc == 2 ? 0.35 : 0.05);
    const int district = 1 + static_cast<int>(rng.uniform_index(25));
    const int beat = district * 100 + 10 + static_cast<int>(rng.uniform_index(30));

    // Theft odds rise in shops, on weekday afternoons and on ST blocks.
    double z = -1.9;
    if (loc == 4 || loc == 7 || loc == 9) z += 2.0;
    if (loc == 1 || loc == 2) z -= 0.8;
    if (hour >= 11 && hour <= 18) z += 0.8;
    if (domestic) z -= 1.5;
    if (std::string(kStreets[street]).ends_with(" ST")) z += 0.4;
    const bool theft = rng.uniform01() < 1.0 / (1.0 + std::exp(-z));
    const std::size_t offence = theft ? rng.uniform_index(3) : 3 + rng.uniform_index(std::size(kOffences) - 3);
    const Offence& o = kOffences[offence];

    const double x = 1100000.0 + 4000.0 * district + rng.uniform(0.0, 20000.0);
    const double y = 1820000.0 + 5000.0 * ((district * 7) % 25) + rng.uniform(0.0, 25000.0);
    const double lat = 41.64 + (y - 1813000.0) / 364000.0;
    const double lon = -87.94 + (x - 1091000.0) / 274000.0;

    std::vector<std::string> row;
    row.push_back(std::to_string(10000000 + i));
    std::snprintf(buf, sizeof(buf), "JA%06zu", i);
    row.push_back(buf);
    std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d %02d:%02d:00 %s", month, day, year,
                  hour % 12 == 0 ? 12 : hour % 12, minute, hour < 12 ? "AM" : "PM");
    row.push_back(buf);
    std::snprintf(buf, sizeof(buf), "%03dXX %s", static_cast<int>(rng.uniform_index(120)), kStreets[street]);
    row.push_back(buf);
    row.push_back(o.iucr);
    row.push_back(o.type);
    row.push_back(o.description);
    row.push_back(kLocations[loc]);
    row.push_back(rng.uniform01() < 0.2 ? "true" : "false");
    row.push_back(domestic ? "true" : "false");
    std::snprintf(buf, sizeof(buf), "%04d", beat);
    row.push_back(buf);
    row.push_back(std::to_string(district));
    row.push_back(rng.uniform01() < 0.01 ? "" : std::to_string(1 + (district * 2 + static_cast<int>(rng.uniform_index(3))) % 50));
    row.push_back(std::to_string(1 + (district * 3 + static_cast<int>(rng.uniform_index(4))) % 77));
    row.push_back(o.fbi);
    const bool no_coords = rng.uniform01() < 0.01;
    row.push_back(no_coords ? "" : std::to_string(static_cast<long>(x)));
    row.push_back(no_coords ? "" : std::to_string(static_cast<long>(y)));
    row.push_back(std::to_string(year));
    row.push_back("02/10/2024 03:46:28 PM");
    std::snprintf(buf, sizeof(buf), "%.9f", lat);
    row.push_back(no_coords ? "" : buf);
    std::snprintf(buf, sizeof(buf), "%.9f", lon);
    row.push_back(no_coords ? "" : buf);
    std::snprintf(buf, sizeof(buf), "(%.9f, %.9f)", lat, lon);
    row.push_back(no_coords ? "" : buf);
    csv::write_row(out, row);
  }
}

}  // namespace crimepred::testing
