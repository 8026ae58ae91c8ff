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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "synthetic_data.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Writes a synthetic incident CSV in the Chicago schema"};
  std::size_t rows = 1000;
  std::uint64_t seed = 1;
  std::string out;
  app.add_option("--rows", rows, "Number of data rows");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--out", out, "Output file (default: stdout)");
  CLI11_PARSE(app, argc, argv);
  if (out.empty()) {
    crimepred::testing::write_synthetic_csv(std::cout, rows, seed);
    return 0;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) {
    std::cerr << "cannot write " << out << "\n";
    return 1;
  }
  crimepred::testing::write_synthetic_csv(file, rows, seed);
  return 0;
}
