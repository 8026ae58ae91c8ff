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

#include "crimepred/parallel.hpp"

#include <atomic>

namespace crimepred {
namespace {
std::atomic<std::size_t> g_max_jobs{1};
}  // namespace

void set_max_jobs(std::size_t jobs) { g_max_jobs = jobs == 0 ? 1 : jobs; }
std::size_t max_jobs() { return g_max_jobs; }

}  // namespace crimepred
