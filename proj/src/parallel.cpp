/* Copyright 2026 The Reblur Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "reblur/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace reblur {

namespace {

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> threads{hardware_threads()};
  return threads;
}

// Below this many rows per band the spawn cost dominates.
constexpr int kMinRowsPerBand = 8;

}  // namespace

void set_num_threads(int threads) {
  thread_setting().store(threads < 1 ? hardware_threads() : threads);
}

int num_threads() { return thread_setting().load(); }

void parallel_for_rows(int rows, const std::function<void(int, int)>& fn) {
  if (rows <= 0) return;
  const int bands = std::clamp(rows / kMinRowsPerBand, 1, num_threads());
  if (bands == 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(bands - 1));
  const int per_band = (rows + bands - 1) / bands;
  for (int b = 1; b < bands; ++b) {
    const int begin = b * per_band;
    const int end = std::min(rows, begin + per_band);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0, std::min(rows, per_band));
  for (auto& w : workers) w.join();
}

}  // namespace reblur
