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
#ifndef REBLUR_PARALLEL_HPP_
#define REBLUR_PARALLEL_HPP_

#include <functional>

namespace reblur {

// Process-wide cap on worker threads used by the gather-style kernels.
// Values < 1 reset to the hardware concurrency.
void set_num_threads(int threads);
int num_threads();

// Splits [0, rows) into contiguous bands and runs fn(begin, end) for each.
// Every band writes a disjoint set of rows, so results never depend on the
// number of threads.
void parallel_for_rows(int rows, const std::function<void(int, int)>& fn);

}  // namespace reblur

#endif  // REBLUR_PARALLEL_HPP_
