// Copyright (c) 2026 The ctcmarg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "ctcmarg/errors.hpp"

namespace ctcmarg {

// Runs fn(i) for i in [0, count) across up to num_workers threads.
// Each index is processed exactly once; fn must write only to its own
// slot so results are identical to the sequential order regardless of
// worker count. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(int64_t count, int32_t num_workers, Fn&& fn) {
  if (num_workers < 1) throw ConfigError("worker count must be >= 1");
  if (count <= 0) return;
  if (num_workers == 1 || count == 1) {
    for (int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  int32_t threads = static_cast<int32_t>(
      std::min<int64_t>(num_workers, count));
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int32_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int64_t i = w; i < count; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ctcmarg
