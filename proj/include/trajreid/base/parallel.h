// Copyright 2026 The trajreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJREID_BASE_PARALLEL_H_
#define TRAJREID_BASE_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace trajreid {

namespace internal {
inline std::atomic<int>& MaxWorkersSlot() {
  static std::atomic<int> workers{0};
  return workers;
}
}  // namespace internal

// Process-wide cap on worker threads. Zero or negative means "all cores".
inline void SetMaxWorkers(int workers) {
  internal::MaxWorkersSlot().store(workers);
}

inline int MaxWorkers() {
  int w = internal::MaxWorkersSlot().load();
  if (w <= 0) {
    w = static_cast<int>(std::thread::hardware_concurrency());
  }
  return std::max(w, 1);
}

// Runs fn(i) for i in [0, n). Work items are handed out in contiguous
// chunks; fn must only write to state owned by index i.
template <typename Fn>
void ParallelFor(size_t n, Fn&& fn) {
  const size_t workers =
      std::min<size_t>(static_cast<size_t>(MaxWorkers()), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  const size_t chunk = std::max<size_t>(1, n / (workers * 8));
  auto body = [&] {
    for (;;) {
      const size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      const size_t end = std::min(n, begin + chunk);
      for (size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (size_t t = 1; t < workers; ++t) threads.emplace_back(body);
  body();
}

}  // namespace trajreid

#endif  // TRAJREID_BASE_PARALLEL_H_
