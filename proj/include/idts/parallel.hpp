// Copyright 2026 The idts Authors.
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

#include <algorithm>
#include <cstddef>
#include <memory>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/parallel_invoke.h>
#include <tbb/task_arena.h>

namespace idts {

/// A fixed-width worker pool for data-parallel row loops. Work items handed
/// to ForRows() must be independent, which makes the result identical for
/// every thread count.
class Workers {
 public:
  explicit Workers(int threads = 1) : threads_(std::max(1, threads)) {
    if (threads_ > 1) arena_ = std::make_unique<tbb::task_arena>(threads_);
  }

  int threads() const { return threads_; }

  /// Calls body(begin, end) over disjoint tiles covering [0, n).
  template <typename Body>
  void ForRows(std::size_t n, Body&& body) const {
    if (n == 0) return;
    if (!arena_) {
      body(std::size_t{0}, n);
      return;
    }
    const std::size_t grain =
        std::max<std::size_t>(1, n / (4 * static_cast<std::size_t>(threads_)));
    arena_->execute([&] {
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, grain),
                        [&](const tbb::blocked_range<std::size_t>& r) {
                          body(r.begin(), r.end());
                        });
    });
  }

  /// Runs two independent jobs, concurrently when threads allow.
  template <typename A, typename B>
  void Invoke(A&& a, B&& b) const {
    if (!arena_) {
      a();
      b();
      return;
    }
    arena_->execute([&] { tbb::parallel_invoke(a, b); });
  }

  static const Workers& Serial() {
    static const Workers serial(1);
    return serial;
  }

 private:
  int threads_;
  std::unique_ptr<tbb::task_arena> arena_;
};

}  // namespace idts
