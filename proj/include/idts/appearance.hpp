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
#include <array>
#include <cmath>

#include "idts/box.hpp"
#include "idts/frame_io.hpp"

namespace idts {

/// 32-bin L1-normalised grey-level histogram of a box interior. Stands in
/// for a learned appearance embedding; anything with the same Compute /
/// Distance shape can replace it.
struct Histogram {
  static constexpr int kBins = 32;
  std::array<double, kBins> bins{};

  static Histogram Uniform() {
    Histogram h;
    h.bins.fill(1.0 / kBins);
    return h;
  }

  /// Pixels whose centres fall inside `box` (clipped to the frame).
  static Histogram Compute(const Frame& frame, const Box& box) {
    const Box c = ClipBox(box, frame.width, frame.height);
    const int x0 = static_cast<int>(std::ceil(c.x - 0.5));
    const int y0 = static_cast<int>(std::ceil(c.y - 0.5));
    const int x1 = static_cast<int>(std::ceil(c.right() - 0.5));
    const int y1 = static_cast<int>(std::ceil(c.bottom() - 0.5));
    Histogram h;
    long long n = 0;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        h.bins[frame.at(x, y) / (256 / kBins)] += 1.0;
        ++n;
      }
    }
    if (n == 0) return Uniform();
    for (auto& b : h.bins) b /= static_cast<double>(n);
    return h;
  }

  /// Bhattacharyya distance in [0, 1].
  static double Distance(const Histogram& p, const Histogram& q) {
    double bc = 0.0;
    for (int i = 0; i < kBins; ++i) bc += std::sqrt(p.bins[i] * q.bins[i]);
    return std::sqrt(std::max(0.0, 1.0 - bc));
  }

  /// (1 - rate) * this + rate * other, renormalised.
  void Blend(const Histogram& other, double rate) {
    double total = 0.0;
    for (int i = 0; i < kBins; ++i) {
      bins[i] = (1.0 - rate) * bins[i] + rate * other.bins[i];
      total += bins[i];
    }
    for (auto& b : bins) b /= total;
  }
};

}  // namespace idts
