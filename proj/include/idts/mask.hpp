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

#include <cstdint>
#include <vector>

#include "idts/error.hpp"
#include "idts/frame_io.hpp"

namespace idts {

/// Per-pixel foreground flags (1 = foreground), row-major.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h, bool fill = false)
      : width(w), height(h),
        bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
             fill ? 1 : 0) {}

  std::size_t size() const { return bits.size(); }
  bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v = true) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }

  friend bool operator==(const Mask&, const Mask&) = default;
};

inline void CheckSameSize(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    throw FormatError(std::string(what) + ": dimension mismatch " +
                      std::to_string(w0) + "x" + std::to_string(h0) + " vs " +
                      std::to_string(w1) + "x" + std::to_string(h1));
  }
}

/// 0/255 rendering for debug dumps.
inline Frame MaskToFrame(const Mask& mask) {
  Frame f(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    f.pixels[i] = mask.bits[i] ? 255 : 0;
  }
  return f;
}

}  // namespace idts
