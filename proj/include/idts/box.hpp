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
#include <cmath>

namespace idts {

/// Axis-aligned box, top-left origin, in pixels.
struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double cx() const { return x + w / 2; }
  double cy() const { return y + h / 2; }

  static Box FromCenter(double cx, double cy, double w, double h) {
    return {cx - w / 2, cy - h / 2, w, h};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline double IntersectionArea(const Box& a, const Box& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0;
  return iw * ih;
}

/// Intersection over union; 0 when the union is empty.
inline double Iou(const Box& a, const Box& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0;
  return inter / uni;
}

/// Clips `b` to [0,width)x[0,height). Boxes entirely outside come back with
/// zero width or height.
inline Box ClipBox(const Box& b, int width, int height) {
  const double x0 = std::clamp(b.x, 0.0, static_cast<double>(width));
  const double y0 = std::clamp(b.y, 0.0, static_cast<double>(height));
  const double x1 = std::clamp(b.right(), 0.0, static_cast<double>(width));
  const double y1 = std::clamp(b.bottom(), 0.0, static_cast<double>(height));
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

}  // namespace idts
