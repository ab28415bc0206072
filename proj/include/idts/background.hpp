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
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "idts/error.hpp"
#include "idts/frame_io.hpp"
#include "idts/mask.hpp"
#include "idts/parallel.hpp"

namespace idts {

/// Foreground where the absolute inter-frame difference exceeds `threshold`.
inline Mask FrameDiff(const Frame& prev, const Frame& curr, int threshold) {
  CheckSameSize(prev.width, prev.height, curr.width, curr.height, "frame_diff");
  Mask mask(curr.width, curr.height);
  for (std::size_t i = 0; i < curr.size(); ++i) {
    const int d = std::abs(int{curr.pixels[i]} - int{prev.pixels[i]});
    mask.bits[i] = d > threshold ? 1 : 0;
  }
  return mask;
}

struct GaussianComponent {
  float weight = 0;
  float mean = 0;
  float variance = 0;
};

struct GmmParams {
  int components = 3;
  float alpha = 0.005f;
  float match_sigmas = 2.5f;
  float bg_threshold = 0.7f;
  float variance_init = 225.0f;
  float variance_floor = 4.0f;
  float weight_init = 0.05f;

  void Validate() const {
    if (components < 2 || components > 5) {
      throw UsageError("background.components must be in [2,5]");
    }
    if (!(alpha > 0 && alpha < 1)) throw UsageError("background.alpha must be in (0,1)");
    if (!(match_sigmas > 0)) throw UsageError("background.match_sigmas must be > 0");
    if (!(bg_threshold > 0 && bg_threshold < 1)) {
      throw UsageError("background.bg_threshold must be in (0,1)");
    }
    if (!(variance_floor > 0) || !(variance_init >= variance_floor)) {
      throw UsageError("background.variance_init must be >= variance_floor > 0");
    }
    if (!(weight_init > 0 && weight_init < 1)) {
      throw UsageError("background.weight_init must be in (0,1)");
    }
  }
};

/// Per-pixel adaptive mixture of Gaussians over intensity.
///
/// Each pixel keeps `components` Gaussians ranked by weight/sigma. A pixel
/// is background when its first matching component lies in the shortest
/// ranked prefix whose cumulative weight exceeds bg_threshold. Matching and
/// classification use the state before the frame's update. Components with
/// zero weight have never been observed and are skipped when matching.
class GmmModel {
 public:
  GmmModel(int width, int height, const GmmParams& params = {})
      : width_(width), height_(height), params_(params) {
    params_.Validate();
    if (width < 1 || height < 1) throw UsageError("gmm: empty frame size");
    const std::size_t k = static_cast<std::size_t>(params_.components);
    comps_.assign(static_cast<std::size_t>(width) * height * k,
                  GaussianComponent{0.0f, 0.0f, params_.variance_init});
    for (std::size_t p = 0; p < comps_.size(); p += k) comps_[p].weight = 1.0f;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  const GmmParams& params() const { return params_; }
  std::int64_t frames_seen() const { return frames_seen_; }

  std::span<const GaussianComponent> pixel(std::size_t index) const {
    const std::size_t k = static_cast<std::size_t>(params_.components);
    return {comps_.data() + index * k, k};
  }
  const std::vector<GaussianComponent>& state() const { return comps_; }

  /// Classifies `frame` against the current model and then folds it in. The
  /// first frame seeds the leading component's mean with the observed pixel,
  /// so it always classifies as background.
  Mask Apply(const Frame& frame, const Workers& workers = Workers::Serial()) {
    CheckSameSize(width_, height_, frame.width, frame.height, "gmm_apply");
    Mask mask(width_, height_);
    const bool seed = frames_seen_ == 0;
    const std::size_t k = static_cast<std::size_t>(params_.components);
    workers.ForRows(static_cast<std::size_t>(height_),
                    [&](std::size_t y0, std::size_t y1) {
      for (std::size_t i = y0 * width_; i < y1 * width_; ++i) {
        GaussianComponent* c = comps_.data() + i * k;
        const float x = frame.pixels[i];
        if (seed) c[0].mean = x;
        mask.bits[i] = UpdatePixel(c, x) ? 1 : 0;
      }
    });
    ++frames_seen_;
    return mask;
  }

  /// Mean of the top-ranked component per pixel.
  Frame BackgroundImage() const {
    Frame out(width_, height_);
    const std::size_t k = static_cast<std::size_t>(params_.components);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const float m = comps_[i * k].mean;
      out.pixels[i] =
          static_cast<std::uint8_t>(std::clamp(std::lround(m), 0L, 255L));
    }
    return out;
  }

 private:
  // Returns true for foreground.
  bool UpdatePixel(GaussianComponent* c, float x) const {
    const int k = params_.components;
    const float ms2 = params_.match_sigmas * params_.match_sigmas;
    int matched = -1;
    for (int j = 0; j < k; ++j) {
      if (c[j].weight <= 0.0f) continue;
      const float d = x - c[j].mean;
      if (d * d <= ms2 * c[j].variance) {
        matched = j;
        break;
      }
    }

    bool foreground = true;
    if (matched >= 0) {
      float cumulative = 0.0f;
      int background_count = k;
      for (int j = 0; j < k; ++j) {
        cumulative += c[j].weight;
        if (cumulative > params_.bg_threshold) {
          background_count = j + 1;
          break;
        }
      }
      foreground = matched >= background_count;
    }

    const float a = params_.alpha;
    const float keep = 1.0f - a;
    for (int j = 0; j < k; ++j) {
      c[j].weight = keep * c[j].weight + (j == matched ? a : 0.0f);
    }
    if (matched >= 0) {
      GaussianComponent& m = c[matched];
      m.mean = keep * m.mean + a * x;
      const float d = x - m.mean;
      m.variance = std::max(params_.variance_floor, keep * m.variance + a * d * d);
    } else {
      c[k - 1] = {params_.weight_init, x, params_.variance_init};
    }

    float total = 0.0f;
    for (int j = 0; j < k; ++j) total += c[j].weight;
    for (int j = 0; j < k; ++j) c[j].weight /= total;

    // Stable insertion sort by weight/sigma, descending.
    float key[5];
    for (int j = 0; j < k; ++j) key[j] = c[j].weight / std::sqrt(c[j].variance);
    for (int j = 1; j < k; ++j) {
      const GaussianComponent held = c[j];
      const float held_key = key[j];
      int i = j - 1;
      while (i >= 0 && key[i] < held_key) {
        c[i + 1] = c[i];
        key[i + 1] = key[i];
        --i;
      }
      c[i + 1] = held;
      key[i + 1] = held_key;
    }
    return foreground;
  }

  int width_;
  int height_;
  GmmParams params_;
  std::vector<GaussianComponent> comps_;
  std::int64_t frames_seen_ = 0;
};

}  // namespace idts
