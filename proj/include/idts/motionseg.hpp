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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idts/box.hpp"
#include "idts/error.hpp"
#include "idts/mask.hpp"

namespace idts {

enum class FusionMode { kUnion, kIntersection, kBgOnly };

inline FusionMode ParseFusionMode(const std::string& s) {
  if (s == "union") return FusionMode::kUnion;
  if (s == "intersection") return FusionMode::kIntersection;
  if (s == "bg_only") return FusionMode::kBgOnly;
  throw UsageError("unknown fusion mode '" + s + "' (union|intersection|bg_only)");
}

inline Mask FuseMasks(const Mask& bg, const Mask& fl, FusionMode mode) {
  CheckSameSize(bg.width, bg.height, fl.width, fl.height, "fuse_masks");
  Mask out(bg.width, bg.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (mode) {
      case FusionMode::kUnion: out.bits[i] = bg.bits[i] | fl.bits[i]; break;
      case FusionMode::kIntersection: out.bits[i] = bg.bits[i] & fl.bits[i]; break;
      case FusionMode::kBgOnly: out.bits[i] = bg.bits[i]; break;
    }
  }
  return out;
}

/// Sets every pixel of `box` (clipped to the mask) to foreground.
inline void PaintBox(Mask& mask, const Box& box) {
  const Box c = ClipBox(box, mask.width, mask.height);
  const int x0 = static_cast<int>(c.x);
  const int y0 = static_cast<int>(c.y);
  const int x1 = static_cast<int>(c.right() + 0.5);
  const int y1 = static_cast<int>(c.bottom() + 0.5);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) mask.set(x, y);
  }
}

namespace detail {

// 3x3 min (erode) or max (dilate) with out-of-frame pixels as background.
// Separable: horizontal pass then vertical pass.
inline Mask Morph3x3(const Mask& in, bool erode) {
  const int w = in.width;
  const int h = in.height;
  Mask tmp(w, h);
  Mask out(w, h);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = in.bits.data() + static_cast<std::size_t>(y) * w;
    std::uint8_t* dst = tmp.bits.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::uint8_t l = x > 0 ? row[x - 1] : 0;
      const std::uint8_t r = x + 1 < w ? row[x + 1] : 0;
      dst[x] = erode ? (l & row[x] & r) : (l | row[x] | r);
    }
  }
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* mid = tmp.bits.data() + static_cast<std::size_t>(y) * w;
    const std::uint8_t* up = y > 0 ? mid - w : nullptr;
    const std::uint8_t* down = y + 1 < h ? mid + w : nullptr;
    std::uint8_t* dst = out.bits.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::uint8_t u = up ? up[x] : 0;
      const std::uint8_t d = down ? down[x] : 0;
      dst[x] = erode ? (u & mid[x] & d) : (u | mid[x] | d);
    }
  }
  return out;
}

}  // namespace detail

inline Mask Erode3x3(const Mask& m) { return detail::Morph3x3(m, true); }
inline Mask Dilate3x3(const Mask& m) { return detail::Morph3x3(m, false); }

/// Opening (removes speckle) followed by closing (fills pinholes).
inline Mask MorphClean(const Mask& mask) {
  return Erode3x3(Dilate3x3(Dilate3x3(Erode3x3(mask))));
}

struct Blob {
  Box box;
  int area = 0;
  double cx = 0;
  double cy = 0;
};

/// 8-connected components of at least `min_area` pixels, ordered by the
/// (y, x) of their box origin.
inline std::vector<Blob> ConnectedComponents(const Mask& mask, int min_area) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<int> label(mask.size(), -1);
  std::vector<int> stack;
  std::vector<Blob> blobs;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const std::size_t seed = static_cast<std::size_t>(sy) * w + sx;
      if (!mask.bits[seed] || label[seed] >= 0) continue;
      const int id = static_cast<int>(blobs.size());
      int min_x = sx, max_x = sx, min_y = sy, max_y = sy;
      long long area = 0;
      double sum_x = 0;
      double sum_y = 0;
      label[seed] = id;
      stack.assign(1, static_cast<int>(seed));
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int px = p % w;
        const int py = p / w;
        ++area;
        sum_x += px;
        sum_y += py;
        min_x = std::min(min_x, px);
        max_x = std::max(max_x, px);
        min_y = std::min(min_y, py);
        max_y = std::max(max_y, py);
        for (int dy = -1; dy <= 1; ++dy) {
          const int ny = py + dy;
          if (ny < 0 || ny >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx;
            if (nx < 0 || nx >= w) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
            if (mask.bits[n] && label[n] < 0) {
              label[n] = id;
              stack.push_back(static_cast<int>(n));
            }
          }
        }
      }
      Blob blob;
      blob.box = {static_cast<double>(min_x), static_cast<double>(min_y),
                  static_cast<double>(max_x - min_x + 1),
                  static_cast<double>(max_y - min_y + 1)};
      blob.area = static_cast<int>(area);
      blob.cx = sum_x / static_cast<double>(area);
      blob.cy = sum_y / static_cast<double>(area);
      blobs.push_back(blob);
    }
  }
  std::vector<Blob> kept;
  for (const auto& b : blobs) {
    if (b.area >= min_area) kept.push_back(b);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Blob& a, const Blob& b) {
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    return a.box.x < b.box.x;
  });
  return kept;
}

/// Fraction of foreground pixels.
inline double ActivityScore(const Mask& mask) {
  if (mask.size() == 0) return 0.0;
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

struct SegmenterParams {
  double t_on = 0.005;
  double t_off = 0.002;
  int n_on = 3;
  int n_off = 30;
  int pre_roll = 15;
  int post_roll = 15;

  void Validate() const {
    if (!(t_off < t_on)) throw UsageError("segmenter.t_off must be < t_on");
    if (!(t_off >= 0 && t_on <= 1)) throw UsageError("segmenter thresholds must lie in [0,1]");
    if (n_on < 1 || n_off < 1) throw UsageError("segmenter.n_on and n_off must be >= 1");
    if (pre_roll < 0 || post_roll < 0) throw UsageError("segmenter rolls must be >= 0");
    // Keeps every clip end at or before the frame that triggers it.
    if (post_roll > n_off) throw UsageError("segmenter.post_roll must be <= n_off");
  }
};

struct ClipEvent {
  enum class Kind { kStart, kEnd };
  Kind kind;
  std::int64_t frame;
  int clip_id;

  friend bool operator==(const ClipEvent&, const ClipEvent&) = default;
};

/// Hysteresis clip segmenter over a per-frame activity score stream.
///
/// Idle: a clip starts after n_on consecutive scores above t_on, backdated to
/// the first of those frames minus pre_roll. Recording: it ends after n_off
/// consecutive scores below t_off, at the last active frame plus post_roll.
/// Starts never reach back into the previous clip.
class Segmenter {
 public:
  enum class Mode { kIdle, kRecording };

  explicit Segmenter(const SegmenterParams& params = {}) : params_(params) {
    params_.Validate();
  }

  Mode mode() const { return mode_; }
  int consec_above() const { return consec_above_; }
  int consec_below() const { return consec_below_; }
  std::optional<std::int64_t> current_clip_start() const { return clip_start_; }
  const SegmenterParams& params() const { return params_; }

  std::optional<ClipEvent> Step(double score, std::int64_t frame) {
    if (last_frame_ && frame <= *last_frame_) {
      throw UsageError("segmenter: frame " + std::to_string(frame) +
                       " is not after " + std::to_string(*last_frame_));
    }
    last_frame_ = frame;
    if (mode_ == Mode::kIdle) {
      consec_above_ = score > params_.t_on ? consec_above_ + 1 : 0;
      if (consec_above_ < params_.n_on) return std::nullopt;
      std::int64_t start = std::max<std::int64_t>(
          0, frame - params_.n_on + 1 - params_.pre_roll);
      if (last_end_) start = std::max(start, *last_end_ + 1);
      mode_ = Mode::kRecording;
      consec_above_ = 0;
      consec_below_ = 0;
      clip_start_ = start;
      return ClipEvent{ClipEvent::Kind::kStart, start, next_clip_id_};
    }
    consec_below_ = score < params_.t_off ? consec_below_ + 1 : 0;
    if (consec_below_ < params_.n_off) return std::nullopt;
    const std::int64_t end =
        std::max(*clip_start_, frame - params_.n_off + params_.post_roll);
    return Close(end);
  }

  /// Closes an open clip at end of stream.
  std::optional<ClipEvent> Flush(std::int64_t last_frame) {
    if (mode_ != Mode::kRecording) return std::nullopt;
    return Close(std::max(*clip_start_, last_frame));
  }

 private:
  ClipEvent Close(std::int64_t end) {
    ClipEvent ev{ClipEvent::Kind::kEnd, end, next_clip_id_};
    ++next_clip_id_;
    mode_ = Mode::kIdle;
    consec_above_ = 0;
    consec_below_ = 0;
    clip_start_.reset();
    last_end_ = end;
    return ev;
  }

  SegmenterParams params_;
  Mode mode_ = Mode::kIdle;
  int consec_above_ = 0;
  int consec_below_ = 0;
  std::optional<std::int64_t> clip_start_;
  std::optional<std::int64_t> last_end_;
  std::optional<std::int64_t> last_frame_;
  int next_clip_id_ = 0;
};

}  // namespace idts
