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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "idts/box.hpp"
#include "idts/error.hpp"
#include "idts/exchange.hpp"
#include "idts/mask.hpp"
#include "idts/motionseg.hpp"

namespace idts {

enum class DetectionSource { kBlob, kExternal };

struct Detection {
  std::int64_t frame = 0;
  Box box;
  double score = 0;
  std::string class_label = "object";
  DetectionSource source = DetectionSource::kBlob;
  // Pyramid level the blob was found at (0 = full resolution).
  int level = 0;
  // Set by ContextualFilter when the box reaches into the border band.
  bool border = false;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct ContextPrior {
  double min_area = 50;
  double max_area_fraction = 0.5;
  double aspect_min = 0.2;
  double aspect_max = 5.0;
  int border_band = 8;

  void Validate() const {
    if (!(min_area >= 0)) throw UsageError("detect.min_area must be >= 0");
    if (!(max_area_fraction > 0 && max_area_fraction <= 1)) {
      throw UsageError("detect.max_area_fraction must be in (0,1]");
    }
    if (!(aspect_min > 0 && aspect_min < aspect_max)) {
      throw UsageError("detect aspect range must satisfy 0 < min < max");
    }
    if (border_band < 0) throw UsageError("detect.border_band must be >= 0");
  }
};

/// 2x reduction: a superpixel is set when at least half of its in-frame
/// source pixels are set.
inline Mask DownsampleMask(const Mask& src) {
  Mask dst((src.width + 1) / 2, (src.height + 1) / 2);
  for (int y = 0; y < dst.height; ++y) {
    for (int x = 0; x < dst.width; ++x) {
      int set = 0;
      int total = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int sx = 2 * x + dx;
          const int sy = 2 * y + dy;
          if (sx >= src.width || sy >= src.height) continue;
          ++total;
          set += src.at(sx, sy) ? 1 : 0;
        }
      }
      if (2 * set >= total) dst.set(x, y);
    }
  }
  return dst;
}

/// Greedy non-maximum suppression. Candidates are visited by descending
/// score, then finer pyramid level, then larger area, then (y, x); a
/// candidate survives when its IoU with every survivor is <= iou_threshold.
inline std::vector<Detection> Nms(std::vector<Detection> dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.level != b.level) return a.level < b.level;
    if (a.box.area() != b.box.area()) return a.box.area() > b.box.area();
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    return a.box.x < b.box.x;
  });
  std::vector<Detection> kept;
  for (auto& d : dets) {
    bool keep = true;
    for (const auto& k : kept) {
      if (Iou(d.box, k.box) > iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(std::move(d));
  }
  return kept;
}

/// Blob candidates from every pyramid level, mapped back to full resolution
/// and clipped to the frame, before suppression.
inline std::vector<Detection> MultiscaleCandidates(const Mask& mask, int levels,
                                                   double min_area) {
  if (levels < 1) throw UsageError("detect.levels must be >= 1");
  std::vector<Detection> out;
  Mask current = mask;
  for (int level = 0; level < levels; ++level) {
    if (level > 0) current = DownsampleMask(current);
    const double scale = std::ldexp(1.0, level);
    const double area_scale = scale * scale;
    const int level_min = std::max(1, static_cast<int>(std::ceil(min_area / area_scale)));
    for (const auto& blob : ConnectedComponents(current, level_min)) {
      Detection d;
      d.level = level;
      d.box = ClipBox({blob.box.x * scale, blob.box.y * scale, blob.box.w * scale,
                       blob.box.h * scale},
                      mask.width, mask.height);
      const double full_area = blob.area * area_scale;
      d.score = std::min(1.0, full_area / (4.0 * std::max(1.0, min_area)));
      out.push_back(d);
    }
    if (current.width == 1 && current.height == 1) break;
  }
  return out;
}

inline std::vector<Detection> DetectMultiscale(const Mask& mask, int levels,
                                               double min_area,
                                               double iou_threshold = 0.5) {
  return Nms(MultiscaleCandidates(mask, levels, min_area), iou_threshold);
}

/// Drops implausible sizes and aspect ratios; flags boxes in the border band.
inline std::vector<Detection> ContextualFilter(const std::vector<Detection>& dets,
                                               const ContextPrior& prior,
                                               int frame_width, int frame_height) {
  const double frame_area = static_cast<double>(frame_width) * frame_height;
  std::vector<Detection> out;
  for (const auto& d : dets) {
    const double area = d.box.area();
    if (area < prior.min_area) continue;
    if (area > prior.max_area_fraction * frame_area) continue;
    if (d.box.h <= 0) continue;
    const double aspect = d.box.w / d.box.h;
    if (aspect < prior.aspect_min || aspect > prior.aspect_max) continue;
    Detection kept = d;
    const double band = prior.border_band;
    kept.border = d.box.x < band || d.box.y < band ||
                  d.box.right() > frame_width - band ||
                  d.box.bottom() > frame_height - band;
    out.push_back(kept);
  }
  return out;
}

/// External detections win: blob detections overlapping any external box
/// with IoU > 0.5 are dropped. The union is then context filtered.
inline std::vector<Detection> MergeDetections(const std::vector<Detection>& blobs,
                                              const std::vector<Detection>& external,
                                              const ContextPrior& prior,
                                              int frame_width, int frame_height) {
  std::vector<Detection> merged;
  for (const auto& e : external) {
    Detection c = e;
    c.box = ClipBox(e.box, frame_width, frame_height);
    merged.push_back(c);
  }
  const std::size_t external_count = merged.size();
  for (const auto& b : blobs) {
    bool shadowed = false;
    for (std::size_t i = 0; i < external_count; ++i) {
      const auto& e = merged[i];
      if (Iou(b.box, e.box) > 0.5) {
        shadowed = true;
        break;
      }
    }
    if (!shadowed) merged.push_back(b);
  }
  return ContextualFilter(merged, prior, frame_width, frame_height);
}

using DetectionsByFrame = std::map<std::int64_t, std::vector<Detection>>;

inline DetectionsByFrame GroupExternal(const std::vector<ExchangeRecord>& records) {
  DetectionsByFrame out;
  for (const auto& r : records) {
    Detection d;
    d.frame = r.frame;
    d.box = r.box;
    d.score = r.score;
    d.class_label = r.label;
    d.source = DetectionSource::kExternal;
    out[r.frame].push_back(d);
  }
  return out;
}

inline DetectionsByFrame LoadExternalDetections(const std::filesystem::path& path) {
  return GroupExternal(ReadExchangeFile(path));
}

inline ExchangeRecord ToExchange(const Detection& d, std::int64_t id = -1) {
  return {d.frame, id, d.box, d.score, d.class_label};
}

}  // namespace idts
