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
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "idts/box.hpp"
#include "idts/error.hpp"
#include "idts/frame_io.hpp"
#include "idts/parallel.hpp"

namespace idts {

/// (frame, value) knots of a piecewise-linear schedule; held constant
/// outside the first and last knot.
template <typename Value>
struct Keyframe {
  std::int64_t frame;
  Value value;
};

struct Point2 {
  double x = 0;
  double y = 0;
};

struct ObjectSpec {
  std::string class_label = "object";
  int intensity = 200;
  int width = 10;
  int height = 10;
  std::vector<Keyframe<Point2>> trajectory;  // frame -> box centre
  std::int64_t visible_first = 0;
  std::int64_t visible_last = INT64_MAX;
};

struct OccluderSpec {
  Box box;  // integer pixel rectangle
  int intensity = 120;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = INT64_MAX;

  bool active(std::int64_t f) const { return f >= first_frame && f <= last_frame; }
};

struct SceneSpec {
  int width = 320;
  int height = 240;
  int n_frames = 300;
  int background_level = 100;
  double noise_sigma = 2.0;
  double frame_rate = 30.0;
  std::vector<Keyframe<double>> illumination{{0, 1.0}};
  std::vector<ObjectSpec> objects;
  std::vector<OccluderSpec> occluders;
  std::uint64_t seed = 1;

  void Validate() const {
    if (width < 1 || height < 1) throw UsageError("scene: width/height must be >= 1");
    if (n_frames < 0) throw UsageError("scene: n_frames must be >= 0");
    if (noise_sigma < 0) throw UsageError("scene: noise_sigma must be >= 0");
    if (!(frame_rate > 0)) throw UsageError("scene: frame_rate must be > 0");
    if (illumination.empty()) throw UsageError("scene: illumination needs a knot");
    for (std::size_t i = 0; i < illumination.size(); ++i) {
      if (!(illumination[i].value > 0)) throw UsageError("scene: gains must be > 0");
      if (i > 0 && illumination[i].frame <= illumination[i - 1].frame) {
        throw UsageError("scene: illumination knots must be strictly increasing");
      }
    }
    for (const auto& o : objects) {
      if (o.width < 2 || o.height < 2) throw UsageError("scene: objects must be >= 2x2");
      if (o.trajectory.empty()) throw UsageError("scene: object needs a waypoint");
      for (std::size_t i = 1; i < o.trajectory.size(); ++i) {
        if (o.trajectory[i].frame <= o.trajectory[i - 1].frame) {
          throw UsageError("scene: waypoint frames must be strictly increasing");
        }
      }
    }
  }
};

template <typename Value, typename Lerp>
Value Interpolate(const std::vector<Keyframe<Value>>& keys, std::int64_t frame, Lerp lerp) {
  if (frame <= keys.front().frame) return keys.front().value;
  if (frame >= keys.back().frame) return keys.back().value;
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (frame <= keys[i].frame) {
      const auto& a = keys[i - 1];
      const auto& b = keys[i];
      const double t = static_cast<double>(frame - a.frame) /
                       static_cast<double>(b.frame - a.frame);
      return lerp(a.value, b.value, t);
    }
  }
  return keys.back().value;
}

inline double GainAt(const SceneSpec& spec, std::int64_t frame) {
  return Interpolate(spec.illumination, frame,
                     [](double a, double b, double t) { return a + (b - a) * t; });
}

inline Point2 CenterAt(const ObjectSpec& obj, std::int64_t frame) {
  return Interpolate(obj.trajectory, frame, [](Point2 a, Point2 b, double t) {
    return Point2{a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
  });
}

/// The painted rectangle before clipping: integer origin nearest to
/// centre - size/2.
inline Box PaintedBox(const ObjectSpec& obj, std::int64_t frame) {
  const Point2 c = CenterAt(obj, frame);
  const double x0 = std::floor(c.x - obj.width / 2.0 + 0.5);
  const double y0 = std::floor(c.y - obj.height / 2.0 + 0.5);
  return {x0, y0, static_cast<double>(obj.width), static_cast<double>(obj.height)};
}

namespace detail {

inline std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Standard normal deviate that depends only on (seed, frame, pixel), so
/// frames can be rendered in any order or in parallel.
inline double CounterGaussian(std::uint64_t seed, std::int64_t frame, std::uint64_t pixel) {
  const std::uint64_t key =
      detail::SplitMix64(seed ^ detail::SplitMix64(static_cast<std::uint64_t>(frame)));
  const std::uint64_t a = detail::SplitMix64(key ^ (pixel * 2));
  const std::uint64_t b = detail::SplitMix64(key ^ (pixel * 2 + 1));
  // u1 in (0, 1], u2 in [0, 1).
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct GtObject {
  int object_id;
  std::string class_label;
  Box box;  // clipped to the frame
  double occluded_fraction;
};

struct ActivityInterval {
  std::int64_t start;
  std::int64_t end;

  friend bool operator==(const ActivityInterval&, const ActivityInterval&) = default;
};

struct ObjectActivity {
  int object_id;
  std::int64_t start;
  std::int64_t end;
  std::string label;
};

struct GroundTruth {
  std::vector<std::vector<GtObject>> frames;
  std::vector<ActivityInterval> activity;
  std::vector<ObjectActivity> object_activity;
};

/// Occluded share of `box`: pixels covered by any active occluder over
/// the box area.
inline double OccludedFraction(const SceneSpec& spec, const Box& box, std::int64_t frame) {
  const double area = box.area();
  if (area <= 0) return 0.0;
  const int x0 = static_cast<int>(box.x), y0 = static_cast<int>(box.y);
  const int x1 = static_cast<int>(box.right()), y1 = static_cast<int>(box.bottom());
  long long covered = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (const auto& occ : spec.occluders) {
        if (occ.active(frame) && x >= occ.box.x && x < occ.box.right() &&
            y >= occ.box.y && y < occ.box.bottom()) {
          ++covered;
          break;
        }
      }
    }
  }
  return static_cast<double>(covered) / area;
}

/// Ground-truth objects of one frame: every object inside its visible range
/// whose painted box overlaps the frame.
inline std::vector<GtObject> GroundTruthAt(const SceneSpec& spec, std::int64_t frame) {
  std::vector<GtObject> out;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const ObjectSpec& obj = spec.objects[i];
    if (frame < obj.visible_first || frame > obj.visible_last) continue;
    const Box clipped = ClipBox(PaintedBox(obj, frame), spec.width, spec.height);
    if (clipped.area() <= 0) continue;
    out.push_back({static_cast<int>(i), obj.class_label, clipped,
                   OccludedFraction(spec, clipped, frame)});
  }
  return out;
}

inline Frame RenderFrame(const SceneSpec& spec, std::int64_t frame) {
  std::vector<int> level(static_cast<std::size_t>(spec.width) * spec.height,
                         spec.background_level);
  auto paint = [&](const Box& b, int value) {
    const Box c = ClipBox(b, spec.width, spec.height);
    for (int y = static_cast<int>(c.y); y < static_cast<int>(c.bottom()); ++y) {
      for (int x = static_cast<int>(c.x); x < static_cast<int>(c.right()); ++x) {
        level[static_cast<std::size_t>(y) * spec.width + x] = value;
      }
    }
  };
  for (const auto& obj : spec.objects) {
    if (frame < obj.visible_first || frame > obj.visible_last) continue;
    paint(PaintedBox(obj, frame), obj.intensity);
  }
  for (const auto& occ : spec.occluders) {
    if (occ.active(frame)) paint(occ.box, occ.intensity);
  }
  const double gain = GainAt(spec, frame);
  Frame out(spec.width, spec.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = gain * level[i];
    if (spec.noise_sigma > 0) v += spec.noise_sigma * CounterGaussian(spec.seed, frame, i);
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  out.index = frame;
  out.timestamp_ms = TimestampMs(frame, spec.frame_rate);
  return out;
}

/// Maximal runs of frames in which at least one object is visible and not
/// fully occluded.
inline std::vector<ActivityInterval> ActivityIntervals(
    const std::vector<std::vector<GtObject>>& frames) {
  std::vector<ActivityInterval> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    bool active = false;
    for (const auto& o : frames[f]) active = active || o.occluded_fraction < 1.0;
    if (!active) continue;
    const auto fi = static_cast<std::int64_t>(f);
    if (!out.empty() && out.back().end == fi - 1) {
      out.back().end = fi;
    } else {
      out.push_back({fi, fi});
    }
  }
  return out;
}

/// Analytic per-object motion labels over runs of constant trajectory
/// speed, in box heights per frame.
inline std::vector<ObjectActivity> ObjectActivities(const SceneSpec& spec) {
  std::vector<ObjectActivity> out;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const ObjectSpec& obj = spec.objects[i];
    const std::int64_t first = std::max<std::int64_t>(0, obj.visible_first);
    const std::int64_t last = std::min<std::int64_t>(spec.n_frames - 1, obj.visible_last);
    for (std::int64_t f = first; f <= last; ++f) {
      const Point2 a = CenterAt(obj, f);
      const Point2 b = CenterAt(obj, f + 1);
      const double speed = std::hypot(b.x - a.x, b.y - a.y) / obj.height;
      const char* label = speed < 0.02 ? "stationary" : speed < 0.15 ? "walking" : "running";
      if (!out.empty() && out.back().object_id == static_cast<int>(i) &&
          out.back().label == label && out.back().end == f - 1) {
        out.back().end = f;
      } else {
        out.push_back({static_cast<int>(i), f, f, label});
      }
    }
  }
  return out;
}

struct RenderedScene {
  std::vector<Frame> frames;
  GroundTruth truth;
};

/// Deterministic for a given scene (including its seed). Frames render in
/// parallel when `workers` has more than one thread.
inline RenderedScene RenderScene(const SceneSpec& spec,
                                 const Workers& workers = Workers::Serial()) {
  spec.Validate();
  RenderedScene scene;
  scene.frames.resize(static_cast<std::size_t>(spec.n_frames));
  scene.truth.frames.resize(static_cast<std::size_t>(spec.n_frames));
  workers.ForRows(scene.frames.size(), [&](std::size_t f0, std::size_t f1) {
    for (std::size_t f = f0; f < f1; ++f) {
      scene.frames[f] = RenderFrame(spec, static_cast<std::int64_t>(f));
      scene.truth.frames[f] = GroundTruthAt(spec, static_cast<std::int64_t>(f));
    }
  });
  scene.truth.activity = ActivityIntervals(scene.truth.frames);
  scene.truth.object_activity = ObjectActivities(spec);
  return scene;
}

inline ObjectSpec LinearWalker(std::string label, int intensity, int w, int h,
                               std::int64_t f0, Point2 p0, std::int64_t f1, Point2 p1) {
  ObjectSpec o;
  o.class_label = std::move(label);
  o.intensity = intensity;
  o.width = w;
  o.height = h;
  o.trajectory = {{f0, p0}, {f1, p1}};
  o.visible_first = f0;
  o.visible_last = f1;
  return o;
}

inline const std::vector<std::string>& PresetNames() {
  static const std::vector<std::string> names{
      "quiet", "single_walker", "three_objects", "occlusion_crossing", "illumination_ramp"};
  return names;
}

/// Canonical scenes used by the acceptance suite.
///
///   quiet               300 frames of static background, no objects.
///   single_walker       one 16x40 person crossing left to right at 1.5 px/frame.
///   three_objects       600 frames, noise sigma 2: two people and a car in
///                       separate lanes with staggered entries and exits.
///   occlusion_crossing  two people crossing behind a 40 px wide pillar in
///                       opposite directions at 3 px/frame, each fully
///                       hidden for 9 frames, and a car passing below the
///                       pillar unoccluded.
///   illumination_ramp   300 frames, no objects, gain 1.0 -> 1.3 -> 1.0,
///                       noise sigma 8.
inline SceneSpec Preset(const std::string& name) {
  SceneSpec s;
  s.width = 320;
  s.height = 240;
  s.background_level = 100;
  s.noise_sigma = 2.0;
  s.seed = 7;
  if (name == "quiet") {
    s.n_frames = 300;
  } else if (name == "single_walker") {
    s.n_frames = 300;
    s.objects.push_back(LinearWalker("person", 200, 16, 40, 30, {-8, 120}, 250, {322, 120}));
  } else if (name == "three_objects") {
    s.n_frames = 600;
    s.objects.push_back(LinearWalker("person", 190, 16, 40, 20, {-8, 50}, 360, {332, 50}));
    s.objects.push_back(LinearWalker("car", 30, 56, 26, 150, {350, 120}, 270, {-30, 120}));
    s.objects.push_back(LinearWalker("person", 170, 18, 44, 330, {-10, 195}, 580, {330, 195}));
  } else if (name == "occlusion_crossing") {
    s.n_frames = 300;
    s.objects.push_back(LinearWalker("person", 190, 16, 40, 20, {-8, 90}, 132, {328, 90}));
    s.objects.push_back(LinearWalker("person", 40, 16, 40, 60, {328, 160}, 172, {-8, 160}));
    s.objects.push_back(LinearWalker("car", 60, 40, 20, 10, {-20, 215}, 250, {340, 215}));
    OccluderSpec pillar;
    pillar.box = {140, 60, 40, 130};
    pillar.intensity = 120;
    s.occluders.push_back(pillar);
  } else if (name == "illumination_ramp") {
    s.n_frames = 300;
    s.noise_sigma = 8.0;
    s.illumination = {{0, 1.0}, {150, 1.3}, {299, 1.0}};
  } else {
    std::string all;
    for (const auto& n : PresetNames()) all += (all.empty() ? "" : ", ") + n;
    throw UsageError("unknown preset '" + name + "' (available: " + all + ")");
  }
  return s;
}

}  // namespace idts
