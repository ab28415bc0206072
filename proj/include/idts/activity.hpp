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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "idts/box.hpp"
#include "idts/error.hpp"
#include "idts/tracker.hpp"

namespace idts {

inline const std::vector<std::string>& ActivityVocabulary() {
  static const std::vector<std::string> labels{"stationary", "walking", "running",
                                               "loitering", "entering", "exiting"};
  return labels;
}

/// Recent trajectory of one track: consecutive (frame, box) samples, oldest
/// first. May hold more than one window's worth so that long-horizon rules
/// (loitering) can look further back.
struct TrackWindow {
  int track_id = 0;
  std::vector<TrackSample> samples;
  int frame_width = 0;
  int frame_height = 0;
};

struct ActivityLabel {
  std::string label;
  double confidence = 0;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;

  friend bool operator==(const ActivityLabel&, const ActivityLabel&) = default;
};

struct ActivityRules {
  int window = 30;
  int hop = 15;
  int lookback = 150;
  double stationary_speed = 0.02;  // box heights / frame
  double running_speed = 0.15;
  double loiter_displacement = 1.0;  // box heights over the lookback
  double border_band = 8;            // pixels
  double min_radial_motion = 0.1;    // heights towards/away from the centre

  void Validate() const {
    if (window < 2) throw UsageError("activity.window must be >= 2");
    if (hop < 1) throw UsageError("activity.hop must be >= 1");
    if (lookback < window) throw UsageError("activity.lookback must be >= window");
    if (!(stationary_speed > 0 && stationary_speed < running_speed)) {
      throw UsageError("activity speeds must satisfy 0 < stationary < running");
    }
    if (!(loiter_displacement > 0)) throw UsageError("activity.loiter_displacement must be > 0");
    if (!(border_band >= 0)) throw UsageError("activity.border_band must be >= 0");
    if (!(min_radial_motion > 0)) throw UsageError("activity.min_radial_motion must be > 0");
  }
};

struct TrackFeatures {
  double mean_speed = 0;        // heights / frame
  double net_displacement = 0;  // heights
  double heading = 0;           // radians, image axes (y down)
  bool border_start = false;
  bool border_end = false;
  double inward = 0;   // net motion towards the frame centre, heights
  double outward = 0;  // net motion away from the frame centre, heights
};

inline bool TouchesBorder(const Box& b, int width, int height, double band) {
  return b.x < band || b.y < band || b.right() > width - band || b.bottom() > height - band;
}

/// Kinematic features of samples [first, last) of `w`.
inline TrackFeatures TrackFeaturesOf(const TrackWindow& w, std::size_t first,
                                     std::size_t last, double border_band) {
  if (last > w.samples.size() || last < first + 2) {
    throw UsageError("track_features: need at least 2 samples");
  }
  const std::size_t n = last - first;
  double height_sum = 0;
  double path = 0;
  for (std::size_t i = first; i < last; ++i) {
    const Box& b = w.samples[i].box;
    height_sum += b.h;
    if (i > first) {
      const Box& p = w.samples[i - 1].box;
      path += std::hypot(b.cx() - p.cx(), b.cy() - p.cy());
    }
  }
  const double mean_h = std::max(1e-9, height_sum / static_cast<double>(n));
  const Box& b0 = w.samples[first].box;
  const Box& b1 = w.samples[last - 1].box;
  const double dx = b1.cx() - b0.cx();
  const double dy = b1.cy() - b0.cy();

  TrackFeatures f;
  f.mean_speed = path / static_cast<double>(n - 1) / mean_h;
  f.net_displacement = std::hypot(dx, dy) / mean_h;
  f.heading = std::atan2(dy, dx);
  f.border_start = TouchesBorder(b0, w.frame_width, w.frame_height, border_band);
  f.border_end = TouchesBorder(b1, w.frame_width, w.frame_height, border_band);
  const double mx = w.frame_width / 2.0;
  const double my = w.frame_height / 2.0;
  auto towards_centre = [&](const Box& b) {
    const double ux = mx - b.cx();
    const double uy = my - b.cy();
    const double len = std::hypot(ux, uy);
    if (len <= 0) return 0.0;
    return (dx * ux + dy * uy) / len / mean_h;
  };
  f.inward = towards_centre(b0);
  f.outward = -towards_centre(b1);
  return f;
}

/// Features over the most recent `window` samples.
inline TrackFeatures TrackFeaturesOf(const TrackWindow& w, const ActivityRules& rules) {
  const std::size_t n = w.samples.size();
  const std::size_t take = std::min<std::size_t>(n, static_cast<std::size_t>(rules.window));
  return TrackFeaturesOf(w, n - take, n, rules.border_band);
}

/// Maps a track window to one activity label. Implementations may be learned
/// sequence models; the rule table below is the built-in one.
class SequenceClassifier {
 public:
  virtual ~SequenceClassifier() = default;
  virtual ActivityLabel Classify(const TrackWindow& window) const = 0;
};

/// Kinematic rule table, first match wins:
///   entering   window starts in the border band and moves inwards
///   exiting    window ends in the border band and moves outwards
///   running    mean speed >= running_speed
///   loitering  >= lookback samples, mean speed >= stationary_speed and net
///              displacement < loiter_displacement over the lookback
///   walking    stationary_speed <= mean speed < running_speed
///   stationary otherwise
/// Confidence is min(1, 2 |margin| / threshold) for the deciding feature.
class RuleClassifier : public SequenceClassifier {
 public:
  explicit RuleClassifier(const ActivityRules& rules = {}) : rules_(rules) {
    rules_.Validate();
  }

  const ActivityRules& rules() const { return rules_; }

  ActivityLabel Classify(const TrackWindow& w) const override {
    return Classify(TrackFeaturesOf(w, rules_), w);
  }

  ActivityLabel Classify(const TrackFeatures& f, const TrackWindow& w) const {
    const std::size_t n = w.samples.size();
    const std::size_t take = std::min<std::size_t>(n, static_cast<std::size_t>(rules_.window));
    ActivityLabel out;
    out.start_frame = w.samples[n - take].frame;
    out.end_frame = w.samples.back().frame;
    auto decide = [&](const char* label, double margin, double threshold) {
      out.label = label;
      out.confidence = std::min(1.0, 2.0 * std::abs(margin) / threshold);
      return out;
    };

    const double radial = rules_.min_radial_motion;
    if (f.border_start && f.inward >= radial) {
      return decide("entering", f.inward - radial, radial);
    }
    if (f.border_end && f.outward >= radial) {
      return decide("exiting", f.outward - radial, radial);
    }
    const double slow = rules_.stationary_speed;
    const double fast = rules_.running_speed;
    if (f.mean_speed >= fast) return decide("running", f.mean_speed - fast, fast);
    if (n >= static_cast<std::size_t>(rules_.lookback)) {
      const TrackFeatures lf = TrackFeaturesOf(w, n - rules_.lookback, n, rules_.border_band);
      if (lf.mean_speed >= slow && lf.net_displacement < rules_.loiter_displacement) {
        return decide("loitering", rules_.loiter_displacement - lf.net_displacement,
                      rules_.loiter_displacement);
      }
    }
    if (f.mean_speed >= slow) {
      const bool near_low = f.mean_speed - slow < fast - f.mean_speed;
      return near_low ? decide("walking", f.mean_speed - slow, slow)
                      : decide("walking", fast - f.mean_speed, fast);
    }
    return decide("stationary", slow - f.mean_speed, slow);
  }

 private:
  ActivityRules rules_;
};

/// A run of identical labels for one track.
struct ActivityRun {
  int track_id;
  std::string label;
  double confidence;  // mean over the run's windows
  std::int64_t start_frame;
  std::int64_t end_frame;
  Box first_box;
  Box last_box;
  std::string class_label;
};

/// Slides windows over confirmed-track histories every `hop` frames and
/// merges consecutive identical labels into runs.
class ActivityMonitor {
 public:
  ActivityMonitor(std::shared_ptr<const SequenceClassifier> classifier,
                  const ActivityRules& rules, int frame_width, int frame_height)
      : classifier_(std::move(classifier)), rules_(rules),
        frame_width_(frame_width), frame_height_(frame_height) {
    rules_.Validate();
  }

  /// Called once per frame with the tracks alive after the tracker step.
  /// Returns runs that closed because their label changed.
  std::vector<ActivityRun> Observe(const std::vector<Track>& tracks) {
    std::vector<ActivityRun> closed;
    for (const auto& t : tracks) {
      if (t.status != TrackStatus::kConfirmed || t.history.size() < 2) continue;
      // Only matched frames mark progress; a coasting track is not re-labelled.
      if (t.history.back().coasted) continue;
      const std::size_t n = t.history.size();
      if ((n - 1) % static_cast<std::size_t>(rules_.hop) != 0 &&
          n != static_cast<std::size_t>(rules_.window)) {
        continue;
      }
      TrackWindow w;
      w.track_id = t.id;
      w.frame_width = frame_width_;
      w.frame_height = frame_height_;
      const std::size_t take = std::min<std::size_t>(n, rules_.lookback);
      w.samples.assign(t.history.end() - static_cast<std::ptrdiff_t>(take), t.history.end());
      const ActivityLabel label = classifier_->Classify(w);
      const std::size_t window_first =
          n - std::min<std::size_t>(n, static_cast<std::size_t>(rules_.window));
      const Box first_box = t.history[window_first].box;
      Extend(t.id, label, first_box, t.history.back().box, t.class_label, closed);
    }
    return closed;
  }

  /// Closes the open run of a finished track, if any.
  std::vector<ActivityRun> Close(int track_id) {
    std::vector<ActivityRun> out;
    const auto it = open_.find(track_id);
    if (it == open_.end()) return out;
    out.push_back(Finalize(it->second));
    open_.erase(it);
    return out;
  }

  std::vector<ActivityRun> CloseAll() {
    std::vector<ActivityRun> out;
    for (auto& [id, run] : open_) out.push_back(Finalize(run));
    open_.clear();
    return out;
  }

 private:
  struct OpenRun {
    ActivityRun run;
    double confidence_sum = 0;
    int windows = 0;
  };

  static ActivityRun Finalize(const OpenRun& r) {
    ActivityRun run = r.run;
    run.confidence = r.windows > 0 ? r.confidence_sum / r.windows : 0.0;
    return run;
  }

  void Extend(int id, const ActivityLabel& label, const Box& first_box, const Box& last_box,
              const std::string& class_label, std::vector<ActivityRun>& closed) {
    auto it = open_.find(id);
    if (it != open_.end() && it->second.run.label == label.label) {
      OpenRun& r = it->second;
      r.run.end_frame = label.end_frame;
      r.run.last_box = last_box;
      r.run.class_label = class_label;
      r.confidence_sum += label.confidence;
      ++r.windows;
      return;
    }
    std::int64_t start = label.start_frame;
    if (it != open_.end()) {
      closed.push_back(Finalize(it->second));
      // Runs of one track do not overlap; the new run starts after the old.
      start = std::max(start, it->second.run.end_frame + 1);
      open_.erase(it);
    }
    OpenRun r;
    r.run = {id, label.label, 0.0, std::min(start, label.end_frame), label.end_frame,
             first_box, last_box, class_label};
    r.confidence_sum = label.confidence;
    r.windows = 1;
    open_.emplace(id, std::move(r));
  }

  std::shared_ptr<const SequenceClassifier> classifier_;
  ActivityRules rules_;
  int frame_width_;
  int frame_height_;
  std::map<int, OpenRun> open_;
};

}  // namespace idts
