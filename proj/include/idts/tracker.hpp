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
#include <map>
#include <optional>
#include <cmath>
#include <string>
#include <vector>

#include "idts/appearance.hpp"
#include "idts/box.hpp"
#include "idts/detect.hpp"
#include "idts/error.hpp"
#include "idts/frame_io.hpp"
#include "idts/hungarian.hpp"
#include "idts/kalman.hpp"

namespace idts {

enum class TrackStatus { kTentative, kConfirmed, kLost };

struct TrackSample {
  std::int64_t frame;
  Box box;
  bool coasted;
};

struct Track {
  int id = 0;
  KalmanState state;
  TrackStatus status = TrackStatus::kTentative;
  int hits = 0;
  int misses = 0;
  Histogram appearance;
  std::string class_label = "object";
  std::map<std::string, int> class_votes;
  std::vector<TrackSample> history;
  bool ever_confirmed = false;
  std::int64_t first_frame = 0;
  std::int64_t last_matched_frame = 0;

  Box box() const { return state.box(); }
};

struct Association {
  int track_id;
  std::size_t detection;
};

/// A confirmed track's box for one frame; coasted boxes are predictions.
struct TrackReport {
  int track_id;
  Box box;
  bool coasted;
  double score;
  std::string class_label;
};

struct TrackerStepResult {
  std::vector<Association> associations;  // confirmed tracks only
  std::vector<TrackReport> reports;
  std::vector<Track> finished;  // confirmed at some point, now lost
};

/// Kalman + Hungarian multi-object tracker.
///
/// Per frame: predict every track; cost(t, d) = lambda (1 - IoU) +
/// (1 - lambda) * appearance distance, forbidden below gate_iou; assign;
/// update matched tracks; coast unmatched ones until they exceed max_age
/// misses; open tentative tracks for leftover detections. A tentative track
/// is confirmed after min_hits consecutive matches.
class Tracker {
 public:
  explicit Tracker(const TrackerParams& params = {}) : params_(params) {
    params_.Validate();
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerParams& params() const { return params_; }

  TrackerStepResult Step(const Frame& frame, const std::vector<Detection>& detections) {
    if (last_frame_ && frame.index <= *last_frame_) {
      throw UsageError("tracker: frame " + std::to_string(frame.index) +
                       " is not after " + std::to_string(*last_frame_));
    }
    last_frame_ = frame.index;

    for (auto& t : tracks_) t.state = KfPredict(t.state, params_);

    std::vector<Histogram> det_hist;
    det_hist.reserve(detections.size());
    for (const auto& d : detections) det_hist.push_back(Histogram::Compute(frame, d.box));

    CostMatrix cost(tracks_.size(), detections.size(), kForbidden);
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
      const Box predicted = tracks_[ti].box();
      for (std::size_t di = 0; di < detections.size(); ++di) {
        const double overlap = Iou(predicted, detections[di].box);
        if (!PassesGate(tracks_[ti], overlap, detections[di].box)) continue;
        cost(ti, di) = params_.lambda_iou * (1.0 - overlap) +
                       (1.0 - params_.lambda_iou) *
                           Histogram::Distance(tracks_[ti].appearance, det_hist[di]);
      }
    }

    TrackerStepResult result;
    std::vector<char> track_matched(tracks_.size(), 0);
    std::vector<char> det_matched(detections.size(), 0);
    for (const auto& [ti, di] : SolveAssignment(cost)) {
      Track& t = tracks_[ti];
      const Detection& d = detections[di];
      t.state = KfUpdate(t.state, d.box, params_);
      ++t.hits;
      t.misses = 0;
      t.appearance.Blend(det_hist[di], 0.1);
      Vote(t, d.class_label);
      t.last_matched_frame = frame.index;
      if (t.status == TrackStatus::kTentative && t.hits >= params_.min_hits) {
        t.status = TrackStatus::kConfirmed;
        t.ever_confirmed = true;
      }
      track_matched[ti] = 1;
      det_matched[di] = 1;
      if (t.status == TrackStatus::kConfirmed) {
        result.associations.push_back({t.id, static_cast<std::size_t>(di)});
      }
    }

    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
      if (track_matched[ti]) continue;
      Track& t = tracks_[ti];
      ++t.misses;
      t.hits = 0;
      // A coasting track holds its size; shrinking partial views just before
      // an occlusion would otherwise collapse the predicted box.
      t.state.x(6) = 0;
      t.state.x(7) = 0;
      if (t.misses > params_.max_age) t.status = TrackStatus::kLost;
    }

    for (std::size_t di = 0; di < detections.size(); ++di) {
      if (det_matched[di]) continue;
      Track t;
      t.id = next_id_++;
      t.state = KfInit(detections[di].box, params_);
      t.hits = 1;
      t.appearance = det_hist[di];
      t.first_frame = frame.index;
      t.last_matched_frame = frame.index;
      Vote(t, detections[di].class_label);
      if (t.hits >= params_.min_hits) {
        t.status = TrackStatus::kConfirmed;
        t.ever_confirmed = true;
      }
      tracks_.push_back(std::move(t));
    }

    std::vector<Track> alive;
    alive.reserve(tracks_.size());
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      Track& t = tracks_[i];
      if (t.status == TrackStatus::kLost) {
        if (t.ever_confirmed) result.finished.push_back(std::move(t));
        continue;
      }
      if (t.status == TrackStatus::kConfirmed) {
        const bool coasted = t.misses > 0;
        double score = 0.0;
        if (!coasted) {
          for (const auto& a : result.associations) {
            if (a.track_id == t.id) score = detections[a.detection].score;
          }
        }
        t.history.push_back({frame.index, t.box(), coasted});
        result.reports.push_back({t.id, t.box(), coasted, score, t.class_label});
      }
      alive.push_back(std::move(t));
    }
    tracks_ = std::move(alive);
    return result;
  }

  /// Ends the run: every live track that was ever confirmed is returned.
  std::vector<Track> Finish() {
    std::vector<Track> out;
    for (auto& t : tracks_) {
      if (t.ever_confirmed) out.push_back(std::move(t));
    }
    tracks_.clear();
    return out;
  }

 private:
  // Chi-square 99% quantile, 2 degrees of freedom.
  static constexpr double kCentreGate = 9.21;

  // Observed tracks use the IoU gate. A coasting track's predicted box drifts
  // away from the object, so it is gated instead on the Mahalanobis distance
  // of the detection centre under the predicted centre covariance, which
  // widens the longer the track goes unobserved.
  bool PassesGate(const Track& t, double overlap, const Box& det) const {
    if (overlap >= params_.gate_iou) return true;
    if (t.misses == 0 || t.status != TrackStatus::kConfirmed) return false;
    const double r = params_.measurement_noise * params_.measurement_noise;
    const Eigen::Matrix2d s = t.state.P.block<2, 2>(0, 0) + r * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d d(det.cx() - t.state.x(0), det.cy() - t.state.x(1));
    return d.dot(s.ldlt().solve(d)) <= kCentreGate;
  }

  static void Vote(Track& t, const std::string& label) {
    ++t.class_votes[label];
    int best = -1;
    for (const auto& [name, count] : t.class_votes) {
      if (count > best) {
        best = count;
        t.class_label = name;
      }
    }
  }

  TrackerParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 0;
  std::optional<std::int64_t> last_frame_;
};

}  // namespace idts
