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

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "idts/activity.hpp"
#include "idts/background.hpp"
#include "idts/config.hpp"
#include "idts/detect.hpp"
#include "idts/eval.hpp"
#include "idts/exchange.hpp"
#include "idts/flow.hpp"
#include "idts/frame_io.hpp"
#include "idts/mask.hpp"
#include "idts/motionseg.hpp"
#include "idts/parallel.hpp"
#include "idts/store.hpp"
#include "idts/tracker.hpp"

namespace idts {

struct PipelineOptions {
  std::filesystem::path out_dir;  // empty: keep results in memory only
  std::string source_name;
  DetectionsByFrame external;
  int threads = 1;
  bool save_masks = false;
};

struct ClipRange {
  int clip_id;
  std::int64_t frame_start;
  std::int64_t frame_end;
};

struct PipelineResult {
  std::int64_t frames = 0;
  int width = 0;
  int height = 0;
  std::vector<ClipRange> clips;
  std::vector<EventRecord> events;
  std::vector<ExchangeRecord> detections;
  std::vector<ExchangeRecord> tracks;
  BenchReport bench;
};

namespace detail {

/// Holds recent frames until the segmenter decides whether they belong to
/// a clip. Idle: keeps pre_roll + n_on frames so a clip start reaching into
/// the past can still be served. Recording: writes a frame once no future
/// clip end can fall before it.
class ClipRecorder {
 public:
  ClipRecorder(const SegmenterParams& params, std::optional<std::filesystem::path> clips_root)
      : params_(params), root_(std::move(clips_root)) {}

  void Push(const Frame& frame) { buffer_.push_back(frame); }

  void Start(const ClipEvent& ev) {
    while (!buffer_.empty() && buffer_.front().index < ev.frame) buffer_.pop_front();
    if (root_) writer_.emplace(*root_, ev.clip_id);
    recording_ = true;
  }

  void End(const ClipEvent& ev) {
    while (!buffer_.empty() && buffer_.front().index <= ev.frame) WriteFront();
    if (writer_) writer_->Finish();
    writer_.reset();
    recording_ = false;
  }

  /// Called after the segmenter has seen `frame`.
  void Settle(std::int64_t frame) {
    if (recording_) {
      const std::int64_t safe = frame + 1 - params_.n_off + params_.post_roll;
      while (!buffer_.empty() && buffer_.front().index <= safe) WriteFront();
    } else {
      const std::size_t cap = static_cast<std::size_t>(params_.pre_roll + params_.n_on);
      while (buffer_.size() > cap) buffer_.pop_front();
    }
  }

 private:
  void WriteFront() {
    if (writer_) writer_->Add(buffer_.front());
    buffer_.pop_front();
  }

  SegmenterParams params_;
  std::optional<std::filesystem::path> root_;
  std::deque<Frame> buffer_;
  std::optional<ClipWriter> writer_;
  bool recording_ = false;
};

class StageClock {
 public:
  using Clock = std::chrono::steady_clock;

  explicit StageClock(double& sink) : sink_(sink), start_(Clock::now()) {}
  ~StageClock() {
    sink_ += std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

 private:
  double& sink_;
  Clock::time_point start_;
};

}  // namespace detail

/// Runs decode -> (background | flow) -> fuse -> clean -> segment -> detect
/// -> track -> activity -> store over every frame of `source`. All stages
/// that consume state do so in frame order, so results do not depend on
/// the thread count.
inline PipelineResult RunPipeline(FrameSource& source, const PipelineConfig& config,
                                  const PipelineOptions& options) {
  using detail::StageClock;
  config.Validate();
  const auto wall_start = StageClock::Clock::now();
  const Workers workers(options.threads);
  const double fps = source.frame_rate() > 0 ? source.frame_rate() : config.frame_rate;
  const bool write = !options.out_dir.empty();
  const bool save_masks = options.save_masks || config.save_masks;

  std::optional<EventWriter> index;
  std::optional<std::filesystem::path> clips_root;
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw IoError("cannot create " + options.out_dir.string() + ": " + ec.message());
    index.emplace(options.out_dir / "events.jsonl", true);
    if (config.save_clips) clips_root = options.out_dir / "clips";
    if (save_masks) std::filesystem::create_directories(options.out_dir / "masks");
  }

  PipelineResult result;
  double t_decode = 0, t_background = 0, t_flow = 0, t_motionseg = 0, t_detect = 0,
         t_track = 0, t_activity = 0, t_store = 0;

  std::optional<GmmModel> gmm;
  std::optional<Frame> prev;
  Segmenter segmenter(config.segmenter);
  detail::ClipRecorder recorder(config.segmenter, clips_root);
  Tracker tracker(config.tracker);
  std::optional<ActivityMonitor> activity;
  std::vector<std::pair<int, std::int64_t>> clip_starts;
  std::optional<std::int64_t> open_clip_start;
  ContextPrior prior = config.prior;
  double min_area = prior.min_area;
  std::int64_t last_index = -1;

  auto clip_for = [&](std::int64_t frame) {
    int id = clip_starts.empty() ? -1 : clip_starts.front().first;
    for (const auto& [cid, start] : clip_starts) {
      if (start <= frame) id = cid;
    }
    return id;
  };
  auto emit = [&](const EventRecord& r) {
    result.events.push_back(r);
    if (index) index->Append(r);
  };
  auto emit_run = [&](const ActivityRun& run) {
    EventRecord r;
    r.kind = EventKind::kActivity;
    r.clip_id = clip_for(run.start_frame);
    r.track_id = run.track_id;
    r.frame_start = run.start_frame;
    r.frame_end = run.end_frame;
    r.t_start_ms = TimestampMs(run.start_frame, fps);
    r.t_end_ms = TimestampMs(run.end_frame, fps);
    r.class_label = run.class_label;
    r.activity_label = run.label;
    r.bbox_first = run.first_box;
    r.bbox_last = run.last_box;
    r.source = options.source_name;
    emit(r);
  };
  auto emit_track = [&](const Track& t) {
    const TrackSample* first = nullptr;
    const TrackSample* last = nullptr;
    for (const auto& s : t.history) {
      if (s.coasted) continue;
      if (!first) first = &s;
      last = &s;
    }
    if (!first) return;
    EventRecord r;
    r.kind = EventKind::kTrack;
    r.clip_id = clip_for(first->frame);
    r.track_id = t.id;
    r.frame_start = first->frame;
    r.frame_end = last->frame;
    r.t_start_ms = TimestampMs(first->frame, fps);
    r.t_end_ms = TimestampMs(last->frame, fps);
    r.class_label = t.class_label;
    r.bbox_first = first->box;
    r.bbox_last = last->box;
    r.source = options.source_name;
    emit(r);
  };
  auto finish_tracks = [&](const std::vector<Track>& finished) {
    for (const auto& t : finished) {
      for (const auto& run : activity->Close(t.id)) emit_run(run);
      emit_track(t);
    }
  };
  auto handle_clip = [&](const std::optional<ClipEvent>& ev) {
    if (!ev) return;
    if (ev->kind == ClipEvent::Kind::kStart) {
      recorder.Start(*ev);
      clip_starts.emplace_back(ev->clip_id, ev->frame);
      open_clip_start = ev->frame;
      return;
    }
    recorder.End(*ev);
    const std::int64_t start = *open_clip_start;
    open_clip_start.reset();
    result.clips.push_back({ev->clip_id, start, ev->frame});
    EventRecord r;
    r.kind = EventKind::kClip;
    r.clip_id = ev->clip_id;
    r.track_id = -1;
    r.frame_start = start;
    r.frame_end = ev->frame;
    r.t_start_ms = TimestampMs(start, fps);
    r.t_end_ms = TimestampMs(ev->frame, fps);
    r.source = options.source_name;
    emit(r);
  };

  while (true) {
    std::optional<Frame> next;
    {
      StageClock c(t_decode);
      next = source.Next();
    }
    if (!next) break;
    Frame& frame = *next;
    if (!gmm) {
      gmm.emplace(frame.width, frame.height, config.gmm);
      result.width = frame.width;
      result.height = frame.height;
      min_area = config.ScaledMinArea(frame.width, frame.height);
      prior.min_area = min_area;
      activity.emplace(std::make_shared<RuleClassifier>(config.activity), config.activity,
                       frame.width, frame.height);
    }
    CheckSameSize(result.width, result.height, frame.width, frame.height, "pipeline");
    if (frame.index <= last_index) throw FormatError("frame indices must increase");
    last_index = frame.index;

    Mask bg(frame.width, frame.height);
    Mask fl(frame.width, frame.height);
    workers.Invoke(
        [&] {
          StageClock c(t_background);
          if (config.background_method == BackgroundMethod::kGmm) {
            bg = gmm->Apply(frame, workers);
          } else if (prev) {
            bg = FrameDiff(*prev, frame, config.diff_threshold);
          }
        },
        [&] {
          StageClock c(t_flow);
          if (config.flow_enabled && prev) {
            fl = FlowMask(LucasKanade(frame, *prev, config.flow, workers),
                          config.flow.magnitude_threshold);
          }
        });

    std::vector<Detection> external;
    if (auto it = options.external.find(frame.index); it != options.external.end()) {
      external = it->second;
    }
    Mask clean(frame.width, frame.height);
    std::optional<ClipEvent> clip_event;
    {
      StageClock c(t_motionseg);
      Mask fused = config.flow_enabled ? FuseMasks(bg, fl, config.fusion) : bg;
      for (const auto& e : external) PaintBox(fused, e.box);
      clean = MorphClean(fused);
      clip_event = segmenter.Step(ActivityScore(clean), frame.index);
    }

    std::vector<Detection> detections;
    {
      StageClock c(t_detect);
      std::vector<Detection> blobs = DetectMultiscale(clean, config.levels, min_area, config.nms_iou);
      detections = MergeDetections(blobs, external, prior, frame.width, frame.height);
      for (auto& d : detections) d.frame = frame.index;
    }

    TrackerStepResult step;
    {
      StageClock c(t_track);
      step = tracker.Step(frame, detections);
    }

    std::vector<ActivityRun> runs;
    {
      StageClock c(t_activity);
      runs = activity->Observe(tracker.tracks());
    }

    {
      StageClock c(t_store);
      for (const auto& d : detections) result.detections.push_back(ToExchange(d));
      for (const auto& rep : step.reports) {
        const Box b = ClipBox(rep.box, frame.width, frame.height);
        if (b.area() <= 0) continue;
        result.tracks.push_back({frame.index, rep.track_id, b, rep.coasted ? 0.0 : rep.score,
                                 rep.class_label});
      }
      if (write && save_masks) {
        WritePgmFile(options.out_dir / "masks" / ClipFrameName(frame.index).replace(0, 5, "mask"),
                     MaskToFrame(clean));
      }
      for (const auto& run : runs) emit_run(run);
      finish_tracks(step.finished);
      recorder.Push(frame);
      if (clip_event) {
        handle_clip(clip_event);
      }
      recorder.Settle(frame.index);
    }
    prev = std::move(frame);
    ++result.frames;
  }

  {
    StageClock c(t_store);
    if (activity) {
      finish_tracks(tracker.Finish());
      for (const auto& run : activity->CloseAll()) emit_run(run);
    }
    if (last_index >= 0) handle_clip(segmenter.Flush(last_index));
    if (write) {
      WriteExchangeFile(options.out_dir / "detections.txt", result.detections);
      WriteExchangeFile(options.out_dir / "tracks.txt", result.tracks);
    }
  }

  result.bench.frames = result.frames;
  result.bench.threads = workers.threads();
  result.bench.stage_ms = {{"decode", t_decode},       {"background", t_background},
                           {"flow", t_flow},           {"motionseg", t_motionseg},
                           {"detect", t_detect},       {"track", t_track},
                           {"activity", t_activity},   {"store", t_store}};
  result.bench.total_ms =
      std::chrono::duration<double, std::milli>(StageClock::Clock::now() - wall_start).count();
  return result;
}

}  // namespace idts
