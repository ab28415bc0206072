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
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "idts/box.hpp"
#include "idts/exchange.hpp"

namespace idts {

struct FrameMatch {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<std::pair<int, int>> pairs;  // (gt index, pred index)
};

/// Greedy matching in descending IoU; ties go to the lower (gt, pred) index.
inline FrameMatch MatchFrame(const std::vector<Box>& gt, const std::vector<Box>& pred,
                             double iou_min) {
  struct Candidate {
    double iou;
    int g;
    int p;
  };
  std::vector<Candidate> cands;
  for (int g = 0; g < static_cast<int>(gt.size()); ++g) {
    for (int p = 0; p < static_cast<int>(pred.size()); ++p) {
      const double v = Iou(gt[g], pred[p]);
      if (v >= iou_min && v > 0) cands.push_back({v, g, p});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.g != b.g) return a.g < b.g;
    return a.p < b.p;
  });
  std::vector<bool> gt_used(gt.size()), pred_used(pred.size());
  FrameMatch m;
  for (const auto& c : cands) {
    if (gt_used[c.g] || pred_used[c.p]) continue;
    gt_used[c.g] = pred_used[c.p] = true;
    m.pairs.emplace_back(c.g, c.p);
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  m.tp = static_cast<int>(m.pairs.size());
  m.fp = static_cast<int>(pred.size()) - m.tp;
  m.fn = static_cast<int>(gt.size()) - m.tp;
  return m;
}

struct DetMetrics {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  double precision = 1;
  double recall = 1;
  double f1 = 1;
};

inline DetMetrics DetMetricsFromCounts(long long tp, long long fp, long long fn) {
  DetMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  // 0/0 counts as perfect so that empty scenes score 1 rather than NaN.
  m.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double s = m.precision + m.recall;
  m.f1 = s == 0 ? 0.0 : 2 * m.precision * m.recall / s;
  return m;
}

inline DetMetrics AggregateDetMetrics(const std::vector<FrameMatch>& frames) {
  long long tp = 0, fp = 0, fn = 0;
  for (const auto& f : frames) {
    tp += f.tp;
    fp += f.fp;
    fn += f.fn;
  }
  return DetMetricsFromCounts(tp, fp, fn);
}

using RecordsByFrame = std::map<std::int64_t, std::vector<ExchangeRecord>>;

inline RecordsByFrame GroupByFrame(const std::vector<ExchangeRecord>& records) {
  RecordsByFrame out;
  for (const auto& r : records) out[r.frame].push_back(r);
  return out;
}

/// Detection metrics over the union of frames present in either file.
inline DetMetrics EvaluateDetections(const std::vector<ExchangeRecord>& gt,
                                     const std::vector<ExchangeRecord>& pred, double iou_min) {
  const auto g = GroupByFrame(gt);
  const auto p = GroupByFrame(pred);
  std::set<std::int64_t> frames;
  for (const auto& [f, _] : g) frames.insert(f);
  for (const auto& [f, _] : p) frames.insert(f);
  std::vector<FrameMatch> matches;
  for (const auto f : frames) {
    std::vector<Box> gb, pb;
    if (auto it = g.find(f); it != g.end()) {
      for (const auto& r : it->second) gb.push_back(r.box);
    }
    if (auto it = p.find(f); it != p.end()) {
      for (const auto& r : it->second) pb.push_back(r.box);
    }
    matches.push_back(MatchFrame(gb, pb, iou_min));
  }
  return AggregateDetMetrics(matches);
}

struct TrackMetrics {
  DetMetrics det;
  long long gt_count = 0;
  long long id_switches = 0;
  double mostly_tracked_fraction = 1;
  double mota = 1;
  double f1 = 1;
};

/// A gt identity is mostly tracked when it is matched in at least this
/// share of the frames it appears in.
inline constexpr double kMostlyTrackedShare = 0.8;

inline TrackMetrics EvaluateTracks(const std::vector<ExchangeRecord>& gt,
                                   const std::vector<ExchangeRecord>& pred, double iou_min) {
  for (const auto* set : {&gt, &pred}) {
    for (const auto& r : *set) {
      if (r.id < 0) throw FormatError("track evaluation needs ids >= 0");
    }
  }
  const auto g = GroupByFrame(gt);
  const auto p = GroupByFrame(pred);
  std::set<std::int64_t> frames;
  for (const auto& [f, _] : g) frames.insert(f);
  for (const auto& [f, _] : p) frames.insert(f);

  std::map<int, int> last_pred_of_gt;
  std::map<int, std::pair<long long, long long>> coverage;  // gt id -> (matched, present)
  long long tp = 0, fp = 0, fn = 0, idsw = 0, gt_count = 0;
  static const std::vector<ExchangeRecord> kNone;
  for (const auto f : frames) {
    const auto git = g.find(f);
    const auto pit = p.find(f);
    const auto& gr = git == g.end() ? kNone : git->second;
    const auto& pr = pit == p.end() ? kNone : pit->second;
    std::vector<Box> gb, pb;
    for (const auto& r : gr) gb.push_back(r.box);
    for (const auto& r : pr) pb.push_back(r.box);
    const FrameMatch m = MatchFrame(gb, pb, iou_min);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    gt_count += static_cast<long long>(gr.size());
    for (const auto& r : gr) ++coverage[r.id].second;
    for (const auto& [gi, pi] : m.pairs) {
      const int gid = gr[gi].id;
      const int pid = pr[pi].id;
      ++coverage[gid].first;
      auto it = last_pred_of_gt.find(gid);
      if (it != last_pred_of_gt.end() && it->second != pid) ++idsw;
      last_pred_of_gt[gid] = pid;
    }
  }
  TrackMetrics t;
  t.det = DetMetricsFromCounts(tp, fp, fn);
  t.f1 = t.det.f1;
  t.gt_count = gt_count;
  t.id_switches = idsw;
  const double denom = static_cast<double>(std::max<long long>(1, gt_count));
  t.mota = 1.0 - static_cast<double>(fn + fp + idsw) / denom;
  long long mostly = 0;
  for (const auto& [id, c] : coverage) {
    if (static_cast<double>(c.first) >= kMostlyTrackedShare * static_cast<double>(c.second)) {
      ++mostly;
    }
  }
  t.mostly_tracked_fraction =
      coverage.empty() ? 1.0 : static_cast<double>(mostly) / static_cast<double>(coverage.size());
  return t;
}

struct BenchReport {
  long long frames = 0;
  int threads = 1;
  std::vector<std::pair<std::string, double>> stage_ms;
  double total_ms = 0;

  double fps() const { return total_ms > 0 ? frames / (total_ms / 1000.0) : 0.0; }
};

}  // namespace idts
