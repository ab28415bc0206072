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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "idts/eval.hpp"
#include "idts/exchange.hpp"
#include "oracles.hpp"

namespace idts {
namespace {

ExchangeRecord Rec(std::int64_t frame, int id, Box b) { return {frame, id, b, 1.0, "object"}; }

TEST(MatchFrame, IdenticalAndEmpty) {
  const std::vector<Box> gt{{0, 0, 10, 10}, {50, 50, 10, 10}};
  const auto same = MatchFrame(gt, gt, 0.5);
  EXPECT_EQ(same.tp, 2);
  EXPECT_EQ(same.fp, 0);
  EXPECT_EQ(same.fn, 0);
  const auto none = MatchFrame(gt, {}, 0.5);
  EXPECT_EQ(none.tp, 0);
  EXPECT_EQ(none.fn, 2);
  const auto m = AggregateDetMetrics({none});
  EXPECT_EQ(m.precision, 1.0);  // no predictions: vacuous
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
}

TEST(MatchFrame, ThresholdIsInclusive) {
  // IoU exactly 1/3 between these two boxes.
  const auto m = MatchFrame({{0, 0, 2, 2}}, {{1, 0, 2, 2}}, 1.0 / 3.0);
  EXPECT_EQ(m.tp, 1);
  EXPECT_EQ(MatchFrame({{0, 0, 2, 2}}, {{1, 0, 2, 2}}, 0.34).tp, 0);
}

std::vector<Box> RandomBoxes(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> p(0, 60), s(8, 20);
  std::vector<Box> out;
  for (int i = 0; i < n; ++i) out.push_back({p(rng), p(rng), s(rng), s(rng)});
  return out;
}

std::vector<oracle::RefBox> Ref(const std::vector<Box>& b) {
  std::vector<oracle::RefBox> out;
  for (const auto& x : b) out.push_back({x.x, x.y, x.w, x.h});
  return out;
}

TEST(MatchFrame, GreedyAgainstExhaustiveMatching) {
  std::mt19937 rng(13);
  int equal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto gt = RandomBoxes(rng, 1 + rng() % 5);
    auto pred = gt;
    std::normal_distribution<double> j(0, 3);
    for (auto& b : pred) {
      b.x += j(rng);
      b.y += j(rng);
    }
    for (const auto& b : RandomBoxes(rng, rng() % 3)) pred.push_back(b);
    const auto m = MatchFrame(gt, pred, 0.5);
    const int best = oracle::MaxMatching(Ref(gt), Ref(pred), 0.5);
    // A greedy maximal matching is at least half the maximum one.
    ASSERT_LE(m.tp, best);
    ASSERT_GE(2 * m.tp, best);
    ASSERT_LE(best - m.tp, 1);
    ASSERT_EQ(m.tp + m.fn, static_cast<int>(gt.size()));
    ASSERT_EQ(m.tp + m.fp, static_cast<int>(pred.size()));
    for (const auto& [g, p] : m.pairs) ASSERT_GE(Iou(gt[g], pred[p]), 0.5);
    equal += m.tp == best;
  }
  EXPECT_GE(equal, 280);
}

TEST(MatchFrame, SixIndependentBoxesPerSide) {
  std::mt19937 rng(17);
  int gap_total = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto gt = RandomBoxes(rng, 6);
    const auto pred = RandomBoxes(rng, 6);
    const int best = oracle::MaxMatching(Ref(gt), Ref(pred), 0.5);
    const int got = MatchFrame(gt, pred, 0.5).tp;
    ASSERT_LE(got, best);
    ASSERT_LE(best - got, 1);
    gap_total += best - got;
  }
  EXPECT_LE(gap_total, 15);
}

TEST(DetMetrics, Counts) {
  const auto m = DetMetricsFromCounts(9, 1, 1);
  EXPECT_DOUBLE_EQ(m.precision, 0.9);
  EXPECT_DOUBLE_EQ(m.recall, 0.9);
  EXPECT_DOUBLE_EQ(m.f1, 0.9);
  const auto v = DetMetricsFromCounts(0, 0, 0);
  EXPECT_EQ(v.precision, 1.0);
  EXPECT_EQ(v.recall, 1.0);
  EXPECT_EQ(v.f1, 1.0);
  // P = 0.92, R = 0.87.
  const double p = 0.92, r = 0.87;
  EXPECT_NEAR(2 * p * r / (p + r), 0.8943, 5e-5);
  const auto c = DetMetricsFromCounts(92 * 87, 8 * 87, 92 * 13);
  EXPECT_NEAR(c.precision, 0.92, 1e-12);
  EXPECT_NEAR(c.recall, 0.87, 1e-12);
  EXPECT_NEAR(c.f1, 0.8943, 5e-5);
}

TEST(EvaluateDetections, UnionOfFrames) {
  const std::vector<ExchangeRecord> gt{Rec(0, -1, {0, 0, 10, 10}), Rec(1, -1, {0, 0, 10, 10})};
  const std::vector<ExchangeRecord> pred{Rec(0, -1, {0, 0, 10, 10}), Rec(2, -1, {5, 5, 5, 5})};
  const auto m = EvaluateDetections(gt, pred, 0.5);
  EXPECT_EQ(m.tp, 1);
  EXPECT_EQ(m.fp, 1);
  EXPECT_EQ(m.fn, 1);
}

std::vector<ExchangeRecord> TwoWalkers(int frames) {
  std::vector<ExchangeRecord> out;
  for (int f = 0; f < frames; ++f) {
    out.push_back(Rec(f, 0, {10.0 + f, 10, 10, 20}));
    out.push_back(Rec(f, 1, {10.0 + f, 100, 10, 20}));
  }
  return out;
}

TEST(EvaluateTracks, PerfectTracking) {
  const auto gt = TwoWalkers(20);
  const auto t = EvaluateTracks(gt, gt, 0.5);
  EXPECT_EQ(t.id_switches, 0);
  EXPECT_EQ(t.mota, 1.0);
  EXPECT_EQ(t.f1, 1.0);
  EXPECT_EQ(t.mostly_tracked_fraction, 1.0);
  EXPECT_EQ(t.gt_count, 40);
}

TEST(EvaluateTracks, SwapCountsTwoSwitches) {
  const auto gt = TwoWalkers(10);
  auto pred = gt;
  for (auto& r : pred) {
    if (r.frame >= 5) r.id = 1 - r.id;
  }
  const auto t = EvaluateTracks(gt, pred, 0.5);
  EXPECT_EQ(t.id_switches, 2);
  EXPECT_DOUBLE_EQ(t.mota, 1.0 - 2.0 / 20.0);
  EXPECT_EQ(t.f1, 1.0);
}

TEST(EvaluateTracks, MostlyTracked) {
  const auto gt = TwoWalkers(10);
  std::vector<ExchangeRecord> pred;
  for (const auto& r : gt) {
    if (r.id == 0 || r.frame < 5) pred.push_back(r);
  }
  const auto t = EvaluateTracks(gt, pred, 0.5);
  EXPECT_DOUBLE_EQ(t.mostly_tracked_fraction, 0.5);
  EXPECT_EQ(t.det.fn, 5);
}

TEST(EvaluateTracks, NegativeIdsRejected) {
  EXPECT_THROW(EvaluateTracks({Rec(0, -1, {0, 0, 1, 1})}, {}, 0.5), FormatError);
}

std::vector<ExchangeRecord> Noisy(const std::vector<ExchangeRecord>& gt, std::mt19937& rng) {
  std::normal_distribution<double> j(0, 2);
  std::vector<ExchangeRecord> out;
  for (auto r : gt) {
    if (rng() % 10 == 0) continue;
    r.box.x += j(rng);
    r.box.y += j(rng);
    r.id = (r.id + (r.frame > 30 ? 7 : 0)) % 11;
    out.push_back(r);
  }
  return out;
}

TEST(EvaluateTracks, AddingFalsePositivesNeverRaisesMota) {
  std::mt19937 rng(14);
  const auto gt = TwoWalkers(60);
  auto pred = Noisy(gt, rng);
  double prev = EvaluateTracks(gt, pred, 0.5).mota;
  std::uniform_real_distribution<double> p(0, 300);
  for (int i = 0; i < 30; ++i) {
    pred.push_back(Rec(rng() % 60, 50 + i, {p(rng), p(rng), 10, 10}));
    const double now = EvaluateTracks(gt, pred, 0.5).mota;
    ASSERT_LE(now, prev);
    prev = now;
  }
}

TEST(EvaluateTracks, RecordOrderDoesNotMatter) {
  std::mt19937 rng(15);
  const auto gt = TwoWalkers(60);
  const auto pred = Noisy(gt, rng);
  const auto base = EvaluateTracks(gt, pred, 0.5);
  for (int i = 0; i < 10; ++i) {
    auto g = gt, p = pred;
    std::shuffle(g.begin(), g.end(), rng);
    std::shuffle(p.begin(), p.end(), rng);
    const auto t = EvaluateTracks(g, p, 0.5);
    ASSERT_EQ(t.det.tp, base.det.tp);
    ASSERT_EQ(t.det.fp, base.det.fp);
    ASSERT_EQ(t.id_switches, base.id_switches);
    ASSERT_EQ(t.mota, base.mota);
  }
}

TEST(Exchange, RoundTripThroughText) {
  std::mt19937 rng(16);
  std::uniform_real_distribution<double> p(0, 300);
  std::vector<ExchangeRecord> recs;
  for (int i = 0; i < 100; ++i) {
    recs.push_back({i / 4, i % 5 - 1, {p(rng), p(rng), 1 + p(rng) / 10, 1 + p(rng) / 10},
                    p(rng) / 300, i % 2 ? "person" : "car"});
  }
  std::stringstream ss;
  WriteExchange(ss, recs);
  const auto back = ReadExchange(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].frame, recs[i].frame);
    EXPECT_EQ(back[i].id, recs[i].id);
    EXPECT_EQ(back[i].label, recs[i].label);
    EXPECT_EQ(back[i].box, recs[i].box);
    EXPECT_EQ(back[i].score, recs[i].score);
  }
}

}  // namespace
}  // namespace idts
