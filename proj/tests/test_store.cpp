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

#include <fstream>
#include <random>
#include <sstream>

#include "event_oracle.hpp"
#include "idts/store.hpp"
#include "test_util.hpp"

namespace idts {
namespace {

EventRecord Sample(int clip, std::int64_t f0, std::int64_t f1) {
  EventRecord r;
  r.kind = EventKind::kTrack;
  r.clip_id = clip;
  r.track_id = 3;
  r.frame_start = f0;
  r.frame_end = f1;
  r.t_start_ms = f0 * 40;
  r.t_end_ms = f1 * 40;
  r.class_label = "person";
  r.bbox_first = {1.5, 2, 16, 40};
  r.bbox_last = {101.25, 2, 16, 40};
  r.source = "cam0";
  return r;
}

TEST(EventStore, JsonRoundTrip) {
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto r = oracle::RandomEvent(rng, i);
    ASSERT_EQ(EventFromJson(EventToJson(r), 1), r);
  }
}

TEST(EventStore, AppendScanPreservesOrder) {
  testutil::TempDir dir;
  const auto path = dir.path() / "events.jsonl";
  std::vector<EventRecord> written;
  for (int i = 0; i < 20; ++i) {
    written.push_back(Sample(i, 100 - i, 120));
    AppendEvent(path, written.back());
  }
  EXPECT_EQ(ReadEvents(path), written);
  {
    EventWriter w(path, true);
    w.Append(written[0]);
  }
  EXPECT_EQ(ReadEvents(path).size(), 1u);
}

TEST(EventStore, TenThousandAppends) {
  testutil::TempDir dir;
  const auto path = dir.path() / "events.jsonl";
  std::mt19937 rng(8);
  std::vector<EventRecord> written;
  {
    EventWriter w(path);
    for (int i = 0; i < 10000; ++i) {
      written.push_back(oracle::RandomEvent(rng, i));
      w.Append(written.back());
    }
  }
  EXPECT_EQ(ReadEvents(path), written);
}

TEST(EventStore, RejectsReversedInterval) {
  testutil::TempDir dir;
  EventWriter w(dir.path() / "e.jsonl");
  EXPECT_THROW(w.Append(Sample(0, 10, 9)), UsageError);
}

TEST(EventStore, MalformedLineReportsLineNumber) {
  std::stringstream ss;
  ss << EventToJson(Sample(0, 1, 2)) << "\n" << EventToJson(Sample(1, 1, 2)) << "\n{\"kind\":\n";
  try {
    ReadEvents(ss);
    FAIL() << "no error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream missing("{\"kind\":\"clip\"}\n");
  EXPECT_THROW(ReadEvents(missing), FormatError);
  std::stringstream badkind(
      std::string(EventToJson(Sample(0, 1, 2))).replace(9, 5, "blob_"));
  EXPECT_THROW(ReadEvents(badkind), FormatError);
}

TEST(EventQuery, IntervalOverlapIsInclusive) {
  const std::vector<EventRecord> recs{Sample(0, 10, 20)};
  QueryFilter f;
  for (auto [lo, hi, hit] : std::vector<std::tuple<int, int, bool>>{
           {0, 9, false}, {0, 10, true}, {20, 30, true}, {21, 30, false}, {12, 13, true}, {0, 100, true}}) {
    f.frames = std::pair<std::int64_t, std::int64_t>{lo, hi};
    EXPECT_EQ(Query(recs, f).size(), hit ? 1u : 0u) << lo << "-" << hi;
  }
}

TEST(EventQuery, FilterValidation) {
  QueryFilter f;
  f.frames = std::pair<std::int64_t, std::int64_t>{5, 4};
  EXPECT_THROW(Query(std::vector<EventRecord>{}, f), UsageError);
  f.frames = std::pair<std::int64_t, std::int64_t>{1, 4};
  f.time_ms = std::pair<std::int64_t, std::int64_t>{1, 4};
  EXPECT_THROW(Query(std::vector<EventRecord>{}, f), UsageError);
}

TEST(EventQuery, MatchesBruteForce) {
  std::mt19937 rng(9);
  std::vector<EventRecord> recs;
  for (int i = 0; i < 2000; ++i) recs.push_back(oracle::RandomEvent(rng, i % 37));
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = oracle::RandomFilter(rng);
    const bool by_frames = trial % 2 == 1;
    const auto got = Query(recs, oracle::ToQueryFilter(f, by_frames));
    const auto want = oracle::RefQuery(recs, f, by_frames);
    ASSERT_EQ(got.size(), want.size()) << trial;
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_EQ(got[i], recs[want[i]]) << trial;
  }
}

TEST(EventQuery, FromFile) {
  testutil::TempDir dir;
  const auto path = dir.path() / "events.jsonl";
  AppendEvent(path, Sample(2, 50, 60));
  AppendEvent(path, Sample(1, 10, 20));
  QueryFilter f;
  f.class_label = "person";
  const auto out = Query(path, f);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].clip_id, 1);
  f.class_label = "car";
  EXPECT_TRUE(Query(path, f).empty());
  EXPECT_THROW(Query(dir.path() / "missing.jsonl", QueryFilter{}), IoError);
}

TEST(Clips, Crc32KnownValue) {
  const std::string s = "123456789";
  EXPECT_EQ(Crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())),
            0xCBF43926u);
}

TEST(Clips, FrameNames) {
  EXPECT_EQ(ClipFrameName(7), "frame_000007.pgm");
  EXPECT_EQ(ClipFrameName(1234567), "frame_1234567.pgm");
}

std::vector<Frame> Frames(int n, std::int64_t first, std::mt19937& rng) {
  std::vector<Frame> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(testutil::RandomFrame(24, 16, rng));
    out.back().index = first + i;
  }
  return out;
}

TEST(Clips, WriteAndReadBack) {
  testutil::TempDir dir;
  std::mt19937 rng(10);
  const auto frames = Frames(10, 40, rng);
  const auto m = WriteClip(frames, 3, dir.path());
  EXPECT_EQ(m.clip_id, 3);
  EXPECT_EQ(m.frame_start, 40);
  EXPECT_EQ(m.frame_end, 49);
  ASSERT_EQ(m.files.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto bytes = ReadFileBytes(ClipDir(dir.path(), 3) / m.files[i].name);
    EXPECT_EQ(m.files[i].crc32, Crc32(bytes));
  }
  EXPECT_EQ(ReadManifest(ClipDir(dir.path(), 3)), m);
  EXPECT_EQ(ManifestFromJson(ManifestToJson(m)), m);
  const auto back = ReadClip(ClipDir(dir.path(), 3));
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].pixels, frames[i].pixels);
    EXPECT_EQ(back[i].index, frames[i].index);
  }
}

TEST(Clips, CorruptionDetected) {
  testutil::TempDir dir;
  std::mt19937 rng(11);
  const auto m = WriteClip(Frames(4, 0, rng), 0, dir.path());
  const auto victim = ClipDir(dir.path(), 0) / m.files[2].name;
  auto bytes = ReadFileBytes(victim);
  bytes.back() ^= 0x01;
  WriteFileBytes(victim, bytes);
  EXPECT_THROW(ReadClip(ClipDir(dir.path(), 0)), FormatError);
}

TEST(Clips, WriterRules) {
  testutil::TempDir dir;
  std::mt19937 rng(12);
  auto frames = Frames(3, 0, rng);
  frames[2].index = 5;
  EXPECT_THROW(WriteClip(frames, 0, dir.path()), UsageError);
  EXPECT_THROW(WriteClip(std::span<const Frame>{}, 1, dir.path()), UsageError);
  EXPECT_THROW(ManifestFromJson("{\"clip_id\": 1}"), FormatError);
}

}  // namespace
}  // namespace idts
