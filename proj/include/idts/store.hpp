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

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "idts/box.hpp"
#include "idts/error.hpp"
#include "idts/frame_io.hpp"

namespace idts {

enum class EventKind { kClip, kTrack, kActivity };

inline const char* EventKindName(EventKind k) {
  switch (k) {
    case EventKind::kClip: return "clip";
    case EventKind::kTrack: return "track";
    case EventKind::kActivity: return "activity";
  }
  return "clip";
}

inline std::optional<EventKind> ParseEventKind(std::string_view s) {
  if (s == "clip") return EventKind::kClip;
  if (s == "track") return EventKind::kTrack;
  if (s == "activity") return EventKind::kActivity;
  return std::nullopt;
}

struct EventRecord {
  EventKind kind = EventKind::kClip;
  int clip_id = 0;
  int track_id = -1;
  std::int64_t frame_start = 0;
  std::int64_t frame_end = 0;
  std::int64_t t_start_ms = 0;
  std::int64_t t_end_ms = 0;
  std::string class_label;
  std::string activity_label;
  Box bbox_first;
  Box bbox_last;
  std::string source;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

namespace detail {

inline nlohmann::ordered_json BoxJson(const Box& b) {
  return nlohmann::ordered_json::array({b.x, b.y, b.w, b.h});
}

inline Box JsonBox(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("bbox must be an array of 4 numbers");
  Box b;
  b.x = j[0].get<double>();
  b.y = j[1].get<double>();
  b.w = j[2].get<double>();
  b.h = j[3].get<double>();
  return b;
}

}  // namespace detail

inline std::string EventToJson(const EventRecord& r) {
  nlohmann::ordered_json j;
  j["kind"] = EventKindName(r.kind);
  j["clip_id"] = r.clip_id;
  j["track_id"] = r.track_id;
  j["frame_start"] = r.frame_start;
  j["frame_end"] = r.frame_end;
  j["t_start_ms"] = r.t_start_ms;
  j["t_end_ms"] = r.t_end_ms;
  j["class_label"] = r.class_label;
  j["activity_label"] = r.activity_label;
  j["bbox_first"] = detail::BoxJson(r.bbox_first);
  j["bbox_last"] = detail::BoxJson(r.bbox_last);
  j["source"] = r.source;
  return j.dump();
}

inline EventRecord EventFromJson(std::string_view line, std::size_t line_number) {
  auto fail = [&](const std::string& what) {
    return FormatError("events line " + std::to_string(line_number) + ": " + what);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  if (!j.is_object()) throw fail("expected a JSON object");
  try {
    EventRecord r;
    const auto kind = ParseEventKind(j.at("kind").get<std::string>());
    if (!kind) throw fail("unknown kind");
    r.kind = *kind;
    r.clip_id = j.at("clip_id").get<int>();
    r.track_id = j.at("track_id").get<int>();
    r.frame_start = j.at("frame_start").get<std::int64_t>();
    r.frame_end = j.at("frame_end").get<std::int64_t>();
    r.t_start_ms = j.at("t_start_ms").get<std::int64_t>();
    r.t_end_ms = j.at("t_end_ms").get<std::int64_t>();
    r.class_label = j.at("class_label").get<std::string>();
    r.activity_label = j.at("activity_label").get<std::string>();
    r.bbox_first = detail::JsonBox(j.at("bbox_first"));
    r.bbox_last = detail::JsonBox(j.at("bbox_last"));
    r.source = j.at("source").get<std::string>();
    if (r.frame_start > r.frame_end) throw fail("frame_start > frame_end");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  } catch (const FormatError& e) {
    throw fail(e.what());
  }
}

/// Append-only writer; one JSON object per line, flushed after every record.
class EventWriter {
 public:
  explicit EventWriter(std::filesystem::path path, bool truncate = false)
      : path_(std::move(path)),
        out_(path_, truncate ? std::ios::binary | std::ios::trunc
                             : std::ios::binary | std::ios::app) {
    if (!out_) throw IoError("cannot open " + path_.string() + " for writing");
  }

  void Append(const EventRecord& r) {
    if (r.frame_start > r.frame_end) throw UsageError("event with frame_start > frame_end");
    out_ << EventToJson(r) << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_.string());
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void AppendEvent(const std::filesystem::path& index, const EventRecord& r) {
  EventWriter(index).Append(r);
}

inline std::vector<EventRecord> ReadEvents(std::istream& in) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(EventFromJson(line, n));
  }
  return out;
}

inline std::vector<EventRecord> ReadEvents(const std::filesystem::path& index) {
  std::ifstream in(index, std::ios::binary);
  if (!in) throw IoError("cannot open " + index.string());
  return ReadEvents(in);
}

struct QueryFilter {
  std::optional<std::pair<std::int64_t, std::int64_t>> time_ms;
  std::optional<std::pair<std::int64_t, std::int64_t>> frames;
  std::optional<std::string> class_label;
  std::optional<std::string> activity_label;
  std::optional<EventKind> kind;

  void Validate() const {
    if (time_ms && frames) throw UsageError("filter: give a time range or a frame range, not both");
    if (time_ms && time_ms->first > time_ms->second) throw UsageError("filter: from > to");
    if (frames && frames->first > frames->second) throw UsageError("filter: frame range reversed");
  }

  bool Matches(const EventRecord& r) const {
    if (time_ms && !(r.t_start_ms <= time_ms->second && time_ms->first <= r.t_end_ms)) {
      return false;
    }
    if (frames && !(r.frame_start <= frames->second && frames->first <= r.frame_end)) {
      return false;
    }
    if (class_label && r.class_label != *class_label) return false;
    if (activity_label && r.activity_label != *activity_label) return false;
    if (kind && r.kind != *kind) return false;
    return true;
  }
};

inline std::vector<EventRecord> Query(const std::vector<EventRecord>& records,
                                      const QueryFilter& filter) {
  filter.Validate();
  std::vector<EventRecord> out;
  for (const auto& r : records) {
    if (filter.Matches(r)) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const EventRecord& a, const EventRecord& b) {
    if (a.t_start_ms != b.t_start_ms) return a.t_start_ms < b.t_start_ms;
    if (a.clip_id != b.clip_id) return a.clip_id < b.clip_id;
    return a.track_id < b.track_id;
  });
  return out;
}

inline std::vector<EventRecord> Query(const std::filesystem::path& index,
                                      const QueryFilter& filter) {
  return Query(ReadEvents(index), filter);
}

inline std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

struct ClipFile {
  std::string name;
  std::uint32_t crc32 = 0;

  friend bool operator==(const ClipFile&, const ClipFile&) = default;
};

struct ClipManifest {
  int clip_id = 0;
  std::int64_t frame_start = 0;
  std::int64_t frame_end = 0;
  std::vector<ClipFile> files;

  friend bool operator==(const ClipManifest&, const ClipManifest&) = default;
};

inline std::filesystem::path ClipDir(const std::filesystem::path& clips_root, int clip_id) {
  return clips_root / ("clip_" + std::to_string(clip_id));
}

inline std::string ClipFrameName(std::int64_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "frame_" + digits + ".pgm";
}

inline std::string ManifestToJson(const ClipManifest& m) {
  nlohmann::ordered_json j;
  j["clip_id"] = m.clip_id;
  j["frame_start"] = m.frame_start;
  j["frame_end"] = m.frame_end;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : m.files) {
    nlohmann::ordered_json e;
    e["file"] = f.name;
    e["crc32"] = f.crc32;
    files.push_back(std::move(e));
  }
  j["files"] = std::move(files);
  return j.dump(2) + "\n";
}

inline ClipManifest ManifestFromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ClipManifest m;
    m.clip_id = j.at("clip_id").get<int>();
    m.frame_start = j.at("frame_start").get<std::int64_t>();
    m.frame_end = j.at("frame_end").get<std::int64_t>();
    for (const auto& e : j.at("files")) {
      m.files.push_back({e.at("file").get<std::string>(), e.at("crc32").get<std::uint32_t>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

/// Writes frames incrementally into clips/clip_<id>/ and finishes with the
/// manifest. Frames must arrive with consecutive indices.
class ClipWriter {
 public:
  ClipWriter(const std::filesystem::path& clips_root, int clip_id)
      : dir_(ClipDir(clips_root, clip_id)) {
    manifest_.clip_id = clip_id;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  void Add(const Frame& frame) {
    if (!manifest_.files.empty() && frame.index != manifest_.frame_end + 1) {
      throw UsageError("clip frames must be consecutive");
    }
    if (manifest_.files.empty()) manifest_.frame_start = frame.index;
    manifest_.frame_end = frame.index;
    const auto bytes = WritePgm(frame);
    const std::string name = ClipFrameName(frame.index);
    WriteFileBytes(dir_ / name, bytes);
    manifest_.files.push_back({name, Crc32(bytes)});
  }

  ClipManifest Finish() {
    if (manifest_.files.empty()) throw UsageError("clip has no frames");
    const std::string text = ManifestToJson(manifest_);
    WriteFileBytes(dir_ / "manifest.json",
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return manifest_;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  ClipManifest manifest_;
};

inline ClipManifest WriteClip(std::span<const Frame> frames, int clip_id,
                              const std::filesystem::path& clips_root) {
  if (frames.empty()) throw UsageError("write_clip: no frames");
  ClipWriter w(clips_root, clip_id);
  for (const auto& f : frames) w.Add(f);
  return w.Finish();
}

inline ClipManifest ReadManifest(const std::filesystem::path& clip_dir) {
  const auto bytes = ReadFileBytes(clip_dir / "manifest.json");
  return ManifestFromJson(std::string(bytes.begin(), bytes.end()));
}

/// Reads a clip back, verifying every file's checksum.
inline std::vector<Frame> ReadClip(const std::filesystem::path& clip_dir) {
  const ClipManifest m = ReadManifest(clip_dir);
  if (static_cast<std::int64_t>(m.files.size()) != m.frame_end - m.frame_start + 1) {
    throw FormatError(clip_dir.string() + ": manifest file count does not match frame range");
  }
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < m.files.size(); ++i) {
    const auto path = clip_dir / m.files[i].name;
    const auto bytes = ReadFileBytes(path);
    if (Crc32(bytes) != m.files[i].crc32) {
      throw FormatError(path.string() + ": checksum mismatch");
    }
    Frame f = DecodePgm(bytes);
    f.index = m.frame_start + static_cast<std::int64_t>(i);
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace idts
