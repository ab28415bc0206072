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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "idts/box.hpp"
#include "idts/error.hpp"

namespace idts {

/// One line of the detection exchange format:
///
///   frame,id,x,y,w,h,score,class
///
/// id is -1 for raw detections and >= 0 in tracked or ground-truth files.
/// Ground-truth files store the visible fraction of the object in `score`.
struct ExchangeRecord {
  std::int64_t frame = 0;
  std::int64_t id = -1;
  Box box;
  double score = 0;
  std::string label;

  friend bool operator==(const ExchangeRecord&, const ExchangeRecord&) = default;
};

/// Shortest decimal text that parses back to the same double.
inline std::string FormatNumber(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string FormatExchangeLine(const ExchangeRecord& r) {
  std::string s = std::to_string(r.frame) + "," + std::to_string(r.id) + "," +
                  FormatNumber(r.box.x) + "," + FormatNumber(r.box.y) + "," +
                  FormatNumber(r.box.w) + "," + FormatNumber(r.box.h) + "," +
                  FormatNumber(r.score) + "," + r.label;
  return s;
}

namespace detail {

template <typename T>
bool ParseField(std::string_view text, T& out) {
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace detail

/// Parses one line; `line_number` only decorates error messages.
inline ExchangeRecord ParseExchangeLine(std::string_view line, std::size_t line_number) {
  auto fail = [&](const std::string& why) -> ExchangeRecord {
    throw FormatError("line " + std::to_string(line_number) + ": " + why);
  };
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (fields.size() != 8) {
    return fail("expected 8 comma-separated fields, got " + std::to_string(fields.size()));
  }
  ExchangeRecord r;
  if (!detail::ParseField(fields[0], r.frame) || r.frame < 0) return fail("bad frame");
  if (!detail::ParseField(fields[1], r.id) || r.id < -1) return fail("bad id");
  if (!detail::ParseField(fields[2], r.box.x) || !detail::ParseField(fields[3], r.box.y) ||
      !detail::ParseField(fields[4], r.box.w) || !detail::ParseField(fields[5], r.box.h)) {
    return fail("bad box coordinates");
  }
  if (r.box.w < 0 || r.box.h < 0) return fail("negative box dimensions");
  if (!detail::ParseField(fields[6], r.score) || r.score < 0 || r.score > 1) {
    return fail("score must be a number in [0,1]");
  }
  const std::string_view label = fields[7];
  if (label.empty() || label.find_first_of(" \t\"") != std::string_view::npos) {
    return fail("class must be a non-empty unquoted token");
  }
  r.label = std::string(label);
  return r;
}

inline std::vector<ExchangeRecord> ReadExchange(std::istream& in) {
  std::vector<ExchangeRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(ParseExchangeLine(line, n));
  }
  return out;
}

inline std::vector<ExchangeRecord> ReadExchangeFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return ReadExchange(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void WriteExchange(std::ostream& out, const std::vector<ExchangeRecord>& records) {
  for (const auto& r : records) out << FormatExchangeLine(r) << '\n';
}

inline void WriteExchangeFile(const std::filesystem::path& path,
                              const std::vector<ExchangeRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  WriteExchange(out, records);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace idts
