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
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idts/error.hpp"

namespace idts {

/// One 8-bit grayscale image plane, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::int64_t index = 0;
  std::int64_t timestamp_ms = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
               fill) {}

  std::size_t size() const { return pixels.size(); }
  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

inline std::int64_t TimestampMs(std::int64_t index, double frame_rate) {
  return std::llround(static_cast<double>(index) * 1000.0 / frame_rate);
}

/// Rec.601 luma.
inline std::uint8_t LumaFromRgb(std::uint8_t r, std::uint8_t g,
                                std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

namespace detail {

class PgmHeaderScanner {
 public:
  explicit PgmHeaderScanner(std::span<const std::uint8_t> bytes)
      : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long ReadInt(const char* field) {
    SkipSpaceAndComments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) {
        throw FormatError("pgm: " + std::string(field) + " too large at offset " +
                          std::to_string(start));
      }
      ++pos_;
    }
    if (pos_ == start) {
      throw FormatError("pgm: expected integer " + std::string(field) +
                        " at offset " + std::to_string(start));
    }
    return value;
  }

  void ExpectSingleWhitespace() {
    if (pos_ >= bytes_.size() ||
        !(bytes_[pos_] == ' ' || bytes_[pos_] == '\t' || bytes_[pos_] == '\n' ||
          bytes_[pos_] == '\r')) {
      throw FormatError("pgm: expected whitespace after maxval at offset " +
                        std::to_string(pos_));
    }
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace detail

/// Decodes a binary (P5) PGM with maxval 255. Header comments are skipped.
inline Frame DecodePgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("pgm: missing P5 magic at offset 0");
  }
  detail::PgmHeaderScanner scan(bytes);
  const long width = scan.ReadInt("width");
  const long height = scan.ReadInt("height");
  const std::size_t maxval_offset = scan.offset();
  const long maxval = scan.ReadInt("maxval");
  if (width < 1 || height < 1) {
    throw FormatError("pgm: width and height must be >= 1");
  }
  if (maxval != 255) {
    throw FormatError("pgm: maxval " + std::to_string(maxval) +
                      " unsupported (need 255) near offset " +
                      std::to_string(maxval_offset));
  }
  scan.ExpectSingleWhitespace();
  const std::size_t need = static_cast<std::size_t>(width) * height;
  const std::size_t have = bytes.size() - scan.offset();
  if (have < need) {
    throw FormatError("pgm: truncated pixel data at offset " +
                      std::to_string(scan.offset()) + ": need " +
                      std::to_string(need) + " bytes, have " +
                      std::to_string(have));
  }
  Frame frame(static_cast<int>(width), static_cast<int>(height));
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(scan.offset()), need,
              frame.pixels.begin());
  return frame;
}

inline std::vector<std::uint8_t> WritePgm(const Frame& frame) {
  const std::string header = "P5\n" + std::to_string(frame.width) + " " +
                             std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
  return out;
}

inline std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

inline void WriteFileBytes(const std::filesystem::path& path,
                           std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline Frame ReadPgmFile(const std::filesystem::path& path) {
  try {
    return DecodePgm(ReadFileBytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void WritePgmFile(const std::filesystem::path& path, const Frame& frame) {
  WriteFileBytes(path, WritePgm(frame));
}

enum class SourceKind { kPgmSequence, kY4mStream, kMemory };

/// A stream of frames with consecutive indices starting at 0.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual SourceKind kind() const = 0;
  virtual double frame_rate() const = 0;
  virtual std::optional<Frame> Next() = 0;
};

/// YUV4MPEG2 reader keeping only the luma plane of each frame.
class Y4mReader : public FrameSource {
 public:
  enum class Chroma { k420, kMono };

  explicit Y4mReader(std::istream& in) : in_(in) { ParseHeader(); }

  SourceKind kind() const override { return SourceKind::kY4mStream; }
  double frame_rate() const override { return frame_rate_; }
  int width() const { return width_; }
  int height() const { return height_; }
  Chroma chroma() const { return chroma_; }

  std::size_t chroma_bytes() const {
    if (chroma_ == Chroma::kMono) return 0;
    const std::size_t cw = (static_cast<std::size_t>(width_) + 1) / 2;
    const std::size_t ch = (static_cast<std::size_t>(height_) + 1) / 2;
    return 2 * cw * ch;
  }

  std::optional<Frame> Next() override {
    if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
    std::string marker(5, '\0');
    in_.read(marker.data(), 5);
    if (in_.gcount() != 5 || marker != "FRAME") {
      throw FormatError("y4m: missing FRAME marker before frame " +
                        std::to_string(next_index_));
    }
    // Frame parameters, if any, run to end of line.
    char c = 0;
    while (in_.get(c) && c != '\n') {
    }
    if (!in_) {
      throw FormatError("y4m: unterminated FRAME line at frame " +
                        std::to_string(next_index_));
    }
    Frame frame(width_, height_);
    in_.read(reinterpret_cast<char*>(frame.pixels.data()),
             static_cast<std::streamsize>(frame.size()));
    if (static_cast<std::size_t>(in_.gcount()) != frame.size()) {
      throw FormatError("y4m: truncated luma plane in frame " +
                        std::to_string(next_index_));
    }
    const std::size_t skip = chroma_bytes();
    if (skip > 0) {
      in_.ignore(static_cast<std::streamsize>(skip));
      if (static_cast<std::size_t>(in_.gcount()) != skip) {
        throw FormatError("y4m: truncated chroma planes in frame " +
                          std::to_string(next_index_));
      }
    }
    frame.index = next_index_++;
    frame.timestamp_ms = TimestampMs(frame.index, frame_rate_);
    return frame;
  }

 private:
  void ParseHeader() {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError("y4m: empty stream");
    static constexpr std::string_view kMagic = "YUV4MPEG2 ";
    if (line.compare(0, kMagic.size(), kMagic) != 0) {
      throw FormatError("y4m: missing YUV4MPEG2 signature");
    }
    std::size_t pos = kMagic.size();
    while (pos < line.size()) {
      const std::size_t end = std::min(line.find(' ', pos), line.size());
      const std::string token = line.substr(pos, end - pos);
      pos = end + 1;
      if (token.empty()) continue;
      const std::string value = token.substr(1);
      switch (token[0]) {
        case 'W': width_ = ParsePositive(value, "W"); break;
        case 'H': height_ = ParsePositive(value, "H"); break;
        case 'F': {
          const auto colon = value.find(':');
          if (colon == std::string::npos) {
            throw FormatError("y4m: malformed frame rate '" + value + "'");
          }
          const int num = ParsePositive(value.substr(0, colon), "F numerator");
          const int den = ParsePositive(value.substr(colon + 1), "F denominator");
          frame_rate_ = static_cast<double>(num) / den;
          break;
        }
        case 'C':
          if (value == "420" || value == "420jpeg" || value == "420mpeg2") {
            chroma_ = Chroma::k420;
          } else if (value == "mono") {
            chroma_ = Chroma::kMono;
          } else {
            throw FormatError("y4m: unsupported colorspace C" + value);
          }
          break;
        default:
          break;  // I, A, X parameters carry nothing we use.
      }
    }
    if (width_ < 1 || height_ < 1) {
      throw FormatError("y4m: header lacks W/H");
    }
  }

  static int ParsePositive(const std::string& s, const char* field) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used == s.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    throw FormatError("y4m: bad " + std::string(field) + " value '" + s + "'");
  }

  std::istream& in_;
  int width_ = 0;
  int height_ = 0;
  double frame_rate_ = 30.0;
  Chroma chroma_ = Chroma::k420;
  std::int64_t next_index_ = 0;
};

/// Directory of *.pgm files read in lexicographic name order.
class PgmSequenceSource : public FrameSource {
 public:
  PgmSequenceSource(const std::filesystem::path& dir, double frame_rate)
      : frame_rate_(frame_rate) {
    if (!std::filesystem::is_directory(dir)) {
      throw IoError("not a directory: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
        files_.push_back(entry.path());
      }
    }
    std::sort(files_.begin(), files_.end());
  }

  SourceKind kind() const override { return SourceKind::kPgmSequence; }
  double frame_rate() const override { return frame_rate_; }
  std::size_t frame_count() const { return files_.size(); }

  std::optional<Frame> Next() override {
    if (next_ >= files_.size()) return std::nullopt;
    Frame frame = ReadPgmFile(files_[next_]);
    if (next_ > 0 && (frame.width != width_ || frame.height != height_)) {
      throw FormatError(files_[next_].string() +
                        ": frame size differs from the first frame");
    }
    width_ = frame.width;
    height_ = frame.height;
    frame.index = static_cast<std::int64_t>(next_++);
    frame.timestamp_ms = TimestampMs(frame.index, frame_rate_);
    return frame;
  }

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t next_ = 0;
  double frame_rate_;
  int width_ = 0;
  int height_ = 0;
};

/// Frames already in memory, re-indexed from 0.
class MemorySource : public FrameSource {
 public:
  MemorySource(std::vector<Frame> frames, double frame_rate)
      : frames_(std::move(frames)), frame_rate_(frame_rate) {}

  SourceKind kind() const override { return SourceKind::kMemory; }
  double frame_rate() const override { return frame_rate_; }

  std::optional<Frame> Next() override {
    if (next_ >= frames_.size()) return std::nullopt;
    Frame frame = frames_[next_];
    frame.index = static_cast<std::int64_t>(next_++);
    frame.timestamp_ms = TimestampMs(frame.index, frame_rate_);
    return frame;
  }

 private:
  std::vector<Frame> frames_;
  std::size_t next_ = 0;
  double frame_rate_;
};

/// Owns the stream backing a Y4mReader opened from a file.
class Y4mFileSource : public FrameSource {
 public:
  explicit Y4mFileSource(const std::filesystem::path& path)
      : file_(std::make_unique<std::ifstream>(path, std::ios::binary)) {
    if (!*file_) throw IoError("cannot open " + path.string());
    reader_ = std::make_unique<Y4mReader>(*file_);
  }

  SourceKind kind() const override { return SourceKind::kY4mStream; }
  double frame_rate() const override { return reader_->frame_rate(); }
  std::optional<Frame> Next() override { return reader_->Next(); }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::unique_ptr<Y4mReader> reader_;
};

/// A directory is read as a PGM sequence at `frame_rate`; anything else is
/// read as Y4M and carries its own rate.
inline std::unique_ptr<FrameSource> OpenSource(const std::filesystem::path& path,
                                               double frame_rate) {
  if (std::filesystem::is_directory(path)) {
    return std::make_unique<PgmSequenceSource>(path, frame_rate);
  }
  return std::make_unique<Y4mFileSource>(path);
}

}  // namespace idts
