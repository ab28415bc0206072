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
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "idts/activity.hpp"
#include "idts/background.hpp"
#include "idts/detect.hpp"
#include "idts/error.hpp"
#include "idts/exchange.hpp"
#include "idts/flow.hpp"
#include "idts/kalman.hpp"
#include "idts/motionseg.hpp"
#include "idts/synth.hpp"

namespace idts {

/// INI document where every key must be consumed; anything left over is an
/// unknown key.
class IniDocument {
 public:
  static IniDocument Parse(std::istream& in, const std::string& name) {
    IniDocument doc;
    doc.name_ = name;
    try {
      boost::property_tree::read_ini(in, doc.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw FormatError(name + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : doc.tree_) {
      if (body.empty() && !body.data().empty()) {
        throw FormatError(name + ": key '" + section + "' outside any section");
      }
    }
    return doc;
  }

  static IniDocument ParseString(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    return Parse(in, name);
  }

  static IniDocument ParseFile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return Parse(in, path.string());
  }

  std::vector<std::string> Sections() const {
    std::vector<std::string> out;
    for (const auto& [section, _] : tree_) out.push_back(section);
    return out;
  }

  bool HasSection(const std::string& section) const {
    return tree_.find(section) != tree_.not_found();
  }

  template <typename T>
  void Read(const std::string& section, const std::string& key, T& value) {
    const auto s = tree_.find(section);
    if (s == tree_.not_found()) return;
    const auto k = s->second.find(key);
    if (k == s->second.not_found()) return;
    used_.insert({section, key});
    value = Convert<T>(section, key, k->second.data());
  }

  /// Throws on any key that no Read() call consumed, or on sections outside
  /// `allowed`.
  void RejectUnknown(const std::set<std::string>& allowed) const {
    for (const auto& [section, body] : tree_) {
      if (!allowed.contains(section)) {
        throw UsageError(name_ + ": unknown section [" + section + "]");
      }
      for (const auto& [key, _] : body) {
        if (!used_.contains({section, key})) {
          throw UsageError(name_ + ": unknown key '" + key + "' in [" + section + "]");
        }
      }
    }
  }

 private:
  template <typename T>
  T Convert(const std::string& section, const std::string& key, const std::string& text) const {
    auto bad = [&]() {
      return UsageError(name_ + ": bad value '" + text + "' for " + section + "." + key);
    };
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw bad();
    } else {
      T v{};
      const char* end = text.data() + text.size();
      const auto [ptr, ec] = std::from_chars(text.data(), end, v);
      if (ec != std::errc() || ptr != end) throw bad();
      return v;
    }
  }

  std::string name_;
  boost::property_tree::ptree tree_;
  std::set<std::pair<std::string, std::string>> used_;
};

enum class BackgroundMethod { kGmm, kFrameDiff };

struct PipelineConfig {
  // [input]
  double frame_rate = 30.0;
  // [background]
  BackgroundMethod background_method = BackgroundMethod::kGmm;
  int diff_threshold = 15;
  GmmParams gmm;
  // [flow]
  bool flow_enabled = true;
  LkParams flow;
  // [segmenter]
  FusionMode fusion = FusionMode::kUnion;
  SegmenterParams segmenter;
  // [detect]
  int levels = 3;
  double nms_iou = 0.5;
  ContextPrior prior;
  // [track]
  TrackerParams tracker;
  // [activity]
  ActivityRules activity;
  // [output]
  bool save_clips = true;
  bool save_masks = false;

  void Validate() const {
    if (!(frame_rate > 0)) throw UsageError("input.frame_rate must be > 0");
    if (diff_threshold < 0 || diff_threshold > 255) {
      throw UsageError("background.diff_threshold must be in [0,255]");
    }
    gmm.Validate();
    flow.Validate();
    segmenter.Validate();
    if (levels < 1) throw UsageError("detect.levels must be >= 1");
    if (!(nms_iou >= 0 && nms_iou <= 1)) throw UsageError("detect.iou_threshold must be in [0,1]");
    prior.Validate();
    tracker.Validate();
    activity.Validate();
  }

  /// Blob area floor for a frame size: min_area is stated for 320x240 and
  /// scales with pixel count.
  double ScaledMinArea(int width, int height) const {
    return std::max(1.0, prior.min_area * (static_cast<double>(width) * height) / (320.0 * 240.0));
  }
};

inline const char* FusionModeName(FusionMode m) {
  switch (m) {
    case FusionMode::kUnion: return "union";
    case FusionMode::kIntersection: return "intersection";
    case FusionMode::kBgOnly: return "bg_only";
  }
  return "union";
}

inline PipelineConfig ParsePipelineConfig(IniDocument doc) {
  PipelineConfig c;
  doc.Read("input", "frame_rate", c.frame_rate);

  std::string method = "gmm";
  doc.Read("background", "method", method);
  if (method == "gmm") {
    c.background_method = BackgroundMethod::kGmm;
  } else if (method == "frame_diff") {
    c.background_method = BackgroundMethod::kFrameDiff;
  } else {
    throw UsageError("background.method must be gmm or frame_diff");
  }
  doc.Read("background", "diff_threshold", c.diff_threshold);
  doc.Read("background", "components", c.gmm.components);
  doc.Read("background", "alpha", c.gmm.alpha);
  doc.Read("background", "match_sigmas", c.gmm.match_sigmas);
  doc.Read("background", "bg_threshold", c.gmm.bg_threshold);
  doc.Read("background", "variance_init", c.gmm.variance_init);
  doc.Read("background", "variance_floor", c.gmm.variance_floor);
  doc.Read("background", "weight_init", c.gmm.weight_init);

  doc.Read("flow", "enabled", c.flow_enabled);
  doc.Read("flow", "window_radius", c.flow.window_radius);
  doc.Read("flow", "pyramid_levels", c.flow.pyramid_levels);
  doc.Read("flow", "iterations_per_level", c.flow.iterations_per_level);
  doc.Read("flow", "min_eigenvalue", c.flow.min_eigenvalue);
  doc.Read("flow", "magnitude_threshold", c.flow.magnitude_threshold);
  doc.Read("flow", "stride", c.flow.stride);

  std::string fusion = "union";
  doc.Read("segmenter", "fusion", fusion);
  c.fusion = ParseFusionMode(fusion);
  doc.Read("segmenter", "t_on", c.segmenter.t_on);
  doc.Read("segmenter", "t_off", c.segmenter.t_off);
  doc.Read("segmenter", "n_on", c.segmenter.n_on);
  doc.Read("segmenter", "n_off", c.segmenter.n_off);
  doc.Read("segmenter", "pre_roll", c.segmenter.pre_roll);
  doc.Read("segmenter", "post_roll", c.segmenter.post_roll);

  doc.Read("detect", "levels", c.levels);
  doc.Read("detect", "iou_threshold", c.nms_iou);
  doc.Read("detect", "min_area", c.prior.min_area);
  doc.Read("detect", "max_area_fraction", c.prior.max_area_fraction);
  doc.Read("detect", "aspect_min", c.prior.aspect_min);
  doc.Read("detect", "aspect_max", c.prior.aspect_max);
  doc.Read("detect", "border_band", c.prior.border_band);

  doc.Read("track", "min_hits", c.tracker.min_hits);
  doc.Read("track", "max_age", c.tracker.max_age);
  doc.Read("track", "lambda_iou", c.tracker.lambda_iou);
  doc.Read("track", "gate_iou", c.tracker.gate_iou);
  doc.Read("track", "process_noise", c.tracker.process_noise);
  doc.Read("track", "measurement_noise", c.tracker.measurement_noise);

  doc.Read("activity", "window", c.activity.window);
  doc.Read("activity", "hop", c.activity.hop);
  doc.Read("activity", "lookback", c.activity.lookback);
  doc.Read("activity", "stationary_speed", c.activity.stationary_speed);
  doc.Read("activity", "running_speed", c.activity.running_speed);
  doc.Read("activity", "loiter_displacement", c.activity.loiter_displacement);
  doc.Read("activity", "border_band", c.activity.border_band);
  doc.Read("activity", "min_radial_motion", c.activity.min_radial_motion);

  doc.Read("output", "save_clips", c.save_clips);
  doc.Read("output", "save_masks", c.save_masks);

  doc.RejectUnknown({"input", "background", "flow", "segmenter", "detect", "track",
                     "activity", "output"});
  c.Validate();
  return c;
}

inline PipelineConfig LoadPipelineConfig(const std::filesystem::path& path) {
  return ParsePipelineConfig(IniDocument::ParseFile(path));
}

/// The default configuration in file form.
inline std::string FormatPipelineConfig(const PipelineConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return FormatNumber(v); };
  o << "[input]\nframe_rate = " << num(c.frame_rate) << "\n\n";
  o << "[background]\nmethod = "
    << (c.background_method == BackgroundMethod::kGmm ? "gmm" : "frame_diff") << "\n"
    << "diff_threshold = " << c.diff_threshold << "\n"
    << "components = " << c.gmm.components << "\n"
    << "alpha = " << num(c.gmm.alpha) << "\n"
    << "match_sigmas = " << num(c.gmm.match_sigmas) << "\n"
    << "bg_threshold = " << num(c.gmm.bg_threshold) << "\n"
    << "variance_init = " << num(c.gmm.variance_init) << "\n"
    << "variance_floor = " << num(c.gmm.variance_floor) << "\n"
    << "weight_init = " << num(c.gmm.weight_init) << "\n\n";
  o << "[flow]\nenabled = " << (c.flow_enabled ? "true" : "false") << "\n"
    << "window_radius = " << c.flow.window_radius << "\n"
    << "pyramid_levels = " << c.flow.pyramid_levels << "\n"
    << "iterations_per_level = " << c.flow.iterations_per_level << "\n"
    << "min_eigenvalue = " << num(c.flow.min_eigenvalue) << "\n"
    << "magnitude_threshold = " << num(c.flow.magnitude_threshold) << "\n"
    << "stride = " << c.flow.stride << "\n\n";
  o << "[segmenter]\nfusion = " << FusionModeName(c.fusion) << "\n"
    << "t_on = " << num(c.segmenter.t_on) << "\n"
    << "t_off = " << num(c.segmenter.t_off) << "\n"
    << "n_on = " << c.segmenter.n_on << "\n"
    << "n_off = " << c.segmenter.n_off << "\n"
    << "pre_roll = " << c.segmenter.pre_roll << "\n"
    << "post_roll = " << c.segmenter.post_roll << "\n\n";
  o << "[detect]\nlevels = " << c.levels << "\n"
    << "iou_threshold = " << num(c.nms_iou) << "\n"
    << "min_area = " << num(c.prior.min_area) << "\n"
    << "max_area_fraction = " << num(c.prior.max_area_fraction) << "\n"
    << "aspect_min = " << num(c.prior.aspect_min) << "\n"
    << "aspect_max = " << num(c.prior.aspect_max) << "\n"
    << "border_band = " << c.prior.border_band << "\n\n";
  o << "[track]\nmin_hits = " << c.tracker.min_hits << "\n"
    << "max_age = " << c.tracker.max_age << "\n"
    << "lambda_iou = " << num(c.tracker.lambda_iou) << "\n"
    << "gate_iou = " << num(c.tracker.gate_iou) << "\n"
    << "process_noise = " << num(c.tracker.process_noise) << "\n"
    << "measurement_noise = " << num(c.tracker.measurement_noise) << "\n\n";
  o << "[activity]\nwindow = " << c.activity.window << "\n"
    << "hop = " << c.activity.hop << "\n"
    << "lookback = " << c.activity.lookback << "\n"
    << "stationary_speed = " << num(c.activity.stationary_speed) << "\n"
    << "running_speed = " << num(c.activity.running_speed) << "\n"
    << "loiter_displacement = " << num(c.activity.loiter_displacement) << "\n"
    << "border_band = " << num(c.activity.border_band) << "\n"
    << "min_radial_motion = " << num(c.activity.min_radial_motion) << "\n\n";
  o << "[output]\nsave_clips = " << (c.save_clips ? "true" : "false") << "\n"
    << "save_masks = " << (c.save_masks ? "true" : "false") << "\n";
  return o.str();
}

// Scene files use the same dialect:
//
//   [scene]      width, height, n_frames, background_level, noise_sigma,
//                frame_rate, seed, illumination = "frame:gain ..."
//   [object_N]   class, intensity, width, height, visible_first,
//                visible_last, trajectory = "frame:x:y ..."
//   [occluder_N] box = "x y w h", intensity, first_frame, last_frame

namespace detail {

inline std::vector<std::string> SplitTokens(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : s) {
    if (ch == sep || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

template <typename T>
T ParseScalar(const std::string& s, const std::string& what) {
  T v{};
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError("scene: bad number '" + s + "' in " + what);
  return v;
}

inline std::vector<std::string> SplitColons(const std::string& token, std::size_t n,
                                            const std::string& what) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = token.find(':', start);
    parts.push_back(token.substr(start, p - start));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  if (parts.size() != n) throw UsageError("scene: malformed '" + token + "' in " + what);
  return parts;
}

}  // namespace detail

inline SceneSpec ParseSceneSpec(IniDocument doc) {
  SceneSpec s;
  doc.Read("scene", "width", s.width);
  doc.Read("scene", "height", s.height);
  doc.Read("scene", "n_frames", s.n_frames);
  doc.Read("scene", "background_level", s.background_level);
  doc.Read("scene", "noise_sigma", s.noise_sigma);
  doc.Read("scene", "frame_rate", s.frame_rate);
  doc.Read("scene", "seed", s.seed);
  std::string gains;
  doc.Read("scene", "illumination", gains);
  if (!gains.empty()) {
    s.illumination.clear();
    for (const auto& tok : detail::SplitTokens(gains, ',')) {
      const auto p = detail::SplitColons(tok, 2, "illumination");
      s.illumination.push_back({detail::ParseScalar<std::int64_t>(p[0], "illumination"),
                                detail::ParseScalar<double>(p[1], "illumination")});
    }
  }

  std::set<std::string> allowed{"scene"};
  for (const auto& section : doc.Sections()) {
    if (section.starts_with("object_")) {
      ObjectSpec o;
      doc.Read(section, "class", o.class_label);
      doc.Read(section, "intensity", o.intensity);
      doc.Read(section, "width", o.width);
      doc.Read(section, "height", o.height);
      doc.Read(section, "visible_first", o.visible_first);
      doc.Read(section, "visible_last", o.visible_last);
      std::string traj;
      doc.Read(section, "trajectory", traj);
      for (const auto& tok : detail::SplitTokens(traj, ',')) {
        const auto p = detail::SplitColons(tok, 3, section);
        o.trajectory.push_back({detail::ParseScalar<std::int64_t>(p[0], section),
                                {detail::ParseScalar<double>(p[1], section),
                                 detail::ParseScalar<double>(p[2], section)}});
      }
      if (o.intensity < 0 || o.intensity > 255) throw UsageError("scene: intensity out of range");
      s.objects.push_back(std::move(o));
      allowed.insert(section);
    } else if (section.starts_with("occluder_")) {
      OccluderSpec occ;
      std::string box;
      doc.Read(section, "box", box);
      const auto p = detail::SplitTokens(box, ',');
      if (p.size() != 4) throw UsageError("scene: " + section + ".box needs 4 numbers");
      occ.box = {detail::ParseScalar<double>(p[0], section), detail::ParseScalar<double>(p[1], section),
                 detail::ParseScalar<double>(p[2], section), detail::ParseScalar<double>(p[3], section)};
      doc.Read(section, "intensity", occ.intensity);
      doc.Read(section, "first_frame", occ.first_frame);
      doc.Read(section, "last_frame", occ.last_frame);
      s.occluders.push_back(occ);
      allowed.insert(section);
    }
  }
  doc.RejectUnknown(allowed);
  s.Validate();
  return s;
}

inline SceneSpec LoadSceneSpec(const std::filesystem::path& path) {
  return ParseSceneSpec(IniDocument::ParseFile(path));
}

inline std::string FormatSceneSpec(const SceneSpec& s) {
  std::ostringstream o;
  o << "[scene]\nwidth = " << s.width << "\nheight = " << s.height
    << "\nn_frames = " << s.n_frames << "\nbackground_level = " << s.background_level
    << "\nnoise_sigma = " << FormatNumber(s.noise_sigma)
    << "\nframe_rate = " << FormatNumber(s.frame_rate) << "\nseed = " << s.seed
    << "\nillumination =";
  for (const auto& k : s.illumination) o << ' ' << k.frame << ':' << FormatNumber(k.value);
  o << "\n";
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& ob = s.objects[i];
    o << "\n[object_" << i << "]\nclass = " << ob.class_label << "\nintensity = " << ob.intensity
      << "\nwidth = " << ob.width << "\nheight = " << ob.height
      << "\nvisible_first = " << ob.visible_first << "\nvisible_last = " << ob.visible_last
      << "\ntrajectory =";
    for (const auto& k : ob.trajectory) {
      o << ' ' << k.frame << ':' << FormatNumber(k.value.x) << ':' << FormatNumber(k.value.y);
    }
    o << "\n";
  }
  for (std::size_t i = 0; i < s.occluders.size(); ++i) {
    const auto& oc = s.occluders[i];
    o << "\n[occluder_" << i << "]\nbox = " << FormatNumber(oc.box.x) << ' '
      << FormatNumber(oc.box.y) << ' ' << FormatNumber(oc.box.w) << ' ' << FormatNumber(oc.box.h)
      << "\nintensity = " << oc.intensity << "\nfirst_frame = " << oc.first_frame
      << "\nlast_frame = " << oc.last_frame << "\n";
  }
  return o.str();
}

}  // namespace idts
