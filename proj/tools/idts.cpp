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

// Command-line front end: synth, process, search, eval, bench.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "idts/config.hpp"
#include "idts/error.hpp"
#include "idts/eval.hpp"
#include "idts/exchange.hpp"
#include "idts/pipeline.hpp"
#include "idts/store.hpp"
#include "idts/synth.hpp"

namespace fs = std::filesystem;

namespace {

using namespace idts;

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

PipelineConfig ConfigOrDefault(const std::string& path) {
  return path.empty() ? PipelineConfig{} : LoadPipelineConfig(path);
}

struct SynthArgs {
  std::string preset;
  std::string scene;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

int RunSynth(const SynthArgs& a) {
  if (a.preset.empty() == a.scene.empty()) {
    throw UsageError("synth: give exactly one of --preset or --scene");
  }
  SceneSpec spec = a.preset.empty() ? LoadSceneSpec(a.scene) : Preset(a.preset);
  if (a.seed) spec.seed = *a.seed;
  const fs::path out(a.out);
  fs::create_directories(out);
  const RenderedScene scene = RenderScene(spec, Workers(a.threads));
  for (const auto& f : scene.frames) WritePgmFile(out / ClipFrameName(f.index), f);

  std::vector<ExchangeRecord> gt;
  for (std::size_t f = 0; f < scene.truth.frames.size(); ++f) {
    for (const auto& o : scene.truth.frames[f]) {
      gt.push_back({static_cast<std::int64_t>(f), o.object_id, o.box,
                    1.0 - o.occluded_fraction, o.class_label});
    }
  }
  WriteExchangeFile(out / "gt.txt", gt);

  std::string intervals;
  for (const auto& iv : scene.truth.activity) {
    intervals += std::to_string(iv.start) + "," + std::to_string(iv.end) + "\n";
  }
  WriteText(out / "activity.txt", intervals);
  std::string labels;
  for (const auto& oa : scene.truth.object_activity) {
    labels += std::to_string(oa.object_id) + "," + std::to_string(oa.start) + "," +
              std::to_string(oa.end) + "," + oa.label + "\n";
  }
  WriteText(out / "object_activity.txt", labels);
  WriteText(out / "scene.ini", FormatSceneSpec(spec));
  std::cout << "frames=" << scene.frames.size() << "\nobjects=" << spec.objects.size()
            << "\nactivity_intervals=" << scene.truth.activity.size() << "\n";
  return 0;
}

struct ProcessArgs {
  std::string input;
  std::string out;
  std::string config;
  std::string detections;
  bool save_masks = false;
  int threads = 1;
};

PipelineResult RunProcessPipeline(const ProcessArgs& a, const PipelineConfig& config) {
  auto source = OpenSource(a.input, config.frame_rate);
  PipelineOptions opts;
  opts.out_dir = a.out;
  opts.source_name = a.input;
  opts.threads = a.threads;
  opts.save_masks = a.save_masks;
  if (!a.detections.empty()) opts.external = LoadExternalDetections(a.detections);
  return RunPipeline(*source, config, opts);
}

int RunProcess(const ProcessArgs& a) {
  const PipelineConfig config = ConfigOrDefault(a.config);
  const PipelineResult r = RunProcessPipeline(a, config);
  std::cout << "frames=" << r.frames << "\nclips=" << r.clips.size()
            << "\nevents=" << r.events.size() << "\ndetections=" << r.detections.size()
            << "\ntrack_boxes=" << r.tracks.size() << "\n";
  return 0;
}

struct SearchArgs {
  std::string index;
  std::optional<std::int64_t> from;
  std::optional<std::int64_t> to;
  std::optional<std::int64_t> frame_from;
  std::optional<std::int64_t> frame_to;
  std::string class_label;
  std::string activity;
  std::string kind;
};

int RunSearch(const SearchArgs& a) {
  QueryFilter f;
  if (a.from || a.to) {
    f.time_ms = std::make_pair(a.from.value_or(0), a.to.value_or(INT64_MAX));
  }
  if (a.frame_from || a.frame_to) {
    f.frames = std::make_pair(a.frame_from.value_or(0), a.frame_to.value_or(INT64_MAX));
  }
  if (!a.class_label.empty()) f.class_label = a.class_label;
  if (!a.activity.empty()) f.activity_label = a.activity;
  if (!a.kind.empty()) {
    f.kind = ParseEventKind(a.kind);
    if (!f.kind) throw UsageError("--kind must be clip, track or activity");
  }
  for (const auto& r : Query(fs::path(a.index), f)) std::cout << EventToJson(r) << "\n";
  return 0;
}

struct EvalArgs {
  std::string gt;
  std::string pred;
  double iou = 0.5;
  std::string mode = "auto";
  std::string json;
};

int RunEval(const EvalArgs& a) {
  if (!(a.iou > 0 && a.iou <= 1)) throw UsageError("--iou must be in (0,1]");
  const auto gt = ReadExchangeFile(a.gt);
  const auto pred = ReadExchangeFile(a.pred);
  std::string mode = a.mode;
  if (mode == "auto") {
    mode = "track";
    for (const auto* set : {&gt, &pred}) {
      for (const auto& r : *set) {
        if (r.id < 0) mode = "det";
      }
    }
  }
  nlohmann::ordered_json j;
  if (mode == "det") {
    const DetMetrics m = EvaluateDetections(gt, pred, a.iou);
    j["mode"] = "det";
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
  } else if (mode == "track") {
    const TrackMetrics m = EvaluateTracks(gt, pred, a.iou);
    j["mode"] = "track";
    j["tp"] = m.det.tp;
    j["fp"] = m.det.fp;
    j["fn"] = m.det.fn;
    j["precision"] = m.det.precision;
    j["recall"] = m.det.recall;
    j["f1"] = m.f1;
    j["id_switches"] = m.id_switches;
    j["mostly_tracked"] = m.mostly_tracked_fraction;
    j["mota"] = m.mota;
  } else {
    throw UsageError("--mode must be auto, det or track");
  }
  for (const auto& [k, v] : j.items()) {
    std::cout << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
  if (!a.json.empty()) WriteText(a.json, j.dump(2) + "\n");
  return 0;
}

struct BenchArgs {
  std::string input;
  std::string preset;
  std::string config;
  std::string out;
  std::string json;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

int RunBench(const BenchArgs& a) {
  if (a.input.empty() == a.preset.empty()) {
    throw UsageError("bench: give exactly one of --input or --preset");
  }
  const PipelineConfig config = ConfigOrDefault(a.config);
  std::unique_ptr<FrameSource> source;
  if (!a.preset.empty()) {
    SceneSpec spec = Preset(a.preset);
    if (a.seed) spec.seed = *a.seed;
    source = std::make_unique<MemorySource>(RenderScene(spec).frames, spec.frame_rate);
  } else {
    source = OpenSource(a.input, config.frame_rate);
  }
  fs::path out = a.out;
  const bool scratch = out.empty();
  if (scratch) out = fs::temp_directory_path() / ("idts_bench_" + std::to_string(::getpid()));
  PipelineOptions opts;
  opts.out_dir = out;
  opts.source_name = a.preset.empty() ? a.input : "preset:" + a.preset;
  opts.threads = a.threads;
  const PipelineResult r = RunPipeline(*source, config, opts);
  if (scratch) fs::remove_all(out);

  nlohmann::ordered_json j;
  j["frames"] = r.bench.frames;
  j["threads"] = r.bench.threads;
  for (const auto& [stage, ms] : r.bench.stage_ms) j["stage_" + stage + "_ms"] = ms;
  j["total_ms"] = r.bench.total_ms;
  j["fps"] = r.bench.fps();
  for (const auto& [k, v] : j.items()) std::cout << k << "=" << v.dump() << "\n";
  if (!a.json.empty()) WriteText(a.json, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"idts: motion-triggered video analysis"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render a synthetic scene with ground truth");
  s->add_option("--preset", synth.preset, "Named preset scene");
  s->add_option("--scene", synth.scene, "Scene description file");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--seed", synth.seed, "Override the scene noise seed");
  s->add_option("--threads", synth.threads, "Render threads")->check(CLI::PositiveNumber);

  ProcessArgs proc;
  auto* p = app.add_subcommand("process", "Run the analysis pipeline over a video");
  p->add_option("--input", proc.input, "PGM directory or Y4M file")->required();
  p->add_option("--out", proc.out, "Output directory")->required();
  p->add_option("--config", proc.config, "Pipeline config file");
  p->add_option("--detections", proc.detections, "External detections (exchange format)");
  p->add_flag("--save-masks", proc.save_masks, "Write cleaned motion masks as PGM");
  p->add_option("--threads", proc.threads, "Worker threads")->check(CLI::PositiveNumber);

  SearchArgs search;
  auto* q = app.add_subcommand("search", "Query an event index");
  q->add_option("--index", search.index, "events.jsonl")->required();
  q->add_option("--from", search.from, "Time range start (ms)");
  q->add_option("--to", search.to, "Time range end (ms)");
  q->add_option("--frame-from", search.frame_from, "Frame range start");
  q->add_option("--frame-to", search.frame_to, "Frame range end");
  q->add_option("--class", search.class_label, "Exact class label");
  q->add_option("--activity", search.activity, "Exact activity label");
  q->add_option("--kind", search.kind, "clip, track or activity");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against ground truth");
  e->add_option("--gt", ev.gt, "Ground-truth exchange file")->required();
  e->add_option("--pred", ev.pred, "Predicted exchange file")->required();
  e->add_option("--iou", ev.iou, "IoU match threshold")->capture_default_str();
  e->add_option("--mode", ev.mode, "auto, det or track")->capture_default_str();
  e->add_option("--json", ev.json, "Also write the report as JSON");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time every pipeline stage");
  b->add_option("--input", bench.input, "PGM directory or Y4M file");
  b->add_option("--preset", bench.preset, "Render a preset in memory instead");
  b->add_option("--seed", bench.seed, "Preset noise seed");
  b->add_option("--config", bench.config, "Pipeline config file");
  b->add_option("--out", bench.out, "Keep pipeline outputs here");
  b->add_option("--json", bench.json, "Also write the report as JSON");
  b->add_option("--threads", bench.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*s) return RunSynth(synth);
    if (*p) return RunProcess(proc);
    if (*q) return RunSearch(search);
    if (*e) return RunEval(ev);
    if (*b) return RunBench(bench);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const FormatError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 1;
}
