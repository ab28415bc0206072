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

// Acceptance checks. `idts_acceptance --criterion N` runs one check and
// prints a single PASS/FAIL line; without arguments every check runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "event_oracle.hpp"
#include "idts/background.hpp"
#include "idts/config.hpp"
#include "idts/eval.hpp"
#include "idts/flow.hpp"
#include "idts/hungarian.hpp"
#include "idts/motionseg.hpp"
#include "idts/pipeline.hpp"
#include "idts/store.hpp"
#include "idts/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace {

using namespace idts;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::vector<ExchangeRecord> TruthRecords(const RenderedScene& scene) {
  std::vector<ExchangeRecord> gt;
  for (std::size_t f = 0; f < scene.truth.frames.size(); ++f) {
    for (const auto& o : scene.truth.frames[f]) {
      gt.push_back({static_cast<std::int64_t>(f), o.object_id, o.box, 1.0, o.class_label});
    }
  }
  return gt;
}

PipelineResult RunScene(const RenderedScene& scene, const SceneSpec& spec,
                        const PipelineConfig& cfg, int threads,
                        const std::filesystem::path& out = {}) {
  MemorySource source(scene.frames, spec.frame_rate);
  PipelineOptions opts;
  opts.out_dir = out;
  opts.source_name = "acceptance";
  opts.threads = threads;
  return RunPipeline(source, cfg, opts);
}

// 1. Hungarian assignment equals exhaustive search. Costs are multiples of
// 1/64 below 64, so every partial sum is exact in double and the two
// totals can be compared with ==.
Outcome Criterion1() {
  const auto t0 = Clock::now();
  std::mt19937 rng(101);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + rng() % 7, cols = 1 + rng() % 7;
    CostMatrix c(rows, cols);
    std::vector<std::vector<double>> ref(rows, std::vector<double>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < cols; ++k) {
        c(r, k) = ref[r][k] = static_cast<double>(rng() % 4096) / 64.0;
      }
    }
    const auto a = SolveAssignment(c);
    if (a.size() != std::min(rows, cols) ||
        AssignmentCost(c, a) != oracle::BruteForceAssignment(ref)) {
      ++mismatches;
    }
  }
  const double secs = Seconds(t0);
  return {mismatches == 0 && secs < 10.0,
          Fmt("1000 matrices up to 7x7, mismatches=%d, runtime=%.2fs (need 0, <10s)", mismatches,
              secs)};
}

// 2. Full-frame GMM against the scalar per-pixel reference, bit for bit.
Outcome Criterion2() {
  const int w = 64, h = 64, n = 100;
  std::mt19937 rng(202);
  // Half the frames are iid noise; the rest hover around a fixed scene with
  // occasional outliers so that matching, replacement and re-ranking all occur.
  const Frame base = testutil::RandomFrame(w, h, rng);
  std::normal_distribution<double> noise(0.0, 4.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Frame> frames;
  for (int t = 0; t < n; ++t) {
    if (t < n / 2 && t % 2 == 1) {
      frames.push_back(testutil::RandomFrame(w, h, rng));
      continue;
    }
    Frame f(w, h);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double v = u(rng) < 0.9 ? base.pixels[i] + noise(rng) : 255.0 * u(rng);
      f.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    frames.push_back(std::move(f));
  }

  auto same = [](float a, float b) { return std::memcmp(&a, &b, sizeof a) == 0; };
  long long mask_diff = 0, state_diff = 0;
  for (int threads : {1, 2, 4}) {
    GmmModel model(w, h);
    const auto& p = model.params();
    const oracle::GmmSettings s{p.components,    p.alpha,          p.match_sigmas, p.bg_threshold,
                                p.variance_init, p.variance_floor, p.weight_init};
    std::vector<oracle::ScalarGmmPixel> ref(static_cast<std::size_t>(w * h),
                                            oracle::ScalarGmmPixel(s));
    const Workers workers(threads);
    for (const auto& f : frames) {
      const Mask m = model.Apply(f, workers);
      for (std::size_t i = 0; i < f.size(); ++i) {
        if ((m.bits[i] != 0) != ref[i].Observe(f.pixels[i])) ++mask_diff;
        const auto px = model.pixel(i);
        const auto& rc = ref[i].components();
        for (std::size_t j = 0; j < px.size(); ++j) {
          if (!same(px[j].weight, rc[j].w) || !same(px[j].mean, rc[j].mu) ||
              !same(px[j].variance, rc[j].var)) {
            ++state_diff;
          }
        }
      }
    }
  }
  return {mask_diff == 0 && state_diff == 0,
          Fmt("100 frames 64x64, threads 1/2/4: mask mismatches=%lld, state mismatches=%lld",
              mask_diff, state_diff)};
}

// 3. Pyramidal LK recovers every integer translation with |dx|, |dy| <= 3
// (the square, which contains the Euclidean disc of radius 3).
Outcome Criterion3() {
  std::mt19937 rng(303);
  const int margin = 8;
  double worst = 1.0;
  std::string worst_d;
  int cases = 0;
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) {
      const auto [a, b] = testutil::TranslatedPair(128, 128, dx, dy, rng);
      const FlowField f = LucasKanade(a, b, LkParams{});
      int good = 0, valid = 0;
      for (int y = margin; y < 128 - margin; ++y) {
        for (int x = margin; x < 128 - margin; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * 128 + x;
          if (!f.valid[i]) continue;
          ++valid;
          if (std::hypot(f.u[i] - dx, f.v[i] - dy) <= 0.5) ++good;
        }
      }
      const double share = valid > 0 ? static_cast<double>(good) / valid : 0.0;
      ++cases;
      if (share < worst) {
        worst = share;
        worst_d = Fmt("(%d,%d)", dx, dy);
      }
    }
  }
  return {worst >= 0.90, Fmt("%d displacements, worst share within 0.5px=%.4f at %s (need >=0.90)",
                             cases, worst, worst_d.c_str())};
}

// 4. GMM against frame differencing under a global illumination ramp.
Outcome Criterion4() {
  const SceneSpec s = Preset("illumination_ramp");
  const PipelineConfig cfg;
  GmmModel gmm(s.width, s.height, cfg.gmm);
  const int min_area = static_cast<int>(cfg.ScaledMinArea(s.width, s.height));
  long long gmm_fg = 0, diff_fg = 0, blobs = 0;
  Frame prev;
  for (int f = 0; f < s.n_frames; ++f) {
    const Frame frame = RenderFrame(s, f);
    const Mask m = gmm.Apply(frame);
    if (f >= 50) {
      const Mask d = FrameDiff(prev, frame, 15);
      gmm_fg += static_cast<long long>(m.count());
      diff_fg += static_cast<long long>(d.count());
      blobs += static_cast<long long>(ConnectedComponents(m, min_area).size());
    }
    prev = frame;
  }
  const double ratio = diff_fg > 0 ? static_cast<double>(gmm_fg) / diff_fg : (gmm_fg ? 1e9 : 0);
  return {ratio <= 0.1 && blobs == 0,
          Fmt("frames 50-299: gmm fg px=%lld, diff fg px=%lld, ratio=%.4f (need <=0.1), gmm blobs "
              ">=%d px=%lld (need 0)",
              gmm_fg, diff_fg, ratio, min_area, blobs)};
}

// 5. Blob detector precision and recall on three_objects.
Outcome Criterion5() {
  const SceneSpec s = Preset("three_objects");
  const auto t0 = Clock::now();
  const RenderedScene scene = RenderScene(s);
  const PipelineResult r = RunScene(scene, s, PipelineConfig{}, 1);
  const double secs = Seconds(t0);
  const DetMetrics m = EvaluateDetections(TruthRecords(scene), r.detections, 0.5);
  return {m.precision >= 0.90 && m.recall >= 0.85 && secs < 60.0,
          Fmt("precision=%.4f recall=%.4f (tp=%lld fp=%lld fn=%lld), runtime=%.1fs (need "
              ">=0.90, >=0.85, <60s)",
              m.precision, m.recall, m.tp, m.fp, m.fn, secs)};
}

// 6. Tracking degrades under occlusion by a bounded amount, without id switches.
Outcome Criterion6() {
  const SceneSpec with = Preset("occlusion_crossing");
  SceneSpec without = with;
  without.occluders.clear();
  PipelineConfig cfg;
  cfg.tracker.max_age = 30;

  const RenderedScene sw = RenderScene(with);
  // Longest run of fully hidden frames per object.
  int longest = 0;
  std::map<int, int> run;
  for (const auto& frame : sw.truth.frames) {
    std::set<int> hidden;
    for (const auto& o : frame) {
      if (o.occluded_fraction >= 1.0) hidden.insert(o.object_id);
    }
    for (auto& [id, n] : run) {
      if (!hidden.contains(id)) n = 0;
    }
    for (int id : hidden) longest = std::max(longest, ++run[id]);
  }

  const TrackMetrics mw = EvaluateTracks(TruthRecords(sw), RunScene(sw, with, cfg, 1).tracks, 0.5);
  const RenderedScene so = RenderScene(without);
  const TrackMetrics mo = EvaluateTracks(TruthRecords(so), RunScene(so, without, cfg, 1).tracks, 0.5);
  const double gap = mo.f1 - mw.f1;
  return {gap >= 0.03 && gap <= 0.15 && mw.id_switches == 0 && longest >= 1 && longest <= 10,
          Fmt("f1 without=%.4f with=%.4f gap=%.4f (need [0.03,0.15]), id switches=%lld (need 0), "
              "longest full occlusion=%d frames",
              mo.f1, mw.f1, gap, mw.id_switches, longest)};
}

// 7. Clips cover all activity and little else.
Outcome Criterion7() {
  const PipelineConfig cfg;
  const auto& sp = cfg.segmenter;
  bool ok = true;
  std::ostringstream detail;
  for (const auto& name : PresetNames()) {
    const SceneSpec s = Preset(name);
    const bool quiet = name == "quiet";
    if (!quiet && s.objects.empty()) continue;
    const RenderedScene scene = RenderScene(s);
    const PipelineResult r = RunScene(scene, s, cfg, 1);
    if (quiet) {
      ok = ok && r.clips.empty();
      detail << name << ": clips=" << r.clips.size() << " (need 0); ";
      continue;
    }
    long long gt_frames = 0, uncovered = 0, recorded = 0;
    for (const auto& iv : scene.truth.activity) {
      gt_frames += iv.end - iv.start + 1;
      for (std::int64_t f = iv.start; f <= iv.end; ++f) {
        const bool in = std::any_of(r.clips.begin(), r.clips.end(), [&](const ClipRange& c) {
          return c.frame_start <= f && f <= c.frame_end;
        });
        if (!in) ++uncovered;
      }
    }
    for (const auto& c : r.clips) recorded += c.frame_end - c.frame_start + 1;
    const double bound =
        1.05 * static_cast<double>(gt_frames + static_cast<long long>(sp.pre_roll + sp.post_roll + sp.n_off) *
                                                   static_cast<long long>(r.clips.size()));
    const bool good = uncovered == 0 && static_cast<double>(recorded) <= bound && gt_frames > 0;
    ok = ok && good;
    detail << name << ": clips=" << r.clips.size() << " uncovered=" << uncovered
           << " recorded=" << recorded << " bound=" << Fmt("%.1f", bound) << "; ";
  }
  return {ok, detail.str()};
}

bool SameOutputs(const PipelineResult& a, const PipelineResult& b) {
  auto text = [](const std::vector<ExchangeRecord>& r) {
    std::ostringstream o;
    WriteExchange(o, r);
    return o.str();
  };
  return a.events == b.events && text(a.tracks) == text(b.tracks) &&
         text(a.detections) == text(b.detections);
}

// 8. Throughput: stride-2 flow, single thread >= 30 fps; four threads at most
// 0.6x the single-threaded wall time with identical outputs.
Outcome Criterion8() {
  const SceneSpec s = Preset("three_objects");
  const RenderedScene scene = RenderScene(s);
  PipelineConfig cfg;
  cfg.flow.stride = 2;
  const PipelineResult one = RunScene(scene, s, cfg, 1);
  const PipelineResult four = RunScene(scene, s, cfg, 4);
  const bool same = SameOutputs(one, four);
  const double ratio = four.bench.total_ms / one.bench.total_ms;
  const unsigned cores = std::thread::hardware_concurrency();
  return {one.bench.fps() >= 30.0 && ratio <= 0.6 && same,
          Fmt("320x240 %lld frames: 1 thread %.1f fps (need >=30), 4 threads %.1f fps, wall "
              "ratio=%.3f (need <=0.6), identical outputs=%s, hardware threads=%u",
              one.bench.frames, one.bench.fps(), four.bench.fps(), ratio, same ? "yes" : "no",
              cores)};
}

// 9. Thread count does not change any persisted byte.
Outcome Criterion9() {
  auto slurp = [](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) return std::string("<missing>");
    const auto bytes = ReadFileBytes(p);
    return std::string(bytes.begin(), bytes.end());
  };
  int compared = 0, differing = 0;
  std::size_t manifests = 0;
  bool nonempty = true;
  for (const char* name : {"three_objects", "occlusion_crossing"}) {
    const SceneSpec s = Preset(name);
    const RenderedScene scene = RenderScene(s);
    testutil::TempDir a, b;
    const PipelineResult ra = RunScene(scene, s, PipelineConfig{}, 1, a.path());
    RunScene(scene, s, PipelineConfig{}, 4, b.path());
    ++compared;
    if (slurp(a.path() / "events.jsonl") != slurp(b.path() / "events.jsonl")) ++differing;
    for (const auto& c : ra.clips) {
      ++compared;
      ++manifests;
      const auto rel = std::filesystem::path("clips") / ("clip_" + std::to_string(c.clip_id)) /
                       "manifest.json";
      if (slurp(a.path() / rel) != slurp(b.path() / rel)) ++differing;
    }
    nonempty = nonempty && !ra.clips.empty() && !slurp(a.path() / "events.jsonl").empty();
  }
  return {differing == 0 && nonempty,
          Fmt("threads 1 vs 4 on two presets: %d files compared (2 event logs + %zu manifests), "
              "%d differ",
              compared, manifests, differing)};
}

// 10. Append 10k events, then 100 random queries against a predicate scan.
Outcome Criterion10() {
  testutil::TempDir dir;
  const auto path = dir.path() / "events.jsonl";
  std::mt19937 rng(1010);
  std::vector<EventRecord> written;
  {
    EventWriter w(path);
    for (int i = 0; i < 10000; ++i) {
      written.push_back(oracle::RandomEvent(rng, i / 3));
      w.Append(written.back());
    }
  }
  int mismatched = 0;
  std::size_t total_hits = 0;
  for (int q = 0; q < 100; ++q) {
    const auto f = oracle::RandomFilter(rng);
    const bool by_frames = q % 3 == 2;
    const auto got = Query(path, oracle::ToQueryFilter(f, by_frames));
    const auto want = oracle::RefQuery(written, f, by_frames);
    total_hits += want.size();
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) same = got[i] == written[want[i]];
    if (!same) ++mismatched;
  }
  return {mismatched == 0, Fmt("10000 records, 100 filters (%zu expected hits): %d mismatched",
                               total_hits, mismatched)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& Criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"hungarian oracle equivalence", Criterion1},
      {"gmm oracle equivalence", Criterion2},
      {"optical flow recovery", Criterion3},
      {"illumination robustness", Criterion4},
      {"detection quality", Criterion5},
      {"occlusion degradation", Criterion6},
      {"segmentation coverage", Criterion7},
      {"throughput", Criterion8},
      {"determinism", Criterion9},
      {"storage search round-trip", Criterion10},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Acceptance checks");
  int which = 0;
  app.add_option("--criterion", which, "Run one criterion (1-10); default runs all")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (std::size_t i = 0; i < Criteria().size(); ++i) {
    if (which != 0 && static_cast<int>(i) + 1 != which) continue;
    const auto& [name, run] = Criteria()[i];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << name
              << "): " << o.detail << std::endl;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
