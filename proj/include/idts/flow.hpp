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
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "idts/error.hpp"
#include "idts/frame_io.hpp"
#include "idts/mask.hpp"
#include "idts/parallel.hpp"

namespace idts {

template <typename T>
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(int w, int h, T fill = T{})
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  T at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  T clamped(int x, int y) const {
    return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
  }
};

using ImagePlane = Plane<float>;

/// Intensities scaled to [0,1].
inline ImagePlane Normalize(const Frame& frame) {
  ImagePlane p(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    p.data[i] = static_cast<float>(frame.pixels[i]) / 255.0f;
  }
  return p;
}

/// 2x box-filter reduction; odd trailing rows/columns average with a
/// clamped neighbour.
inline ImagePlane Downsample2(const ImagePlane& src) {
  ImagePlane dst((src.width + 1) / 2, (src.height + 1) / 2);
  for (int y = 0; y < dst.height; ++y) {
    for (int x = 0; x < dst.width; ++x) {
      const int sx = 2 * x;
      const int sy = 2 * y;
      dst.at(x, y) = 0.25f * (src.clamped(sx, sy) + src.clamped(sx + 1, sy) +
                              src.clamped(sx, sy + 1) +
                              src.clamped(sx + 1, sy + 1));
    }
  }
  return dst;
}

/// Bilinear sample with border clamp.
inline float SampleBilinear(const ImagePlane& p, float x, float y) {
  x = std::clamp(x, 0.0f, static_cast<float>(p.width - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(p.height - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, p.width - 1);
  const int y1 = std::min(y0 + 1, p.height - 1);
  const float fx = x - static_cast<float>(x0);
  const float fy = y - static_cast<float>(y0);
  const float top = p.at(x0, y0) + fx * (p.at(x1, y0) - p.at(x0, y0));
  const float bot = p.at(x0, y1) + fx * (p.at(x1, y1) - p.at(x0, y1));
  return top + fy * (bot - top);
}

struct GradientPlanes {
  ImagePlane ix;
  ImagePlane iy;
  ImagePlane it;
};

namespace detail {

// Rows [y0, y1) of the spatial/temporal derivatives of the pair (a, b).
inline void GradientRows(const ImagePlane& a, const ImagePlane& b,
                         ImagePlane& avg, GradientPlanes& g, int y0, int y1) {
  const int w = a.width;
  const int h = a.height;
  auto mean_at = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    return 0.5f * (a.data[i] + b.data[i]);
  };
  for (int y = y0; y < y1; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      avg.data[i] = 0.5f * (a.data[i] + b.data[i]);
      g.ix.data[i] = 0.5f * (mean_at(x + 1, y) - mean_at(x - 1, y));
      g.iy.data[i] = 0.5f * (mean_at(x, y + 1) - mean_at(x, y - 1));
      g.it.data[i] = b.data[i] - a.data[i];
    }
  }
}

}  // namespace detail

/// Ix, Iy: central differences of (a+b)/2 with clamped borders.
/// It: b - a. Inputs are expected in [0,1].
inline GradientPlanes ComputeGradients(const ImagePlane& a, const ImagePlane& b) {
  CheckSameSize(a.width, a.height, b.width, b.height, "gradients");
  GradientPlanes g{ImagePlane(a.width, a.height), ImagePlane(a.width, a.height),
                   ImagePlane(a.width, a.height)};
  ImagePlane avg(a.width, a.height);
  detail::GradientRows(a, b, avg, g, 0, a.height);
  return g;
}

struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;
  std::vector<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h),
        u(static_cast<std::size_t>(w) * h, 0.0f),
        v(static_cast<std::size_t>(w) * h, 0.0f),
        valid(static_cast<std::size_t>(w) * h, 0) {}
};

struct LkParams {
  int window_radius = 3;
  int pyramid_levels = 3;
  int iterations_per_level = 3;
  double min_eigenvalue = 1e-4;
  double magnitude_threshold = 0.5;
  int stride = 1;

  int window_area() const { return (2 * window_radius + 1) * (2 * window_radius + 1); }

  void Validate() const {
    if (window_radius < 1) throw UsageError("flow.window_radius must be >= 1");
    if (pyramid_levels < 1) throw UsageError("flow.pyramid_levels must be >= 1");
    if (iterations_per_level < 1) {
      throw UsageError("flow.iterations_per_level must be >= 1");
    }
    if (!(min_eigenvalue > 0)) throw UsageError("flow.min_eigenvalue must be > 0");
    if (!(magnitude_threshold >= 0)) {
      throw UsageError("flow.magnitude_threshold must be >= 0");
    }
    if (stride < 1) throw UsageError("flow.stride must be >= 1");
  }
};

namespace detail {

// Summed-area tables for the five structure-tensor products.
class TensorSums {
 public:
  TensorSums(int w, int h) : w_(w), h_(h) {
    for (auto& t : tables_) t.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  }

  void Build(const GradientPlanes& g, const Workers& workers) {
    // Row prefix sums are independent; the column pass is a running sum.
    workers.ForRows(static_cast<std::size_t>(h_), [&](std::size_t y0, std::size_t y1) {
      for (std::size_t y = y0; y < y1; ++y) {
        std::array<double, 5> run{};
        const std::size_t src = y * w_;
        const std::size_t dst = (y + 1) * (w_ + 1);
        for (int x = 0; x < w_; ++x) {
          const double ix = g.ix.data[src + x];
          const double iy = g.iy.data[src + x];
          const double it = g.it.data[src + x];
          run[0] += ix * ix;
          run[1] += ix * iy;
          run[2] += iy * iy;
          run[3] += ix * it;
          run[4] += iy * it;
          for (int k = 0; k < 5; ++k) tables_[k][dst + x + 1] = run[k];
        }
      }
    });
    for (auto& t : tables_) {
      for (int y = 1; y <= h_; ++y) {
        double* row = t.data() + static_cast<std::size_t>(y) * (w_ + 1);
        const double* above = row - (w_ + 1);
        for (int x = 1; x <= w_; ++x) row[x] += above[x];
      }
    }
  }

  // Window sums over [x0,x1]x[y0,y1] (inclusive, already clamped).
  std::array<double, 5> Sum(int x0, int y0, int x1, int y1) const {
    std::array<double, 5> s{};
    const std::size_t stride = w_ + 1;
    const std::size_t a = static_cast<std::size_t>(y0) * stride + x0;
    const std::size_t b = static_cast<std::size_t>(y0) * stride + x1 + 1;
    const std::size_t c = static_cast<std::size_t>(y1 + 1) * stride + x0;
    const std::size_t d = static_cast<std::size_t>(y1 + 1) * stride + x1 + 1;
    for (int k = 0; k < 5; ++k) {
      const auto& t = tables_[k];
      s[k] = t[d] - t[b] - t[c] + t[a];
    }
    return s;
  }

 private:
  int w_;
  int h_;
  std::array<std::vector<double>, 5> tables_;
};

inline double MinEigenvalue(double gxx, double gxy, double gyy) {
  const double half_trace = 0.5 * (gxx + gyy);
  const double half_diff = 0.5 * (gxx - gyy);
  return half_trace - std::sqrt(half_diff * half_diff + gxy * gxy);
}

}  // namespace detail

namespace detail {

// Gauss-Newton refinement of one pixel's displacement. The window is
// translated rigidly by the current estimate and `curr` is resampled
// bilinearly; the structure tensor stays fixed for the level.
inline void RefinePixel(const ImagePlane& prev, const ImagePlane& curr,
                        const GradientPlanes& g, int x0, int y0, int x1, int y1,
                        double gxx, double gxy, double gyy, int iterations,
                        float& du, float& dv) {
  const int w = prev.width;
  const int h = prev.height;
  const double det = gxx * gyy - gxy * gxy;
  for (int iter = 0; iter < iterations; ++iter) {
    const float fx = std::floor(du);
    const float fy = std::floor(dv);
    const int ox = static_cast<int>(fx);
    const int oy = static_cast<int>(fy);
    const float ax = du - fx;
    const float ay = dv - fy;
    double bx = 0.0;
    double by = 0.0;
    if (x0 + ox >= 0 && x1 + ox + 1 < w && y0 + oy >= 0 && y1 + oy + 1 < h) {
      const float w00 = (1 - ax) * (1 - ay);
      const float w10 = ax * (1 - ay);
      const float w01 = (1 - ax) * ay;
      const float w11 = ax * ay;
      for (int qy = y0; qy <= y1; ++qy) {
        const float* c0 = curr.data.data() + static_cast<std::size_t>(qy + oy) * w + ox;
        const float* c1 = c0 + w;
        const std::size_t row = static_cast<std::size_t>(qy) * w;
        float sx = 0.0f;
        float sy = 0.0f;
        for (int qx = x0; qx <= x1; ++qx) {
          const float sample =
              w00 * c0[qx] + w10 * c0[qx + 1] + w01 * c1[qx] + w11 * c1[qx + 1];
          const float it = sample - prev.data[row + qx];
          sx += g.ix.data[row + qx] * it;
          sy += g.iy.data[row + qx] * it;
        }
        bx += sx;
        by += sy;
      }
    } else {
      for (int qy = y0; qy <= y1; ++qy) {
        for (int qx = x0; qx <= x1; ++qx) {
          const std::size_t i = static_cast<std::size_t>(qy) * w + qx;
          const float sample = SampleBilinear(curr, static_cast<float>(qx) + du,
                                              static_cast<float>(qy) + dv);
          const float it = sample - prev.data[i];
          bx += g.ix.data[i] * it;
          by += g.iy.data[i] * it;
        }
      }
    }
    const float step_x = static_cast<float>(-(gyy * bx - gxy * by) / det);
    const float step_y = static_cast<float>(-(gxx * by - gxy * bx) / det);
    du += step_x;
    dv += step_y;
    if (step_x * step_x + step_y * step_y < 1e-4f) break;
  }
}

}  // namespace detail

/// Dense coarse-to-fine Lucas-Kanade.
///
/// Each level starts from the doubled estimate of the coarser level. The
/// structure tensor G comes from the spatial gradients of `prev` at that
/// level and stays fixed while every pixel runs up to iterations_per_level
/// Gauss-Newton steps, resampling its window of `curr` (bilinear) at the
/// current displacement before each step. Pixels whose
/// smallest eigenvalue of G falls below min_eigenvalue * window_area keep
/// their incoming estimate; at the finest level they are marked invalid and
/// zeroed. With stride > 1 the solve runs on a stride grid and each cell
/// takes its anchor's result.
inline FlowField LucasKanade(const Frame& prev, const Frame& curr,
                             const LkParams& params,
                             const Workers& workers = Workers::Serial()) {
  params.Validate();
  CheckSameSize(prev.width, prev.height, curr.width, curr.height, "lk_flow");
  const int win = 2 * params.window_radius + 1;
  if (prev.width < win || prev.height < win) {
    throw FormatError("lk_flow: frame " + std::to_string(prev.width) + "x" +
                      std::to_string(prev.height) + " smaller than the " +
                      std::to_string(win) + "x" + std::to_string(win) + " window");
  }

  std::vector<ImagePlane> prev_pyr{Normalize(prev)};
  std::vector<ImagePlane> curr_pyr{Normalize(curr)};
  for (int l = 1; l < params.pyramid_levels; ++l) {
    prev_pyr.push_back(Downsample2(prev_pyr.back()));
    curr_pyr.push_back(Downsample2(curr_pyr.back()));
  }

  const double threshold = params.min_eigenvalue * params.window_area();
  const int r = params.window_radius;
  const int stride = params.stride;

  ImagePlane u;
  ImagePlane v;
  std::vector<std::uint8_t> valid;
  for (int level = params.pyramid_levels - 1; level >= 0; --level) {
    const ImagePlane& a = prev_pyr[level];
    const ImagePlane& b = curr_pyr[level];
    const int w = a.width;
    const int h = a.height;
    const bool finest = level == 0;

    if (u.data.empty()) {
      u = ImagePlane(w, h);
      v = ImagePlane(w, h);
    } else {
      ImagePlane uf(w, h);
      ImagePlane vf(w, h);
      for (int y = 0; y < h; ++y) {
        const int cy = std::min(y / 2, u.height - 1);
        for (int x = 0; x < w; ++x) {
          const int cx = std::min(x / 2, u.width - 1);
          uf.at(x, y) = 2.0f * u.at(cx, cy);
          vf.at(x, y) = 2.0f * v.at(cx, cy);
        }
      }
      u = std::move(uf);
      v = std::move(vf);
    }

    GradientPlanes g{ImagePlane(w, h), ImagePlane(w, h), ImagePlane(w, h)};
    ImagePlane avg(w, h);
    workers.ForRows(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
      detail::GradientRows(a, a, avg, g, static_cast<int>(y0), static_cast<int>(y1));
    });
    detail::TensorSums sums(w, h);
    sums.Build(g, workers);
    if (finest) valid.assign(static_cast<std::size_t>(w) * h, 0);

    const int grid_rows = (h + stride - 1) / stride;
    workers.ForRows(static_cast<std::size_t>(grid_rows), [&](std::size_t g0, std::size_t g1) {
      for (std::size_t gy = g0; gy < g1; ++gy) {
        const int y = static_cast<int>(gy) * stride;
        for (int x = 0; x < w; x += stride) {
          const int x0 = std::max(0, x - r);
          const int y0 = std::max(0, y - r);
          const int x1 = std::min(w - 1, x + r);
          const int y1 = std::min(h - 1, y + r);
          const auto s = sums.Sum(x0, y0, x1, y1);
          const bool ok = detail::MinEigenvalue(s[0], s[1], s[2]) >= threshold;
          const std::size_t anchor = static_cast<std::size_t>(y) * w + x;
          float du = u.data[anchor];
          float dv = v.data[anchor];
          if (ok) {
            detail::RefinePixel(a, b, g, x0, y0, x1, y1, s[0], s[1], s[2],
                                params.iterations_per_level, du, dv);
          }
          const int ymax = std::min(h, y + stride);
          const int xmax = std::min(w, x + stride);
          for (int cy = y; cy < ymax; ++cy) {
            for (int cx = x; cx < xmax; ++cx) {
              const std::size_t i = static_cast<std::size_t>(cy) * w + cx;
              u.data[i] = du;
              v.data[i] = dv;
              if (finest) valid[i] = ok ? 1 : 0;
            }
          }
        }
      }
    });
  }

  FlowField flow(prev.width, prev.height);
  for (std::size_t i = 0; i < flow.valid.size(); ++i) {
    if (valid[i]) {
      flow.valid[i] = 1;
      flow.u[i] = u.data[i];
      flow.v[i] = v.data[i];
    }
  }
  return flow;
}

/// Valid pixels whose displacement magnitude exceeds `threshold`.
inline Mask FlowMask(const FlowField& flow, double threshold) {
  Mask mask(flow.width, flow.height);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!flow.valid[i]) continue;
    const double m = std::hypot(static_cast<double>(flow.u[i]),
                                static_cast<double>(flow.v[i]));
    mask.bits[i] = m > threshold ? 1 : 0;
  }
  return mask;
}

/// Magnitude scaled so `full_scale` px/frame maps to 255.
inline Frame FlowMagnitudeImage(const FlowField& flow, double full_scale = 4.0) {
  Frame out(flow.width, flow.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = std::hypot(flow.u[i], flow.v[i]) / full_scale * 255.0;
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(m), 0L, 255L));
  }
  return out;
}

}  // namespace idts
