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

// Reference implementations used only by the tests. Each is written
// straight from the operation's definition and shares no code with the
// library routine it checks: brute force where possible, plain loops and
// hand-rolled matrix arithmetic elsewhere.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------- assignment

/// Minimum total cost over every way of pairing min(rows, cols) rows with
/// distinct columns. `cost` is row-major.
inline double BruteForceAssignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t rows = cost.size();
  if (rows == 0) return 0.0;
  const std::size_t cols = cost[0].size();
  if (cols == 0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  if (rows <= cols) {
    std::vector<int> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (std::size_t r = 0; r < rows; ++r) total += cost[r][perm[r]];
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<int> perm(rows);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      // perm[c] is the row given column c; sum in row order so the
      // rounding matches a row-ordered sum of the same pairs.
      std::vector<std::pair<int, int>> pairs;
      for (std::size_t c = 0; c < cols; ++c) pairs.emplace_back(perm[c], static_cast<int>(c));
      std::sort(pairs.begin(), pairs.end());
      double total = 0.0;
      for (const auto& [r, c] : pairs) total += cost[r][c];
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return best;
}

// ----------------------------------------------------------------------- GMM

struct Component {
  float w;
  float mu;
  float var;
};

struct GmmSettings {
  int k;
  float alpha;
  float match_sigmas;
  float bg_threshold;
  float variance_init;
  float variance_floor;
  float weight_init;
};

/// One pixel of a Stauffer-Grimson mixture, updated from the textual rule:
/// classify with the pre-update state, then update weights, the matched
/// component (rho = alpha), replace the weakest when nothing matched,
/// renormalise and stably re-rank by w / sigma.
class ScalarGmmPixel {
 public:
  explicit ScalarGmmPixel(const GmmSettings& s) : s_(s) {
    comps_.push_back({1.0f, 0.0f, s.variance_init});
    for (int i = 1; i < s.k; ++i) comps_.push_back({0.0f, 0.0f, s.variance_init});
  }

  const std::vector<Component>& components() const { return comps_; }

  bool Observe(float x) {
    if (first_) {
      comps_[0].mu = x;
      first_ = false;
    }
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < comps_.size() && !hit; ++i) {
      const Component& c = comps_[i];
      if (c.w > 0.0f && (x - c.mu) * (x - c.mu) <= s_.match_sigmas * s_.match_sigmas * c.var) {
        hit = i;
      }
    }
    std::size_t b = comps_.size();
    float acc = 0.0f;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      acc += comps_[i].w;
      if (acc > s_.bg_threshold) {
        b = i + 1;
        break;
      }
    }
    const bool foreground = !hit || *hit >= b;

    for (std::size_t i = 0; i < comps_.size(); ++i) {
      const float indicator = (hit && *hit == i) ? s_.alpha : 0.0f;
      comps_[i].w = (1.0f - s_.alpha) * comps_[i].w + indicator;
    }
    if (hit) {
      Component& c = comps_[*hit];
      c.mu = (1.0f - s_.alpha) * c.mu + s_.alpha * x;
      const float dev = x - c.mu;
      c.var = std::max(s_.variance_floor, (1.0f - s_.alpha) * c.var + s_.alpha * dev * dev);
    } else {
      comps_.back() = {s_.weight_init, x, s_.variance_init};
    }
    float sum = 0.0f;
    for (const auto& c : comps_) sum += c.w;
    for (auto& c : comps_) c.w /= sum;
    std::stable_sort(comps_.begin(), comps_.end(), [](const Component& a, const Component& c) {
      return a.w / std::sqrt(a.var) > c.w / std::sqrt(c.var);
    });
    return foreground;
  }

 private:
  GmmSettings s_;
  std::vector<Component> comps_;
  bool first_ = true;
};

// ------------------------------------------------------ connected components

struct RefBlob {
  int x0, y0, x1, y1;  // inclusive bounds
  int area;
  double sx, sy;       // coordinate sums

  bool operator<(const RefBlob& o) const {
    return std::tie(y0, x0, y1, x1, area) < std::tie(o.y0, o.x0, o.y1, o.x1, o.area);
  }
};

/// Recursive-style flood fill (explicit queue, breadth first) over an
/// 8-neighbourhood. Returns every component regardless of size.
inline std::vector<RefBlob> FloodFill(int w, int h, const std::vector<std::uint8_t>& bits) {
  std::vector<char> seen(bits.size(), 0);
  std::vector<RefBlob> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bits[y * w + x] || seen[y * w + x]) continue;
      RefBlob b{x, y, x, y, 0, 0, 0};
      std::vector<std::pair<int, int>> queue{{x, y}};
      seen[y * w + x] = 1;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto [px, py] = queue[head];
        ++b.area;
        b.sx += px;
        b.sy += py;
        b.x0 = std::min(b.x0, px);
        b.x1 = std::max(b.x1, px);
        b.y0 = std::min(b.y0, py);
        b.y1 = std::max(b.y1, py);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (bits[ny * w + nx] && !seen[ny * w + nx]) {
              seen[ny * w + nx] = 1;
              queue.emplace_back(nx, ny);
            }
          }
        }
      }
      out.push_back(b);
    }
  }
  return out;
}

// -------------------------------------------------------------- morphology

/// 3x3 erosion / dilation with everything outside the image counted as
/// background, by direct neighbourhood scan.
inline std::vector<std::uint8_t> Morph(int w, int h, const std::vector<std::uint8_t>& in,
                                       bool erode) {
  std::vector<std::uint8_t> out(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool all = true, any = false;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          const bool v = nx >= 0 && ny >= 0 && nx < w && ny < h && in[ny * w + nx];
          all = all && v;
          any = any || v;
        }
      }
      out[y * w + x] = (erode ? all : any) ? 1 : 0;
    }
  }
  return out;
}

// --------------------------------------------------------------- segmenter

struct RefClip {
  long long start;
  long long end;
};

/// Hysteresis clip segmentation simulated directly from its definition.
inline std::vector<RefClip> SimulateSegmenter(const std::vector<double>& scores, double t_on,
                                              double t_off, int n_on, int n_off, int pre,
                                              int post) {
  std::vector<RefClip> clips;
  bool rec = false;
  int above = 0, below = 0;
  long long start = 0;
  long long prev_end = -1;
  for (long long f = 0; f < static_cast<long long>(scores.size()); ++f) {
    const double s = scores[f];
    if (!rec) {
      above = s > t_on ? above + 1 : 0;
      if (above == n_on) {
        start = std::max({0LL, f - n_on + 1 - pre, prev_end + 1});
        rec = true;
        above = below = 0;
      }
    } else {
      below = s < t_off ? below + 1 : 0;
      if (below == n_off) {
        const long long end = std::max(start, f - n_off + post);
        clips.push_back({start, end});
        prev_end = end;
        rec = false;
        above = below = 0;
      }
    }
  }
  if (rec) {
    const long long last = static_cast<long long>(scores.size()) - 1;
    clips.push_back({start, std::max(start, last)});
  }
  return clips;
}

// --------------------------------------------------------------- geometry

struct RefBox {
  double x, y, w, h;
};

inline double RefIou(const RefBox& a, const RefBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Largest number of disjoint (gt, pred) pairs with IoU >= iou_min, by
/// exhaustive search over assignments.
inline int MaxMatching(const std::vector<RefBox>& gt, const std::vector<RefBox>& pred,
                       double iou_min) {
  std::vector<char> used(pred.size(), 0);
  std::function<int(std::size_t)> go = [&](std::size_t g) -> int {
    if (g == gt.size()) return 0;
    int best = go(g + 1);
    for (std::size_t p = 0; p < pred.size(); ++p) {
      const double v = RefIou(gt[g], pred[p]);
      if (used[p] || v < iou_min || v <= 0) continue;
      used[p] = 1;
      best = std::max(best, 1 + go(g + 1));
      used[p] = 0;
    }
    return best;
  };
  return go(0);
}

// ------------------------------------------------------------- dense algebra

template <int R, int C>
using Mat = std::array<std::array<double, C>, R>;

template <int R, int K, int C>
Mat<R, C> MatMul(const Mat<R, K>& a, const Mat<K, C>& b) {
  Mat<R, C> out{};
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < C; ++j) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += a[i][k] * b[k][j];
      out[i][j] = s;
    }
  }
  return out;
}

template <int R, int C>
Mat<C, R> Transpose(const Mat<R, C>& a) {
  Mat<C, R> out{};
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < C; ++j) out[j][i] = a[i][j];
  }
  return out;
}

template <int N>
Mat<N, N> Identity() {
  Mat<N, N> out{};
  for (int i = 0; i < N; ++i) out[i][i] = 1.0;
  return out;
}

/// Gauss-Jordan inverse with partial pivoting.
template <int N>
Mat<N, N> Inverse(Mat<N, N> a) {
  Mat<N, N> inv = Identity<N>();
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int r = col + 1; r < N; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (int j = 0; j < N; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (int r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int j = 0; j < N; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

/// Constant-velocity Kalman filter over (cx, cy, w, h, vcx, vcy, vw, vh).
struct RefKalman {
  std::array<double, 8> x{};
  Mat<8, 8> P{};
  double q;  // process noise std-dev
  double r;  // measurement noise std-dev

  static Mat<8, 8> F() {
    Mat<8, 8> f = Identity<8>();
    for (int i = 0; i < 4; ++i) f[i][i + 4] = 1.0;
    return f;
  }

  void Predict() {
    const Mat<8, 8> f = F();
    std::array<double, 8> nx{};
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) nx[i] += f[i][j] * x[j];
    }
    x = nx;
    P = MatMul<8, 8, 8>(MatMul<8, 8, 8>(f, P), Transpose<8, 8>(f));
    for (int i = 0; i < 4; ++i) {
      P[i][i] += q * q;
      P[i + 4][i + 4] += (q / 2) * (q / 2);
    }
    x[2] = std::max(1.0, x[2]);
    x[3] = std::max(1.0, x[3]);
  }

  void Update(const std::array<double, 4>& z) {
    Mat<4, 8> H{};
    for (int i = 0; i < 4; ++i) H[i][i] = 1.0;
    Mat<4, 4> S = MatMul<4, 8, 4>(MatMul<4, 8, 8>(H, P), Transpose<4, 8>(H));
    for (int i = 0; i < 4; ++i) S[i][i] += r * r;
    const Mat<8, 4> K = MatMul<8, 4, 4>(MatMul<8, 8, 4>(P, Transpose<4, 8>(H)), Inverse<4>(S));
    std::array<double, 4> innov{};
    for (int i = 0; i < 4; ++i) innov[i] = z[i] - x[i];
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 4; ++j) x[i] += K[i][j] * innov[j];
    }
    Mat<8, 8> IKH = Identity<8>();
    const Mat<8, 8> KH = MatMul<8, 4, 8>(K, H);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) IKH[i][j] -= KH[i][j];
    }
    P = MatMul<8, 8, 8>(IKH, P);
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        const double m = 0.5 * (P[i][j] + P[j][i]);
        P[i][j] = P[j][i] = m;
      }
    }
    x[2] = std::max(1.0, x[2]);
    x[3] = std::max(1.0, x[3]);
  }
};

}  // namespace oracle
