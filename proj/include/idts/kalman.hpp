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

#include <Eigen/Dense>

#include "idts/box.hpp"
#include "idts/error.hpp"

namespace idts {

struct TrackerParams {
  int min_hits = 3;
  int max_age = 30;
  double lambda_iou = 0.7;
  double gate_iou = 0.05;
  double process_noise = 1.0;
  double measurement_noise = 2.0;

  void Validate() const {
    if (min_hits < 1) throw UsageError("track.min_hits must be >= 1");
    if (max_age < 0) throw UsageError("track.max_age must be >= 0");
    if (!(lambda_iou >= 0 && lambda_iou <= 1)) {
      throw UsageError("track.lambda_iou must be in [0,1]");
    }
    if (!(gate_iou >= 0 && gate_iou <= 1)) throw UsageError("track.gate_iou must be in [0,1]");
    if (!(process_noise > 0) || !(measurement_noise > 0)) {
      throw UsageError("track noise levels must be > 0");
    }
  }
};

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;

/// Constant-velocity state (cx, cy, w, h, vcx, vcy, vw, vh) and covariance,
/// in pixels and pixels/frame.
struct KalmanState {
  StateVector x = StateVector::Zero();
  StateMatrix P = StateMatrix::Identity();

  Box box() const { return Box::FromCenter(x(0), x(1), x(2), x(3)); }
};

inline KalmanState KfInit(const Box& box, const TrackerParams& params) {
  KalmanState s;
  s.x << box.cx(), box.cy(), box.w, box.h, 0, 0, 0, 0;
  const double r2 = params.measurement_noise * params.measurement_noise;
  s.P.setZero();
  for (int i = 0; i < 4; ++i) {
    s.P(i, i) = r2;
    s.P(i + 4, i + 4) = 10.0 * r2;
  }
  return s;
}

inline StateMatrix TransitionMatrix() {
  StateMatrix f = StateMatrix::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

inline void ClampSize(StateVector& x) {
  x(2) = std::max(1.0, x(2));
  x(3) = std::max(1.0, x(3));
}

/// One-frame constant-velocity prediction.
inline KalmanState KfPredict(const KalmanState& s, const TrackerParams& params) {
  const StateMatrix f = TransitionMatrix();
  StateMatrix q = StateMatrix::Zero();
  const double qp = params.process_noise * params.process_noise;
  const double qv = 0.25 * qp;
  for (int i = 0; i < 4; ++i) {
    q(i, i) = qp;
    q(i + 4, i + 4) = qv;
  }
  KalmanState out;
  out.x = f * s.x;
  out.P = f * s.P * f.transpose() + q;
  ClampSize(out.x);
  return out;
}

/// Linear update with a measured box; H picks (cx, cy, w, h) and
/// R = measurement_noise^2 I.
inline KalmanState KfUpdate(const KalmanState& s, const Box& z_box,
                            const TrackerParams& params) {
  if (!std::isfinite(z_box.x) || !std::isfinite(z_box.y) || !std::isfinite(z_box.w) ||
      !std::isfinite(z_box.h)) {
    throw FormatError("kf_update: non-finite measurement");
  }
  Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  const double r2 = params.measurement_noise * params.measurement_noise;
  const Eigen::Matrix4d r = Eigen::Matrix4d::Identity() * r2;
  Eigen::Vector4d z(z_box.cx(), z_box.cy(), z_box.w, z_box.h);

  const Eigen::Matrix4d innovation_cov = h * s.P * h.transpose() + r;
  const Eigen::Matrix<double, 8, 4> gain =
      s.P * h.transpose() * innovation_cov.inverse();
  KalmanState out;
  out.x = s.x + gain * (z - h * s.x);
  out.P = (StateMatrix::Identity() - gain * h) * s.P;
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  ClampSize(out.x);
  return out;
}

}  // namespace idts
