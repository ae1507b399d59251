// Copyright 2026 The trajreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJREID_LAMBERT_W_H_
#define TRAJREID_LAMBERT_W_H_

#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"

namespace trajreid {

inline constexpr double kLambertTolerance = 1e-12;

// Lower real branch W_{-1}(x) for x in [-1/e, 0): the solution w <= -1 of
// w * exp(w) = x. Halley iteration from a branch-point series (near -1/e)
// or the asymptotic expansion (near 0).
inline absl::StatusOr<double> LambertWm1(double x) {
  constexpr double kInvE = 1.0 / std::numbers::e;
  if (!(x >= -kInvE - 1e-16 && x < 0.0)) {
    return absl::OutOfRangeError(
        absl::StrCat("W_{-1} argument ", x, " outside [-1/e, 0)"));
  }
  const double t = 1.0 + std::numbers::e * x;  // distance to the branch point
  if (t <= 0.0) return -1.0;
  double w;
  if (x < -0.25) {
    const double p = -std::sqrt(2.0 * t);
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    // The series is already exact to double precision this close in, and
    // Halley's denominator vanishes at w = -1.
    if (p * p < 1e-10) return w;
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int i = 0; i < 64; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double next = w - f / denom;
    const double delta = std::abs(next - w);
    w = next;
    if (delta < kLambertTolerance) break;
  }
  return w;
}

// Radial CDF of the planar Laplace density eps^2/(2 pi) exp(-eps r).
inline double PlanarLaplaceCdf(double r, double epsilon) {
  return 1.0 - (1.0 + epsilon * r) * std::exp(-epsilon * r);
}

// Inverse of PlanarLaplaceCdf for p in [0, 1).
inline absl::StatusOr<double> PlanarLaplaceQuantile(double p, double epsilon) {
  if (!(epsilon > 0)) {
    return absl::InvalidArgumentError("epsilon must be positive");
  }
  if (!(p >= 0.0 && p < 1.0)) {
    return absl::OutOfRangeError(absl::StrCat("p=", p, " outside [0,1)"));
  }
  auto w = LambertWm1((p - 1.0) / std::numbers::e);
  if (!w.ok()) return w.status();
  return -(*w + 1.0) / epsilon;
}

}  // namespace trajreid

#endif  // TRAJREID_LAMBERT_W_H_
