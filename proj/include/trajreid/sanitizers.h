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

#ifndef TRAJREID_SANITIZERS_H_
#define TRAJREID_SANITIZERS_H_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/parallel.h"
#include "trajreid/base/rng.h"
#include "trajreid/base/status.h"
#include "trajreid/lambert_w.h"
#include "trajreid/trace_store.h"

namespace trajreid {

// Per-user substream: independent of processing order and worker count.
inline Rng UserRng(uint64_t seed, UserId user, uint64_t mechanism_tag) {
  return Rng(DeriveSeed(seed, mechanism_tag, Mix64(static_cast<uint64_t>(user))));
}

struct SanitizedTraces {
  TraceSet traces;
  int64_t clamped_points = 0;  // Geo-Ind only
};

// ---------------------------------------------------------------------------
// Geo-indistinguishability (planar Laplace)

struct GeoIndConfig {
  double epsilon = 0.0;  // 1/meters
  uint64_t seed = 0;

  // epsilon = level / radius.
  static absl::StatusOr<GeoIndConfig> FromLevelRadius(double level,
                                                      double radius_m,
                                                      uint64_t seed) {
    if (!(level > 0) || !(radius_m > 0)) {
      return absl::InvalidArgumentError("level and radius must be positive");
    }
    return GeoIndConfig{level / radius_m, seed};
  }

  absl::Status Validate() const {
    if (!(epsilon > 0)) {
      return absl::InvalidArgumentError("Geo-Ind epsilon must be positive");
    }
    return absl::OkStatus();
  }
};

struct PlanePoint {
  double x = 0.0;  // meters
  double y = 0.0;
};

inline absl::StatusOr<PlanePoint> GeoIndSample(PlanePoint x, double epsilon,
                                               Rng& rng) {
  const double theta = 2.0 * std::numbers::pi * rng.UniformDouble();
  const double p = rng.UniformDouble();
  auto r = PlanarLaplaceQuantile(p, epsilon);
  if (!r.ok()) return r.status();
  return PlanePoint{x.x + *r * std::cos(theta), x.y + *r * std::sin(theta)};
}

// Perturbs each sample's cell center, snaps to the containing cell and
// clamps to the grid.
inline absl::StatusOr<SanitizedTraces> GeoIndSanitize(const TraceSet& ts,
                                                      const GeoIndConfig& cfg) {
  TRAJREID_RETURN_IF_ERROR(cfg.Validate());
  const GridSpec& grid = ts.grid();
  const double s = grid.cell_size_m;
  const auto trajs = ts.trajectories();
  std::vector<Trajectory> out(trajs.size());
  std::vector<int64_t> clamped(trajs.size(), 0);
  std::vector<absl::Status> errors(trajs.size());
  ParallelFor(trajs.size(), [&](size_t u) {
    Rng rng = UserRng(cfg.seed, trajs[u].user, 0x67656f69ULL);
    out[u] = trajs[u];
    for (Sample& smp : out[u].samples) {
      auto y = GeoIndSample({(smp.cell.x + 0.5) * s, (smp.cell.y + 0.5) * s},
                            cfg.epsilon, rng);
      if (!y.ok()) {
        errors[u] = y.status();
        return;
      }
      const double fx = std::floor(y->x / s);
      const double fy = std::floor(y->y / s);
      const double cx = std::clamp(fx, 0.0, grid.width - 1.0);
      const double cy = std::clamp(fy, 0.0, grid.height - 1.0);
      if (cx != fx || cy != fy) ++clamped[u];
      smp.cell = {static_cast<int32_t>(cx), static_cast<int32_t>(cy)};
    }
  });
  for (const auto& e : errors) TRAJREID_RETURN_IF_ERROR(e);
  SanitizedTraces result;
  result.clamped_points = std::accumulate(clamped.begin(), clamped.end(), int64_t{0});
  TRAJREID_ASSIGN_OR_RETURN(result.traces,
                            TraceSet::Create(grid, ts.day_count(), std::move(out)));
  return result;
}

// ---------------------------------------------------------------------------
// Generalized randomized response over row-major cell indices

struct GrrConfig {
  double epsilon = 0.0;
  int64_t k = 0;  // domain size
  uint64_t seed = 0;

  static GrrConfig ForGrid(const GridSpec& grid, double epsilon, uint64_t seed) {
    return {epsilon, grid.CellCount(), seed};
  }

  absl::Status Validate() const {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) {
      return absl::InvalidArgumentError("GRR epsilon must be positive and finite");
    }
    if (k < 2) return absl::InvalidArgumentError("GRR domain needs k >= 2");
    return absl::OkStatus();
  }

  // p = e^eps / (e^eps + k - 1), written to stay finite for large eps.
  double p() const {
    return 1.0 / (1.0 + static_cast<double>(k - 1) * std::exp(-epsilon));
  }
  double q() const {
    const double e = std::exp(-epsilon);
    return e / (1.0 + static_cast<double>(k - 1) * e);
  }
};

inline int64_t GrrPerturb(int64_t z, const GrrConfig& cfg, Rng& rng) {
  if (rng.Bernoulli(cfg.p())) return z;
  const int64_t other = static_cast<int64_t>(rng.UniformInt(cfg.k - 1));
  return other >= z ? other + 1 : other;
}

inline absl::StatusOr<TraceSet> GrrSanitize(const TraceSet& ts,
                                            const GrrConfig& cfg) {
  TRAJREID_RETURN_IF_ERROR(cfg.Validate());
  const GridSpec& grid = ts.grid();
  if (cfg.k != grid.CellCount()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "GRR domain size ", cfg.k, " != grid cell count ", grid.CellCount()));
  }
  const auto trajs = ts.trajectories();
  std::vector<Trajectory> out(trajs.size());
  ParallelFor(trajs.size(), [&](size_t u) {
    Rng rng = UserRng(cfg.seed, trajs[u].user, 0x677272ULL);
    out[u] = trajs[u];
    for (Sample& s : out[u].samples) {
      s.cell = grid.CellAt(static_cast<int>(GrrPerturb(grid.Index(s.cell), cfg, rng)));
    }
  });
  return TraceSet::Create(grid, ts.day_count(), std::move(out));
}

struct DebiasedFrequencies {
  std::vector<double> raw;      // (f - q) / (p - q), may be negative
  std::vector<double> clipped;  // negatives zeroed, renormalized to sum 1
};

inline absl::StatusOr<DebiasedFrequencies> GrrDebias(
    const std::vector<double>& observed, const GrrConfig& cfg) {
  TRAJREID_RETURN_IF_ERROR(cfg.Validate());
  if (static_cast<int64_t>(observed.size()) != cfg.k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "observed vector has ", observed.size(), " entries, k = ", cfg.k));
  }
  const double p = cfg.p();
  const double q = cfg.q();
  if (!(p > q)) {
    return absl::InvalidArgumentError("debiasing undefined when p == q");
  }
  DebiasedFrequencies out;
  out.raw.resize(observed.size());
  out.clipped.resize(observed.size());
  double total = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    out.raw[i] = (observed[i] - q) / (p - q);
    out.clipped[i] = std::max(0.0, out.raw[i]);
    total += out.clipped[i];
  }
  if (total > 0) {
    for (double& v : out.clipped) v /= total;
  } else {
    std::fill(out.clipped.begin(), out.clipped.end(), 1.0 / observed.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spatial de-structuring

enum class PermutationScope {
  kFullGrid,      // uniform permutation of every cell index
  kVisitedCells,  // shuffle only among the user's own visited cells
};

struct PermutationConfig {
  uint64_t seed = 0;
  PermutationScope scope = PermutationScope::kFullGrid;
  bool force_identity = false;
};

// Relabels each user's cells through an independent per-user permutation.
// Only the images of visited cells are materialized: a partial Fisher-Yates
// over the full index set has the same law as restricting a uniform
// permutation.
inline absl::StatusOr<TraceSet> Destructure(const TraceSet& ts,
                                            const PermutationConfig& cfg) {
  const GridSpec& grid = ts.grid();
  const int64_t k = grid.CellCount();
  const auto trajs = ts.trajectories();
  std::vector<Trajectory> out(trajs.size());
  ParallelFor(trajs.size(), [&](size_t u) {
    out[u] = trajs[u];
    if (cfg.force_identity) return;
    Rng rng = UserRng(cfg.seed, trajs[u].user, 0x7065726dULL);
    std::vector<int32_t> visited;
    for (const Sample& s : trajs[u].samples) visited.push_back(grid.Index(s.cell));
    std::sort(visited.begin(), visited.end());
    visited.erase(std::unique(visited.begin(), visited.end()), visited.end());
    std::vector<int32_t> image(visited.size());
    if (cfg.scope == PermutationScope::kVisitedCells) {
      image = visited;
      for (size_t i = image.size(); i > 1; --i) {
        std::swap(image[i - 1], image[rng.UniformInt(i)]);
      }
    } else {
      std::unordered_map<int64_t, int64_t> swapped;
      auto slot = [&](int64_t i) {
        auto it = swapped.find(i);
        return it == swapped.end() ? i : it->second;
      };
      for (size_t i = 0; i < visited.size(); ++i) {
        const int64_t j = static_cast<int64_t>(i) +
                          static_cast<int64_t>(rng.UniformInt(k - i));
        const int64_t vi = slot(i), vj = slot(j);
        swapped[static_cast<int64_t>(i)] = vj;
        swapped[j] = vi;
        image[i] = static_cast<int32_t>(vj);
      }
    }
    for (Sample& s : out[u].samples) {
      const auto it = std::lower_bound(visited.begin(), visited.end(),
                                       grid.Index(s.cell));
      s.cell = grid.CellAt(image[it - visited.begin()]);
    }
  });
  return TraceSet::Create(grid, ts.day_count(), std::move(out));
}

}  // namespace trajreid

#endif  // TRAJREID_SANITIZERS_H_
