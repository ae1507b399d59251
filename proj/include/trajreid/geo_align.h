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

#ifndef TRAJREID_GEO_ALIGN_H_
#define TRAJREID_GEO_ALIGN_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/rng.h"
#include "trajreid/base/status.h"
#include "trajreid/density.h"
#include "trajreid/spearman.h"
#include "trajreid/trace_store.h"

namespace trajreid {

// Local equirectangular approximation.
inline constexpr double kMetersPerDegree = 111320.0;

inline double MetersPerDegreeLon(double lat_deg) {
  return kMetersPerDegree * std::cos(lat_deg * std::numbers::pi / 180.0);
}

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

struct GeoAlignment {
  GeoPoint center;
  double correlation = 0.0;
  double initial_correlation = 0.0;
  int iterations = 0;   // accepted moves
  int evaluations = 0;  // sampler calls
  double step_deg = 0.01;
  // Correlation after each accepted move, starting with the initial value.
  std::vector<double> trace;
};

// Cell centers relative to the grid's geometric center, with x growing east
// and y growing north.
inline absl::StatusOr<GeoPoint> CellToGeo(GeoPoint center, const GridSpec& grid,
                                          Cell cell) {
  if (!grid.Contains(cell)) {
    return absl::InvalidArgumentError(
        absl::StrCat("cell ", CellToString(cell), " outside grid"));
  }
  const double east = (cell.x + 0.5 - grid.width / 2.0) * grid.cell_size_m;
  const double north = (cell.y + 0.5 - grid.height / 2.0) * grid.cell_size_m;
  return GeoPoint{center.lat + north / kMetersPerDegree,
                  center.lon + east / MetersPerDegreeLon(center.lat)};
}

inline absl::StatusOr<GeoPoint> CellToGeo(const GeoAlignment& alignment,
                                          const GridSpec& grid, Cell cell) {
  return CellToGeo(alignment.center, grid, cell);
}

inline absl::StatusOr<Cell> GeoToCell(GeoPoint center, const GridSpec& grid,
                                      GeoPoint p) {
  const double east = (p.lon - center.lon) * MetersPerDegreeLon(center.lat);
  const double north = (p.lat - center.lat) * kMetersPerDegree;
  const Cell c{
      static_cast<int32_t>(std::floor(east / grid.cell_size_m + grid.width / 2.0)),
      static_cast<int32_t>(std::floor(north / grid.cell_size_m + grid.height / 2.0))};
  if (!grid.Contains(c)) {
    return absl::OutOfRangeError("point falls outside the grid");
  }
  return c;
}

namespace internal {

// Overlap of source interval [lo, hi) (in target-cell units) with each
// target cell; fractions are relative to the source interval length.
inline void IntervalWeights(double lo, double hi, int n,
                            std::vector<std::pair<int, double>>& out) {
  out.clear();
  const double len = hi - lo;
  if (len <= 0) return;
  const int first = std::max(0, static_cast<int>(std::floor(lo)));
  const int last = std::min(n - 1, static_cast<int>(std::ceil(hi)) - 1);
  for (int t = first; t <= last; ++t) {
    const double overlap = std::min(hi, t + 1.0) - std::max(lo, double(t));
    if (overlap > 0) out.emplace_back(t, overlap / len);
  }
}

}  // namespace internal

// Area-weighted aggregation of a geo-referenced raster onto a grid centered
// at `center`. Source mass is split in proportion to overlap area, so mass
// that lands inside the target is conserved.
inline DensityField ResampleRaster(const PopulationRaster& source,
                                   const GridSpec& target, GeoPoint center) {
  DensityField out(target.width, target.height);
  const DensityField& src = source.density;
  const double src_lon_scale = MetersPerDegreeLon(source.center_lat);
  const double tgt_lon_scale = MetersPerDegreeLon(center.lat);
  // Source column edges -> target column units.
  auto col_edge = [&](double sx) {
    const double lon = source.center_lon +
                       (sx - src.width() / 2.0) * source.cell_size_m / src_lon_scale;
    return (lon - center.lon) * tgt_lon_scale / target.cell_size_m +
           target.width / 2.0;
  };
  auto row_edge = [&](double sy) {
    const double lat = source.center_lat + (sy - src.height() / 2.0) *
                                               source.cell_size_m / kMetersPerDegree;
    return (lat - center.lat) * kMetersPerDegree / target.cell_size_m +
           target.height / 2.0;
  };
  std::vector<std::vector<std::pair<int, double>>> cols(src.width());
  for (int sx = 0; sx < src.width(); ++sx) {
    internal::IntervalWeights(col_edge(sx), col_edge(sx + 1), target.width,
                              cols[sx]);
  }
  std::vector<std::pair<int, double>> rows;
  for (int sy = 0; sy < src.height(); ++sy) {
    internal::IntervalWeights(row_edge(sy), row_edge(sy + 1), target.height,
                              rows);
    if (rows.empty()) continue;
    for (int sx = 0; sx < src.width(); ++sx) {
      const double v = src.at(sx, sy);
      if (v == 0 || cols[sx].empty()) continue;
      for (const auto& [ty, wy] : rows) {
        for (const auto& [tx, wx] : cols[sx]) out.at(tx, ty) += v * wy * wx;
      }
    }
  }
  return out;
}

// Rasterizes population onto the working grid for a candidate center.
using GeoSampler = std::function<absl::StatusOr<DensityField>(GeoPoint)>;

inline GeoSampler RasterSampler(PopulationRaster source, GridSpec target) {
  return [source = std::move(source),
          target = std::move(target)](GeoPoint c) -> absl::StatusOr<DensityField> {
    return ResampleRaster(source, target, c);
  };
}

enum class AlignmentMetric {
  kCellSpearman,       // Spearman over all cells
  kClusteredSpearman,  // Spearman over block sums
};

struct HillClimbOptions {
  double step_deg = 0.01;
  AlignmentMetric metric = AlignmentMetric::kCellSpearman;
  ClusterDims clusters;
  int max_moves = 100000;
  // Extra starts drawn uniformly in a square of this half-width around the
  // start; the best converged run wins. Zero restarts is the plain climb.
  int restarts = 0;
  double restart_radius_deg = 0.1;
  uint64_t seed = 0;
};

namespace internal {

inline absl::StatusOr<double> AlignmentScore(const DensityField& f,
                                             const DensityField& candidate,
                                             const HillClimbOptions& opts) {
  if (opts.metric == AlignmentMetric::kClusteredSpearman) {
    return ClusteredCorrelation(f, candidate, opts.clusters);
  }
  if (f.width() != candidate.width() || f.height() != candidate.height()) {
    return absl::InvalidArgumentError("sampler returned a mismatched grid");
  }
  return Spearman(f.values(), candidate.values());
}

// Undefined correlations never count as improvements.
inline absl::StatusOr<double> EvaluateCenter(const DensityField& f,
                                             const GeoSampler& sampler,
                                             GeoPoint c,
                                             const HillClimbOptions& opts) {
  auto raster = sampler(c);
  if (!raster.ok()) {
    return absl::Status(raster.status().code(),
                        absl::StrCat("sampler failed at (", c.lat, ", ", c.lon,
                                     "): ", raster.status().message()));
  }
  auto score = AlignmentScore(f, *raster, opts);
  if (absl::IsFailedPrecondition(score.status())) {
    return -std::numeric_limits<double>::infinity();
  }
  return score;
}

inline absl::StatusOr<GeoAlignment> ClimbFrom(const DensityField& f,
                                              const GeoSampler& sampler,
                                              GeoPoint start,
                                              const HillClimbOptions& opts) {
  GeoAlignment a;
  a.center = start;
  a.step_deg = opts.step_deg;
  TRAJREID_ASSIGN_OR_RETURN(a.correlation,
                            EvaluateCenter(f, sampler, start, opts));
  a.evaluations = 1;
  a.initial_correlation = a.correlation;
  a.trace.push_back(a.correlation);
  const double s = opts.step_deg;
  const GeoPoint offsets[4] = {{s, 0}, {-s, 0}, {0, s}, {0, -s}};
  while (a.iterations < opts.max_moves) {
    double best = a.correlation;
    GeoPoint best_center = a.center;
    for (const GeoPoint& o : offsets) {
      const GeoPoint c{a.center.lat + o.lat, a.center.lon + o.lon};
      TRAJREID_ASSIGN_OR_RETURN(double score,
                                EvaluateCenter(f, sampler, c, opts));
      ++a.evaluations;
      if (score > best) {
        best = score;
        best_center = c;
      }
    }
    if (!(best > a.correlation)) break;
    a.center = best_center;
    a.correlation = best;
    ++a.iterations;
    a.trace.push_back(best);
  }
  return a;
}

}  // namespace internal

// Steepest-ascent over the 4-neighborhood {+-step lat, +-step lon}; stops
// when no neighbor strictly improves the correlation.
inline absl::StatusOr<GeoAlignment> HillClimbAlign(const DensityField& f,
                                                   const GeoSampler& sampler,
                                                   GeoPoint start,
                                                   const HillClimbOptions& opts = {}) {
  if (!(opts.step_deg > 0)) {
    return absl::InvalidArgumentError("step must be positive");
  }
  TRAJREID_ASSIGN_OR_RETURN(GeoAlignment best,
                            internal::ClimbFrom(f, sampler, start, opts));
  Rng rng(DeriveSeed(opts.seed, 0x68696c6cULL));
  for (int r = 0; r < opts.restarts; ++r) {
    const double dlat = (2 * rng.UniformDouble() - 1) * opts.restart_radius_deg;
    const double dlon = (2 * rng.UniformDouble() - 1) * opts.restart_radius_deg;
    TRAJREID_ASSIGN_OR_RETURN(
        GeoAlignment run,
        internal::ClimbFrom(f, sampler, {start.lat + dlat, start.lon + dlon},
                            opts));
    if (run.correlation > best.correlation) {
      run.evaluations += best.evaluations;
      best = std::move(run);
    } else {
      best.evaluations += run.evaluations;
    }
  }
  return best;
}

}  // namespace trajreid

#endif  // TRAJREID_GEO_ALIGN_H_
