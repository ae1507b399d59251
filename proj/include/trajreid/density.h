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

#ifndef TRAJREID_DENSITY_H_
#define TRAJREID_DENSITY_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/parallel.h"
#include "trajreid/base/status.h"
#include "trajreid/dihedral.h"
#include "trajreid/spearman.h"
#include "trajreid/trace_store.h"

namespace trajreid {

// Non-negative per-cell mass on a width x height grid, row-major.
class DensityField {
 public:
  DensityField() = default;
  DensityField(int width, int height)
      : width_(width),
        height_(height),
        values_(static_cast<size_t>(width) * height, 0.0) {}
  DensityField(int width, int height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return values_.size(); }

  double& at(int x, int y) {
    return values_[static_cast<size_t>(y) * width_ + x];
  }
  double at(int x, int y) const {
    return values_[static_cast<size_t>(y) * width_ + x];
  }
  double& at(Cell c) { return at(c.x, c.y); }
  double at(Cell c) const { return at(c.x, c.y); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  double Total() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
  }

  friend bool operator==(const DensityField&, const DensityField&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

enum class DensityMode { kVisits, kUniqueUsers };

struct DayRange {
  int first = 0;  // inclusive
  int last = 0;   // inclusive
};

// Per-cell sample counts (visits) or distinct users within the day range;
// the whole horizon when `days` is absent.
inline absl::StatusOr<DensityField> ComputeDensityField(
    const TraceSet& ts, std::optional<DayRange> days = std::nullopt,
    DensityMode mode = DensityMode::kVisits) {
  DayRange range{0, ts.day_count() - 1};
  if (days.has_value()) {
    range = *days;
    if (range.first > range.last) {
      return absl::InvalidArgumentError(absl::StrCat(
          "empty day range [", range.first, ",", range.last, "]"));
    }
    if (range.first < 0 || range.last >= ts.day_count()) {
      return absl::InvalidArgumentError(
          absl::StrCat("day range [", range.first, ",", range.last,
                       "] outside [0,", ts.day_count(), ")"));
    }
  }
  const GridSpec& grid = ts.grid();
  DensityField field(grid.width, grid.height);
  auto& values = field.mutable_values();
  std::vector<int32_t> last_user(values.size(), -1);
  const auto trajs = ts.trajectories();
  for (size_t u = 0; u < trajs.size(); ++u) {
    for (const Sample& s : trajs[u].samples) {
      if (s.day < range.first || s.day > range.last) continue;
      const size_t idx = static_cast<size_t>(grid.Index(s.cell));
      if (mode == DensityMode::kVisits) {
        values[idx] += 1.0;
      } else if (last_user[idx] != static_cast<int32_t>(u)) {
        last_user[idx] = static_cast<int32_t>(u);
        values[idx] += 1.0;
      }
    }
  }
  return field;
}

inline absl::StatusOr<DensityField> ApplyTransform(const DensityField& f,
                                                   DihedralTransform t) {
  if (SwapsAxes(t) && f.width() != f.height()) {
    return absl::InvalidArgumentError(
        absl::StrCat("rotation ", std::string(TransformName(t)), " requires a square field, got ",
                     f.width(), "x", f.height()));
  }
  const int out_w = SwapsAxes(t) ? f.height() : f.width();
  const int out_h = SwapsAxes(t) ? f.width() : f.height();
  DensityField out(out_w, out_h);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      out.at(TransformCell(t, {x, y}, f.width(), f.height())) = f.at(x, y);
    }
  }
  return out;
}

// A population raster. When used for city matching it must already be on
// the working grid (same width and height as the trace density).
struct PopulationRaster {
  std::string name;
  DensityField density;
  double center_lat = 0.0;
  double center_lon = 0.0;
  double cell_size_m = kDefaultCellSizeMeters;
};

inline constexpr int kDefaultClusterSide = 40;

struct ClusterDims {
  int width = kDefaultClusterSide;
  int height = kDefaultClusterSide;
};

// Sums each non-overlapping cw x ch block, row-major over blocks.
inline absl::StatusOr<std::vector<double>> BlockSums(const DensityField& f,
                                                     ClusterDims dims) {
  if (dims.width < 1 || dims.height < 1 || f.width() % dims.width != 0 ||
      f.height() % dims.height != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cluster ", dims.width, "x", dims.height, " does not divide field ",
        f.width(), "x", f.height()));
  }
  const int bw = f.width() / dims.width;
  const int bh = f.height() / dims.height;
  std::vector<double> sums(static_cast<size_t>(bw) * bh, 0.0);
  for (int y = 0; y < f.height(); ++y) {
    const size_t row = static_cast<size_t>(y / dims.height) * bw;
    for (int x = 0; x < f.width(); ++x) {
      sums[row + x / dims.width] += f.at(x, y);
    }
  }
  return sums;
}

// Spearman correlation of block-summed fields. FailedPrecondition when the
// correlation is undefined (single block or constant block vector).
inline absl::StatusOr<double> ClusteredCorrelation(const DensityField& f,
                                                   const DensityField& raster,
                                                   ClusterDims dims = {}) {
  if (f.width() != raster.width() || f.height() != raster.height()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "raster ", raster.width(), "x", raster.height(),
        " not resampled to field grid ", f.width(), "x", f.height()));
  }
  TRAJREID_ASSIGN_OR_RETURN(std::vector<double> a, BlockSums(f, dims));
  TRAJREID_ASSIGN_OR_RETURN(std::vector<double> b, BlockSums(raster, dims));
  return Spearman(a, b);
}

struct MatchScore {
  DihedralTransform transform = DihedralTransform::kIdentity;
  std::string city;
  std::optional<double> correlation;  // nullopt when undefined
};

struct MatchResult {
  std::string best_city;
  DihedralTransform best_transform = DihedralTransform::kIdentity;
  double best_correlation = 0.0;
  // Best minus runner-up over all other (transform, city) entries.
  std::optional<double> margin;
  // Best minus the best entry of any other city.
  std::optional<double> city_margin;
  // 8 x |cities| entries; transform-major within each city, cities in input
  // order.
  std::vector<MatchScore> scores;
};

// Scores every (transform, raster) pair and returns the argmax. Ties go to
// the lexicographically smallest (city label, transform index).
inline absl::StatusOr<MatchResult> MatchCity(
    const DensityField& f, const std::vector<PopulationRaster>& rasters,
    ClusterDims dims = {}) {
  if (rasters.empty()) {
    return absl::InvalidArgumentError("match_city needs at least one raster");
  }
  for (const PopulationRaster& r : rasters) {
    if (r.density.width() != f.width() || r.density.height() != f.height()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "raster '", r.name, "' is ", r.density.width(), "x",
          r.density.height(), ", field is ", f.width(), "x", f.height()));
    }
  }
  std::vector<DensityField> transformed(kAllTransforms.size());
  for (size_t i = 0; i < kAllTransforms.size(); ++i) {
    TRAJREID_ASSIGN_OR_RETURN(transformed[i],
                              ApplyTransform(f, kAllTransforms[i]));
  }
  MatchResult result;
  result.scores.resize(rasters.size() * kAllTransforms.size());
  std::vector<absl::Status> errors(result.scores.size());
  ParallelFor(result.scores.size(), [&](size_t k) {
    const size_t city = k / kAllTransforms.size();
    const size_t ti = k % kAllTransforms.size();
    MatchScore& s = result.scores[k];
    s.transform = kAllTransforms[ti];
    s.city = rasters[city].name;
    auto c = ClusteredCorrelation(transformed[ti], rasters[city].density, dims);
    if (c.ok()) {
      s.correlation = *c;
    } else if (!absl::IsFailedPrecondition(c.status())) {
      errors[k] = c.status();
    }
  });
  for (const absl::Status& e : errors) TRAJREID_RETURN_IF_ERROR(e);

  const MatchScore* best = nullptr;
  auto better = [](const MatchScore& a, const MatchScore& b) {
    if (*a.correlation != *b.correlation) {
      return *a.correlation > *b.correlation;
    }
    if (a.city != b.city) return a.city < b.city;
    return a.transform < b.transform;
  };
  for (const MatchScore& s : result.scores) {
    if (!s.correlation) continue;
    if (best == nullptr || better(s, *best)) best = &s;
  }
  if (best == nullptr) {
    return absl::FailedPreconditionError(
        "every (transform, city) correlation is undefined");
  }
  result.best_city = best->city;
  result.best_transform = best->transform;
  result.best_correlation = *best->correlation;
  std::optional<double> runner_up, other_city;
  for (const MatchScore& s : result.scores) {
    if (!s.correlation || &s == best) continue;
    if (!runner_up || *s.correlation > *runner_up) runner_up = s.correlation;
    if (s.city != best->city &&
        (!other_city || *s.correlation > *other_city)) {
      other_city = s.correlation;
    }
  }
  if (runner_up) result.margin = result.best_correlation - *runner_up;
  if (other_city) result.city_margin = result.best_correlation - *other_city;
  return result;
}

}  // namespace trajreid

#endif  // TRAJREID_DENSITY_H_
