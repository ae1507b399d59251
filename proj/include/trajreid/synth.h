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

#ifndef TRAJREID_SYNTH_H_
#define TRAJREID_SYNTH_H_

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/parallel.h"
#include "trajreid/base/rng.h"
#include "trajreid/base/status.h"
#include "trajreid/catalogs.h"
#include "trajreid/density.h"
#include "trajreid/dihedral.h"
#include "trajreid/geo_align.h"
#include "trajreid/privacy_metrics.h"
#include "trajreid/temporal.h"
#include "trajreid/trace_store.h"

namespace trajreid {

inline constexpr int kTemplateCount = 10;
inline constexpr double kTemplateDistinctness = 0.8;

inline constexpr std::array<std::string_view, kTemplateCount> kTemplateNames = {
    "monocentric", "dual-core", "corridor", "ring",      "tri-core",
    "coastal",     "cross",     "sprawl",   "crescent",  "polycentric"};

namespace internal {

inline double Blob(double x, double y, double cx, double cy, double sx,
                   double sy) {
  const double dx = (x - cx) / sx;
  const double dy = (y - cy) / sy;
  return std::exp(-0.5 * (dx * dx + dy * dy));
}

// Distance from (x, y) to the segment (ax, ay)-(bx, by).
inline double SegmentDistance(double x, double y, double ax, double ay,
                              double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double t = std::clamp(((x - ax) * vx + (y - ay) * vy) / (vx * vx + vy * vy),
                              0.0, 1.0);
  return std::hypot(x - (ax + t * vx), y - (ay + t * vy));
}

inline double Ridge(double d, double width) {
  return std::exp(-0.5 * (d / width) * (d / width));
}

}  // namespace internal

// Relative population density of template `id` at unit-square coordinates
// (u, v), u growing east and v growing north. Each template is a named
// family (one core, two cores, a corridor, ...) over a broad background
// bump. Feature placements were chosen so that, after aggregation into 5x5
// blocks, no template resembles another one or a non-trivial symmetry of
// itself (rank correlation below 0.6 in every such pairing).
inline double TemplateDensity(int id, double u, double v) {
  using internal::Blob;
  using internal::Ridge;
  using internal::SegmentDistance;
  auto background = [&](double w, double cx, double cy) {
    return 0.02 + w * Blob(u, v, cx, cy, 0.45, 0.45);
  };
  switch (id) {
    case 0:  // monocentric
      return background(0.381, 0.516, 0.138) + Blob(u, v, 0.311, 0.75, 0.129, 0.074);
    case 1:  // dual-core
      return background(0.32, 0.818, 0.378) + Blob(u, v, 0.254, 0.113, 0.125, 0.125) +
             0.985 * Blob(u, v, 0.13, 0.808, 0.131, 0.131);
    case 2:  // corridor ending in a terminus
      return background(0.331, 0.033, 0.267) +
             Ridge(SegmentDistance(u, v, 0.581, 0.883, 0.716, 0.132), 0.05) +
             0.994 * Blob(u, v, 0.716, 0.132, 0.07, 0.07);
    case 3: {  // ring road with one dense district
      const double r = std::hypot(u - 0.806, v - 0.316);
      return background(0.392, 0.08, 0.731) + Ridge(r - 0.287, 0.045) +
             0.81 * Blob(u, v, 0.666, 0.766, 0.05, 0.05);
    }
    case 4:  // tri-core
      return background(0.192, 0.616, 0.156) + Blob(u, v, 0.711, 0.739, 0.07, 0.07) +
             0.479 * Blob(u, v, 0.216, 0.723, 0.07, 0.07) +
             0.853 * Blob(u, v, 0.246, 0.792, 0.07, 0.07);
    case 5:  // coastal strip on the west edge around a port
      return background(0.216, 0.964, 0.893) +
             std::exp(-u / 0.124) * (0.3 + Blob(u, v, 0.0, 0.359, 0.3, 0.3)) +
             0.672 * Blob(u, v, 0.434, 0.402, 0.06, 0.06);
    case 6:  // two crossing arterials
      return background(0.343, 0.753, 0.945) +
             Ridge(SegmentDistance(u, v, 0.0, 0.294, 1.0, 0.044), 0.04) +
             0.728 * Ridge(SegmentDistance(u, v, 0.191, 0.0, 0.331, 1.0), 0.04);
    case 7:  // sprawl with a satellite town
      return background(0.177, 0.135, 0.556) + Blob(u, v, 0.875, 0.821, 0.28, 0.2) +
             0.541 * Blob(u, v, 0.225, 0.484, 0.05, 0.05);
    case 8: {  // crescent around an old center
      const double r = std::hypot(u - 0.376, v - 0.301);
      const double a = std::atan2(v - 0.301, u - 0.376);
      return background(0.218, 0.202, 0.927) +
             (std::cos(a + 1.615) > 0 ? Ridge(r - 0.369, 0.06) : 0.0) +
             0.515 * Blob(u, v, 0.376, 0.301, 0.06, 0.06);
    }
    case 9:  // polycentric
      return background(0.122, 0.619, 0.194) + Blob(u, v, 0.895, 0.392, 0.05, 0.05) +
             0.659 * Blob(u, v, 0.652, 0.576, 0.05, 0.05) +
             0.475 * Blob(u, v, 0.283, 0.877, 0.05, 0.05) +
             0.561 * Blob(u, v, 0.449, 0.605, 0.05, 0.05) +
             0.888 * Blob(u, v, 0.143, 0.465, 0.05, 0.05);
  }
  return 0.02;
}

// Template density at cell centers, scaled to `total` people.
inline DensityField TemplateField(int id, int width, int height,
                                  double total = 1e6) {
  DensityField f(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      f.at(x, y) = TemplateDensity(id, (x + 0.5) / width, (y + 0.5) / height);
    }
  }
  const double sum = f.Total();
  for (double& v : f.mutable_values()) v *= total / sum;
  return f;
}

struct VenueSpike {
  Cell cell;                // template frame
  std::vector<int> days;
  std::vector<int> visitors;  // distinct extra visitors per day
};

struct SynthConfig {
  uint64_t seed = 0;
  GridSpec grid;
  int template_id = 0;
  int template_count = kTemplateCount;
  int users = 1000;
  int days = kDefaultDayCount;
  // Obfuscation applied to the released traces.
  DihedralTransform planted_transform = DihedralTransform::kIdentity;
  Date start_date = Date{std::chrono::year{2019} / std::chrono::September / 15};
  std::optional<HolidayCalendar> calendar;  // bundled Japanese calendar if unset
  double commuter_fraction = 0.8;
  // Expected uniformly random "noise visits" per user-day.
  double noise_level = 0.0;
  // Probability that a user's position at a bin is recorded.
  double observation_rate = 0.3;
  std::vector<VenueSpike> spikes;
};

struct GroundTruth {
  int template_id = 0;
  std::string template_name;
  DihedralTransform obfuscation = DihedralTransform::kIdentity;
  // What city matching should report: the inverse of the obfuscation.
  DihedralTransform recovery = DihedralTransform::kIdentity;
  Date start_date;
  Weekday weekday_of_day0 = Weekday::kMon;
  std::vector<int> holiday_days;  // Mon-Fri calendar holidays in the span
  std::vector<UserId> users;
  std::vector<Cell> homes;  // released frame, parallel to users
  std::vector<Cell> works;
  std::vector<bool> commuters;
  std::vector<Cell> spike_cells;  // released frame
  std::vector<std::vector<int>> spike_days;
};

inline absl::Status ValidateSynthConfig(const SynthConfig& cfg) {
  TRAJREID_RETURN_IF_ERROR(cfg.grid.Validate());
  if (cfg.users < 1 || cfg.days < 1) {
    return absl::InvalidArgumentError("users and days must be >= 1");
  }
  if (cfg.template_count < 2 || cfg.template_count > kTemplateCount) {
    return absl::InvalidArgumentError(
        absl::StrCat("template_count must be in [2,", kTemplateCount, "]"));
  }
  if (cfg.template_id < 0 || cfg.template_id >= cfg.template_count) {
    return absl::InvalidArgumentError("template_id out of range");
  }
  if (SwapsAxes(cfg.planted_transform) && cfg.grid.width != cfg.grid.height) {
    return absl::InvalidArgumentError("rotations need a square grid");
  }
  if (cfg.commuter_fraction < 0 || cfg.commuter_fraction > 1 ||
      cfg.observation_rate <= 0 || cfg.observation_rate > 1 ||
      cfg.noise_level < 0) {
    return absl::InvalidArgumentError("rate parameters out of range");
  }
  for (const VenueSpike& s : cfg.spikes) {
    if (!cfg.grid.Contains(s.cell) || s.days.size() != s.visitors.size()) {
      return absl::InvalidArgumentError("malformed venue spike");
    }
    for (int d : s.days) {
      if (d < 0 || d >= cfg.days) {
        return absl::InvalidArgumentError("spike day out of range");
      }
    }
  }
  return absl::OkStatus();
}

// One raster per template on cfg.grid, named by template. Fails when any
// pair is too similar under clustered correlation.
inline absl::StatusOr<std::vector<PopulationRaster>> GenCityRasters(
    const SynthConfig& cfg, ClusterDims clusters = {}) {
  TRAJREID_RETURN_IF_ERROR(cfg.grid.Validate());
  if (cfg.template_count < 2 || cfg.template_count > kTemplateCount) {
    return absl::InvalidArgumentError(
        absl::StrCat("need between 2 and ", kTemplateCount, " templates"));
  }
  std::vector<PopulationRaster> rasters;
  for (int id = 0; id < cfg.template_count; ++id) {
    rasters.push_back(PopulationRaster{
        std::string(kTemplateNames[id]),
        TemplateField(id, cfg.grid.width, cfg.grid.height), 0.0, 0.0,
        cfg.grid.cell_size_m});
  }
  for (size_t i = 0; i < rasters.size(); ++i) {
    for (size_t j = i + 1; j < rasters.size(); ++j) {
      TRAJREID_ASSIGN_OR_RETURN(
          double c, ClusteredCorrelation(rasters[i].density, rasters[j].density,
                                         clusters));
      if (c >= kTemplateDistinctness) {
        return absl::FailedPreconditionError(absl::StrCat(
            "templates ", rasters[i].name, " and ", rasters[j].name,
            " are indistinguishable (clustered correlation ", c, ")"));
      }
    }
  }
  return rasters;
}

namespace internal {

// Inverse-CDF sampler over cells.
class CellSampler {
 public:
  explicit CellSampler(const DensityField& f) : width_(f.width()) {
    cumulative_.reserve(f.size());
    double acc = 0;
    for (double v : f.values()) cumulative_.push_back(acc += v);
  }
  Cell Draw(Rng& rng) const {
    const double target = rng.UniformDouble() * cumulative_.back();
    const size_t i = static_cast<size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), target) -
        cumulative_.begin());
    const int idx = static_cast<int>(std::min(i, cumulative_.size() - 1));
    return {idx % width_, idx / width_};
  }

 private:
  int width_;
  std::vector<double> cumulative_;
};

inline int PoissonDraw(Rng& rng, double mean) {
  if (mean <= 0) return 0;
  // Knuth's method; means here are small.
  const double limit = std::exp(-mean);
  int k = 0;
  double p = rng.UniformDouble();
  while (p > limit) {
    ++k;
    p *= rng.UniformDouble();
  }
  return k;
}

// Recording intensity by bin: commute peaks on working days, a broad
// daytime plateau on non-working days.
inline double ObservationWeight(bool working, int bin) {
  if (working) {
    if ((bin >= 14 && bin < 18) || (bin >= 34 && bin < 38)) return 2.0;
    return 1.0;
  }
  return bin >= 16 && bin < 44 ? 1.5 : 0.6;
}

}  // namespace internal

// Synthetic traces with planted structure. Users get a home drawn from the
// template density and a work cell from its square (more central); commuters
// sit at work during office hours on working days, everyone spends
// non-working days between home and a personal leisure cell.
inline absl::StatusOr<std::pair<TraceSet, GroundTruth>> GenTraces(
    const SynthConfig& cfg) {
  TRAJREID_RETURN_IF_ERROR(ValidateSynthConfig(cfg));
  const HolidayCalendar& calendar =
      cfg.calendar ? *cfg.calendar : BundledJapaneseHolidays();
  const GridSpec& grid = cfg.grid;
  const DensityField density = TemplateField(cfg.template_id, grid.width, grid.height);
  DensityField work_density = density;
  for (double& v : work_density.mutable_values()) v *= v;
  const internal::CellSampler home_sampler(density);
  const internal::CellSampler work_sampler(work_density);

  GroundTruth truth;
  truth.template_id = cfg.template_id;
  truth.template_name = std::string(kTemplateNames[cfg.template_id]);
  truth.obfuscation = cfg.planted_transform;
  truth.recovery = Inverse(cfg.planted_transform);
  truth.start_date = cfg.start_date;
  truth.weekday_of_day0 = WeekdayOf(cfg.start_date);
  std::vector<char> working(static_cast<size_t>(cfg.days));
  int working_days = 0;
  for (int d = 0; d < cfg.days; ++d) {
    const Date date = cfg.start_date + std::chrono::days{d};
    const bool weekend = IsWeekend(WeekdayOf(date));
    const bool holiday = calendar.IsHoliday(date);
    if (!weekend && holiday) truth.holiday_days.push_back(d);
    working[d] = !weekend && !holiday;
    working_days += working[d];
  }
  if (working_days == 0) {
    return absl::InvalidArgumentError("configuration has no working days");
  }

  auto release = [&](Cell c) {
    return TransformCell(cfg.planted_transform, c, grid.width, grid.height);
  };

  const size_t n_users = static_cast<size_t>(cfg.users);
  std::vector<Trajectory> trajs(n_users);
  truth.users.resize(n_users);
  truth.homes.resize(n_users);
  truth.works.resize(n_users);
  truth.commuters.resize(n_users);
  ParallelFor(n_users, [&](size_t u) {
    Rng rng(DeriveSeed(cfg.seed, 0x75736572ULL, u));
    const Cell home = home_sampler.Draw(rng);
    const bool commuter = rng.Bernoulli(cfg.commuter_fraction);
    const Cell work = commuter ? work_sampler.Draw(rng) : home;
    const Cell leisure = home_sampler.Draw(rng);
    const Cell transit{(home.x + work.x) / 2, (home.y + work.y) / 2};
    std::array<std::optional<Cell>, kBinsPerDay> day_cells;
    Trajectory& t = trajs[u];
    t.user = static_cast<UserId>(u);
    for (int d = 0; d < cfg.days; ++d) {
      const bool work_day = working[d] != 0;
      for (int b = 0; b < kBinsPerDay; ++b) {
        day_cells[b].reset();
        const double p = std::min(
            1.0, cfg.observation_rate * internal::ObservationWeight(work_day, b));
        if (!rng.Bernoulli(p)) continue;
        Cell c = home;
        if (work_day && commuter) {
          if (b >= 18 && b < 34) {
            c = work;
          } else if ((b >= 14 && b < 18) || (b >= 34 && b < 38)) {
            c = transit;
          }
        } else if (b >= 16 && b < 44 && rng.Bernoulli(0.5)) {
          c = leisure;
        }
        day_cells[b] = c;
      }
      const int noise = internal::PoissonDraw(rng, cfg.noise_level);
      for (int i = 0; i < noise; ++i) {
        const int b = static_cast<int>(rng.UniformInt(kBinsPerDay));
        day_cells[b] = Cell{static_cast<int32_t>(rng.UniformInt(grid.width)),
                            static_cast<int32_t>(rng.UniformInt(grid.height))};
      }
      for (int b = 0; b < kBinsPerDay; ++b) {
        if (day_cells[b]) t.samples.push_back(Sample{d, b, release(*day_cells[b])});
      }
    }
    truth.users[u] = t.user;
    truth.homes[u] = release(home);
    truth.works[u] = release(work);
    truth.commuters[u] = commuter;
  });

  // Venue spikes: extra distinct visitors at the venue during the day.
  Rng spike_rng(DeriveSeed(cfg.seed, 0x7370696bULL));
  for (const VenueSpike& spike : cfg.spikes) {
    truth.spike_cells.push_back(release(spike.cell));
    truth.spike_days.push_back(spike.days);
    for (size_t i = 0; i < spike.days.size(); ++i) {
      const int day = spike.days[i];
      const int visitors = std::min(spike.visitors[i], cfg.users);
      // Partial Fisher-Yates over users for distinct visitors.
      std::vector<size_t> order(n_users);
      for (size_t j = 0; j < n_users; ++j) order[j] = j;
      for (int j = 0; j < visitors; ++j) {
        std::swap(order[j], order[j + spike_rng.UniformInt(n_users - j)]);
        const int bin = 20 + static_cast<int>(spike_rng.UniformInt(8));
        auto& samples = trajs[order[j]].samples;
        const Sample visit{day, bin, release(spike.cell)};
        auto it = std::lower_bound(samples.begin(), samples.end(), visit,
                                   [](const Sample& a, const Sample& b) {
                                     return std::tie(a.day, a.bin) <
                                            std::tie(b.day, b.bin);
                                   });
        if (it != samples.end() && it->day == day && it->bin == bin) {
          it->cell = visit.cell;
        } else {
          samples.insert(it, visit);
        }
      }
    }
  }

  // Users who were never observed are dropped from the release.
  std::vector<Trajectory> kept;
  GroundTruth filtered = truth;
  filtered.users.clear();
  filtered.homes.clear();
  filtered.works.clear();
  filtered.commuters.clear();
  for (size_t u = 0; u < n_users; ++u) {
    if (trajs[u].samples.empty()) continue;
    filtered.users.push_back(truth.users[u]);
    filtered.homes.push_back(truth.homes[u]);
    filtered.works.push_back(truth.works[u]);
    filtered.commuters.push_back(truth.commuters[u]);
    kept.push_back(std::move(trajs[u]));
  }
  TRAJREID_ASSIGN_OR_RETURN(TraceSet ts,
                            TraceSet::Create(grid, cfg.days, std::move(kept)));
  return std::make_pair(std::move(ts), std::move(filtered));
}

// Geo-referenced Gaussian mixture, rasterized exactly (erf products) onto
// the working grid for any candidate center.
struct GeoBlob {
  GeoPoint center;
  double sigma_m = 5000.0;
  double weight = 1.0;
};

inline GeoSampler GeoMixtureSampler(std::vector<GeoBlob> blobs, GridSpec grid) {
  return [blobs = std::move(blobs),
          grid = std::move(grid)](GeoPoint c) -> absl::StatusOr<DensityField> {
    DensityField out(grid.width, grid.height);
    const double lon_scale = MetersPerDegreeLon(c.lat);
    std::vector<double> wx(static_cast<size_t>(grid.width));
    std::vector<double> wy(static_cast<size_t>(grid.height));
    for (const GeoBlob& b : blobs) {
      // Offsets of the blob from the candidate center, in meters.
      const double bx = (b.center.lon - c.lon) * lon_scale;
      const double by = (b.center.lat - c.lat) * kMetersPerDegree;
      const double k = 1.0 / (std::numbers::sqrt2 * b.sigma_m);
      auto mass = [&](double lo, double hi, double mu) {
        return 0.5 * (std::erf((hi - mu) * k) - std::erf((lo - mu) * k));
      };
      for (int x = 0; x < grid.width; ++x) {
        const double lo = (x - grid.width / 2.0) * grid.cell_size_m;
        wx[x] = mass(lo, lo + grid.cell_size_m, bx);
      }
      for (int y = 0; y < grid.height; ++y) {
        const double lo = (y - grid.height / 2.0) * grid.cell_size_m;
        wy[y] = mass(lo, lo + grid.cell_size_m, by);
      }
      for (int y = 0; y < grid.height; ++y) {
        if (wy[y] == 0) continue;
        for (int x = 0; x < grid.width; ++x) out.at(x, y) += b.weight * wy[y] * wx[x];
      }
    }
    return out;
  };
}

}  // namespace trajreid

#endif  // TRAJREID_SYNTH_H_
