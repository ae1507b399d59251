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

#ifndef TRAJREID_TEMPORAL_H_
#define TRAJREID_TEMPORAL_H_

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "trajreid/base/rng.h"
#include "trajreid/base/status.h"
#include "trajreid/catalogs.h"
#include "trajreid/trace_store.h"

namespace trajreid {

// Monday = 0 ... Sunday = 6.
enum class Weekday : int { kMon = 0, kTue, kWed, kThu, kFri, kSat, kSun };

inline constexpr std::string_view WeekdayName(Weekday w) {
  constexpr std::array<std::string_view, 7> kNames = {"Mon", "Tue", "Wed", "Thu",
                                                      "Fri", "Sat", "Sun"};
  return kNames[static_cast<size_t>(w)];
}

inline Weekday WeekdayOf(Date d) {
  return static_cast<Weekday>(std::chrono::weekday{d}.iso_encoding() - 1);
}

inline Weekday WeekdayOfDay(Weekday day0, int day) {
  return static_cast<Weekday>((static_cast<int>(day0) + day) % 7);
}

inline bool IsWeekend(Weekday w) {
  return w == Weekday::kSat || w == Weekday::kSun;
}

// A = non-working day, B = working day.
enum class DayClass : char { kA = 'A', kB = 'B' };

struct DayProfile {
  int day = 0;
  std::array<double, kBinsPerDay> counts{};
};

// The n cells with most unique visitors, descending; ties by (x, y).
inline absl::StatusOr<std::vector<Cell>> TopCells(const TraceSet& ts, int n) {
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  const GridSpec& grid = ts.grid();
  std::vector<int> visited;
  for (int i = 0; i < grid.CellCount(); ++i) {
    if (!ts.UsersAtIndex(i).empty()) visited.push_back(i);
  }
  if (static_cast<size_t>(n) > visited.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "requested ", n, " cells but only ", visited.size(), " are visited"));
  }
  auto key = [&](int i) {
    return std::make_tuple(-static_cast<int64_t>(ts.UsersAtIndex(i).size()),
                           grid.CellAt(i).x, grid.CellAt(i).y);
  };
  std::partial_sort(visited.begin(), visited.begin() + n, visited.end(),
                    [&](int a, int b) { return key(a) < key(b); });
  std::vector<Cell> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) out.push_back(grid.CellAt(visited[k]));
  return out;
}

// One profile per day; entry t counts distinct users seen in any listed cell
// at bin t. A user has at most one sample per (day, bin), so counting
// matching samples counts distinct users.
inline absl::StatusOr<std::vector<DayProfile>> DayProfiles(
    const TraceSet& ts, const std::vector<Cell>& cells) {
  if (cells.empty()) return absl::InvalidArgumentError("empty cell set");
  const GridSpec& grid = ts.grid();
  std::vector<char> in_set(static_cast<size_t>(grid.CellCount()), 0);
  std::set<int32_t> users;
  for (Cell c : cells) {
    if (!grid.Contains(c)) {
      return absl::InvalidArgumentError(
          absl::StrCat("cell ", CellToString(c), " outside grid"));
    }
    in_set[grid.Index(c)] = 1;
    for (int32_t u : ts.UsersAt(c)) users.insert(u);
  }
  std::vector<DayProfile> profiles(static_cast<size_t>(ts.day_count()));
  for (int d = 0; d < ts.day_count(); ++d) profiles[d].day = d;
  const auto trajs = ts.trajectories();
  for (int32_t u : users) {
    for (const Sample& s : trajs[u].samples) {
      if (in_set[grid.Index(s.cell)]) profiles[s.day].counts[s.bin] += 1.0;
    }
  }
  return profiles;
}

enum class ZScoreAxis {
  kPerBinAcrossDays,  // each bin standardized over the days
  kPerDayAcrossBins,  // each day standardized over its 48 bins
};

struct ClassifyOptions {
  uint64_t seed = 0;
  int restarts = 50;
  int max_iterations = 300;
  ZScoreAxis axis = ZScoreAxis::kPerBinAcrossDays;
};

struct DayClassification {
  std::vector<int> days;
  std::vector<DayClass> labels;  // parallel to `days`
  // Row 0 = class A centroid, row 1 = class B, in z-scored space.
  std::array<std::array<double, kBinsPerDay>, 2> centroids{};
  double inertia = 0.0;
};

namespace internal {

using Point48 = std::array<double, kBinsPerDay>;

inline double SquaredDistance(const Point48& a, const Point48& b) {
  double s = 0;
  for (int i = 0; i < kBinsPerDay; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct KMeansRun {
  std::vector<int> assignment;
  std::array<Point48, 2> centers{};
  double inertia = std::numeric_limits<double>::infinity();
};

// Lloyd iterations from k-means++ seeding, k = 2.
inline KMeansRun KMeans2(const std::vector<Point48>& points, Rng& rng,
                         int max_iterations) {
  const size_t n = points.size();
  KMeansRun run;
  run.centers[0] = points[rng.UniformInt(n)];
  std::vector<double> d2(n);
  double total = 0;
  for (size_t i = 0; i < n; ++i) {
    d2[i] = SquaredDistance(points[i], run.centers[0]);
    total += d2[i];
  }
  size_t second = 0;
  if (total > 0) {
    double target = rng.UniformDouble() * total;
    for (; second + 1 < n; ++second) {
      target -= d2[second];
      if (target < 0) break;
    }
    while (d2[second] == 0 && second > 0) --second;
  } else {
    second = rng.UniformInt(n);
  }
  run.centers[1] = points[second];
  run.assignment.assign(n, -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      const int c = SquaredDistance(points[i], run.centers[1]) <
                            SquaredDistance(points[i], run.centers[0])
                        ? 1
                        : 0;
      if (c != run.assignment[i]) {
        run.assignment[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::array<Point48, 2> sums{};
    std::array<int, 2> sizes{};
    for (size_t i = 0; i < n; ++i) {
      const int c = run.assignment[i];
      ++sizes[c];
      for (int b = 0; b < kBinsPerDay; ++b) sums[c][b] += points[i][b];
    }
    for (int c = 0; c < 2; ++c) {
      if (sizes[c] == 0) continue;  // keep the old center; reported later
      for (int b = 0; b < kBinsPerDay; ++b) {
        run.centers[c][b] = sums[c][b] / sizes[c];
      }
    }
  }
  run.inertia = 0;
  for (size_t i = 0; i < n; ++i) {
    run.inertia += SquaredDistance(points[i], run.centers[run.assignment[i]]);
  }
  return run;
}

inline absl::StatusOr<std::vector<Point48>> ZScore(
    const std::vector<DayProfile>& profiles, ZScoreAxis axis) {
  const size_t n = profiles.size();
  std::vector<Point48> z(n);
  bool any_variance = false;
  if (axis == ZScoreAxis::kPerBinAcrossDays) {
    for (int b = 0; b < kBinsPerDay; ++b) {
      double mean = 0;
      for (const auto& p : profiles) mean += p.counts[b];
      mean /= n;
      double var = 0;
      for (const auto& p : profiles) var += (p.counts[b] - mean) * (p.counts[b] - mean);
      const double sd = std::sqrt(var / n);
      for (size_t i = 0; i < n; ++i) {
        z[i][b] = sd > 0 ? (profiles[i].counts[b] - mean) / sd : 0.0;
      }
      any_variance |= sd > 0;
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      const auto& c = profiles[i].counts;
      const double mean = std::accumulate(c.begin(), c.end(), 0.0) / kBinsPerDay;
      double var = 0;
      for (double v : c) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / kBinsPerDay);
      for (int b = 0; b < kBinsPerDay; ++b) {
        z[i][b] = sd > 0 ? (c[b] - mean) / sd : 0.0;
      }
    }
    for (size_t i = 1; i < n && !any_variance; ++i) {
      any_variance = SquaredDistance(z[i], z[0]) > 0;
    }
  }
  if (!any_variance) {
    return absl::FailedPreconditionError(
        "day profiles have zero variance; clustering is undefined");
  }
  return z;
}

}  // namespace internal

// Z-scores the profiles and runs 2-means (k-means++ seeding, best of
// `restarts` by inertia). The larger cluster is labeled B; on a size tie,
// the cluster holding the earliest day is B.
inline absl::StatusOr<DayClassification> ClassifyDays(
    const std::vector<DayProfile>& profiles, const ClassifyOptions& opts = {}) {
  if (profiles.size() < 2) {
    return absl::InvalidArgumentError("need at least 2 day profiles");
  }
  if (opts.restarts < 1 || opts.max_iterations < 1) {
    return absl::InvalidArgumentError("restarts and iterations must be >= 1");
  }
  TRAJREID_ASSIGN_OR_RETURN(std::vector<internal::Point48> z,
                            internal::ZScore(profiles, opts.axis));
  internal::KMeansRun best;
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(DeriveSeed(opts.seed, static_cast<uint64_t>(r)));
    internal::KMeansRun run = internal::KMeans2(z, rng, opts.max_iterations);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  std::array<int, 2> sizes{};
  for (int a : best.assignment) ++sizes[a];
  if (sizes[0] == 0 || sizes[1] == 0) {
    return absl::FailedPreconditionError(
        "degenerate clustering: one cluster is empty");
  }
  int b_cluster = sizes[1] > sizes[0] ? 1 : 0;
  if (sizes[0] == sizes[1]) b_cluster = best.assignment[0];
  DayClassification out;
  out.inertia = best.inertia;
  out.centroids[0] = best.centers[1 - b_cluster];
  out.centroids[1] = best.centers[b_cluster];
  for (size_t i = 0; i < profiles.size(); ++i) {
    out.days.push_back(profiles[i].day);
    out.labels.push_back(best.assignment[i] == b_cluster ? DayClass::kB
                                                         : DayClass::kA);
  }
  return out;
}

struct WeekdayHypothesis {
  Weekday day0 = Weekday::kMon;
  int hard_violations = 0;  // Sat/Sun labeled B
  int soft_anomalies = 0;   // Mon-Fri labeled A
};

struct WeekdayInference {
  Weekday weekday_of_day0 = Weekday::kMon;
  std::vector<int> holiday_days;  // Mon-Fri A-days under the winner
  int hard_violations = 0;
  int soft_anomalies = 0;
  std::array<WeekdayHypothesis, 7> hypotheses{};
};

// `labels[d]` is the class of day d.
inline absl::StatusOr<WeekdayInference> InferWeekdayOffset(
    const std::vector<DayClass>& labels) {
  if (labels.size() < 14) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 14 labeled days, got ", labels.size()));
  }
  WeekdayInference out;
  for (int w = 0; w < 7; ++w) {
    WeekdayHypothesis& h = out.hypotheses[w];
    h.day0 = static_cast<Weekday>(w);
    for (size_t d = 0; d < labels.size(); ++d) {
      const bool weekend = IsWeekend(WeekdayOfDay(h.day0, static_cast<int>(d)));
      if (weekend && labels[d] == DayClass::kB) ++h.hard_violations;
      if (!weekend && labels[d] == DayClass::kA) ++h.soft_anomalies;
    }
  }
  std::array<WeekdayHypothesis, 7> ranked = out.hypotheses;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const WeekdayHypothesis& a, const WeekdayHypothesis& b) {
                     return std::tie(a.hard_violations, a.soft_anomalies) <
                            std::tie(b.hard_violations, b.soft_anomalies);
                   });
  if (ranked[0].hard_violations == ranked[1].hard_violations &&
      ranked[0].soft_anomalies == ranked[1].soft_anomalies) {
    return absl::FailedPreconditionError(absl::StrCat(
        "ambiguous weekday offset: day 0 could be ", std::string(WeekdayName(ranked[0].day0)),
        " or ", std::string(WeekdayName(ranked[1].day0)), " (", ranked[0].hard_violations,
        " hard, ", ranked[0].soft_anomalies, " soft each)"));
  }
  out.weekday_of_day0 = ranked[0].day0;
  out.hard_violations = ranked[0].hard_violations;
  out.soft_anomalies = ranked[0].soft_anomalies;
  for (size_t d = 0; d < labels.size(); ++d) {
    if (labels[d] == DayClass::kA &&
        !IsWeekend(WeekdayOfDay(out.weekday_of_day0, static_cast<int>(d)))) {
      out.holiday_days.push_back(static_cast<int>(d));
    }
  }
  return out;
}

struct DateWindow {
  Date earliest;  // first allowed day of the series
  Date latest;    // last allowed day of the series
};

inline DateWindow DefaultSearchWindow() {
  using namespace std::chrono;
  return {sys_days{year{2015} / January / 1}, sys_days{year{2024} / April / 18}};
}

struct CalendarCandidate {
  Date start;
  // (day index, holiday name) for each suspected holiday that matched.
  std::vector<std::pair<int, std::string>> matched;
  std::vector<int> unmatched;  // suspected holidays absorbed by tolerance
};

struct TemporalResult {
  Weekday weekday_of_day0 = Weekday::kMon;
  std::vector<int> holiday_days;
  std::vector<CalendarCandidate> candidates;  // ascending by start date
  bool unique = false;
};

struct CalendarMatchOptions {
  DateWindow window = DefaultSearchWindow();
  int day_count = kDefaultDayCount;
  // Suspected holidays allowed to miss the calendar (e.g. disaster days).
  int tolerance = 0;
};

// Scans every start date whose weekday matches and whose whole series fits
// in the window. A date is accepted when the suspected holidays map onto
// calendar holidays (up to `tolerance` misses) and every Mon-Fri calendar
// holiday inside the series is a suspected holiday.
inline absl::StatusOr<TemporalResult> MatchCalendar(
    Weekday weekday_of_day0, const std::vector<int>& holiday_days,
    const HolidayCalendar& calendar, const CalendarMatchOptions& opts = {}) {
  using std::chrono::days;
  const int n_days = opts.day_count;
  if (n_days < 1) return absl::InvalidArgumentError("day_count must be >= 1");
  if (opts.window.earliest + days{n_days - 1} > opts.window.latest) {
    return absl::InvalidArgumentError("search window shorter than the series");
  }
  if (calendar.Between(opts.window.earliest, opts.window.latest).empty()) {
    return absl::InvalidArgumentError(
        "holiday calendar has no entries inside the search window");
  }
  std::vector<char> suspected(static_cast<size_t>(n_days), 0);
  for (int d : holiday_days) {
    if (d < 0 || d >= n_days) {
      return absl::InvalidArgumentError(
          absl::StrCat("holiday day ", d, " outside [0,", n_days, ")"));
    }
    suspected[d] = 1;
  }
  TemporalResult result;
  result.weekday_of_day0 = weekday_of_day0;
  result.holiday_days = holiday_days;
  std::sort(result.holiday_days.begin(), result.holiday_days.end());
  Date start = opts.window.earliest;
  while (WeekdayOf(start) != weekday_of_day0) start += days{1};
  for (; start + days{n_days - 1} <= opts.window.latest; start += days{7}) {
    CalendarCandidate cand{start, {}, {}};
    for (int d : result.holiday_days) {
      const Date date = start + days{d};
      if (calendar.IsHoliday(date)) {
        cand.matched.emplace_back(d, std::string(calendar.NameOf(date)));
      } else {
        cand.unmatched.push_back(d);
      }
    }
    if (static_cast<int>(cand.unmatched.size()) > opts.tolerance) continue;
    bool complete = true;
    for (Date h : calendar.Between(start, start + days{n_days - 1})) {
      const int d = static_cast<int>((h - start).count());
      if (!IsWeekend(WeekdayOf(h)) && !suspected[d]) {
        complete = false;
        break;
      }
    }
    if (complete) result.candidates.push_back(std::move(cand));
  }
  result.unique = result.candidates.size() == 1;
  return result;
}

struct ActivitySpike {
  int day = 0;
  int count = 0;
};

// Days whose unique-user count at `cell` exceeds threshold x the median
// daily count, largest first.
inline absl::StatusOr<std::vector<ActivitySpike>> DetectActivitySpikes(
    const TraceSet& ts, Cell cell, double threshold) {
  if (!(threshold > 1)) {
    return absl::InvalidArgumentError("threshold must be > 1");
  }
  if (!ts.grid().Contains(cell)) {
    return absl::InvalidArgumentError(
        absl::StrCat("cell ", CellToString(cell), " outside grid"));
  }
  const auto users = ts.UsersAt(cell);
  if (users.empty()) {
    return absl::NotFoundError(
        absl::StrCat("cell ", CellToString(cell), " was never visited"));
  }
  std::vector<int> daily(static_cast<size_t>(ts.day_count()), 0);
  const auto trajs = ts.trajectories();
  for (int32_t u : users) {
    int last_day = -1;
    for (const Sample& s : trajs[u].samples) {
      if (s.cell == cell && s.day != last_day) {
        ++daily[s.day];
        last_day = s.day;
      }
    }
  }
  std::vector<int> sorted = daily;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2]
                                   : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<ActivitySpike> spikes;
  for (int d = 0; d < ts.day_count(); ++d) {
    if (daily[d] > threshold * median) spikes.push_back({d, daily[d]});
  }
  std::stable_sort(spikes.begin(), spikes.end(),
                   [](const ActivitySpike& a, const ActivitySpike& b) {
                     return a.count > b.count;
                   });
  return spikes;
}

}  // namespace trajreid

#endif  // TRAJREID_TEMPORAL_H_
