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

#ifndef TRAJREID_CLI_COMMANDS_H_
#define TRAJREID_CLI_COMMANDS_H_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/parallel.h"
#include "trajreid/base/status.h"
#include "trajreid/catalogs.h"
#include "trajreid/density.h"
#include "trajreid/geo_align.h"
#include "trajreid/privacy_metrics.h"
#include "trajreid/report_io.h"
#include "trajreid/sanitizers.h"
#include "trajreid/synth.h"
#include "trajreid/temporal.h"
#include "trajreid/trace_store.h"
#include "trajreid/utility_eval.h"

namespace trajreid::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 2,
  kExitDegenerate = 3,
  kExitInternal = 4,
};

inline int ExitCodeFor(const absl::Status& s) {
  switch (s.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kAlreadyExists:
      return kExitInvalidInput;
    case absl::StatusCode::kFailedPrecondition:
      return kExitDegenerate;
    default:
      return kExitInternal;
  }
}

// ---------------------------------------------------------------------------
// Option values shared by all subcommands.

struct GlobalOptions {
  std::string grid = "200x200";
  double cell_size_m = kDefaultCellSizeMeters;
  int days = kDefaultDayCount;
  std::optional<uint64_t> seed;
  int workers = 0;  // 0: all available cores
  std::string out;
  std::string config;
};

inline std::vector<std::string_view> SplitOn(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline std::string_view Trim(std::string_view s) {
  const auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

inline absl::StatusOr<std::pair<int, int>> ParseDims(std::string_view s,
                                                     std::string_view what) {
  std::vector<std::string_view> parts = SplitOn(s, 'x');
  int w = 0, h = 0;
  if (parts.size() != 2 || !internal::ParseNumber(parts[0], w) ||
      !internal::ParseNumber(parts[1], h) || w < 1 || h < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(what), " must look like WxH, got '", std::string(s), "'"));
  }
  return std::make_pair(w, h);
}

inline absl::StatusOr<Cell> ParseCellArg(std::string_view s) {
  std::vector<std::string_view> parts = SplitOn(s, ',');
  int x = 0, y = 0;
  if (parts.size() != 2 || !internal::ParseNumber(parts[0], x) ||
      !internal::ParseNumber(parts[1], y)) {
    return absl::InvalidArgumentError(
        absl::StrCat("cell must look like x,y, got '", std::string(s), "'"));
  }
  return Cell{x, y};
}

inline absl::StatusOr<GridSpec> GridFrom(const GlobalOptions& g) {
  TRAJREID_ASSIGN_OR_RETURN(auto dims, ParseDims(g.grid, "--grid"));
  GridSpec grid{dims.first, dims.second, g.cell_size_m, std::nullopt, std::nullopt};
  TRAJREID_RETURN_IF_ERROR(grid.Validate());
  return grid;
}

inline absl::StatusOr<uint64_t> RequireSeed(const GlobalOptions& g,
                                            std::string_view command) {
  if (!g.seed) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(command), " is stochastic and needs an explicit --seed"));
  }
  return *g.seed;
}

inline absl::Status RequireOut(const GlobalOptions& g) {
  if (g.out.empty()) return absl::InvalidArgumentError("--out DIR is required");
  return absl::OkStatus();
}

struct LoadedTraces {
  TraceSet traces;
  std::string sha256;
};

inline absl::StatusOr<LoadedTraces> LoadTracesWithDigest(const std::string& path,
                                                         const GlobalOptions& g) {
  if (path.empty()) return absl::InvalidArgumentError("--traces is required");
  TRAJREID_ASSIGN_OR_RETURN(GridSpec grid, GridFrom(g));
  auto text = ReadTextFile(path);
  if (!text.ok()) {
    return absl::NotFoundError(absl::StrCat("cannot open traces file ", path));
  }
  std::istringstream in(*text);
  auto ts = ReadTraceSet(in, grid, g.days);
  if (!ts.ok()) {
    return absl::Status(ts.status().code(),
                        absl::StrCat(path, ": ", ts.status().message()));
  }
  return LoadedTraces{std::move(*ts), Sha256Hex(*text)};
}

inline absl::StatusOr<HolidayCalendar> CalendarFrom(const std::string& path) {
  if (path.empty()) return BundledJapaneseHolidays();
  return LoadHolidays(path);
}

template <typename T>
absl::StatusOr<std::vector<T>> ParseList(const std::string& s, std::string_view what) {
  std::vector<T> out;
  if (s.empty()) return out;
  for (std::string_view part : SplitOn(s, ',')) {
    part = Trim(part);
    T v{};
    bool ok;
    if constexpr (std::is_floating_point_v<T>) {
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      ok = ec == std::errc() && p == part.data() + part.size();
    } else {
      ok = internal::ParseNumber(part, v);
    }
    if (!ok) {
      return absl::InvalidArgumentError(absl::StrCat(
          "bad value '", std::string(part), "' in ", std::string(what)));
    }
    out.push_back(v);
  }
  return out;
}

// Rasters are brought onto the working grid when their shape differs.
inline absl::StatusOr<std::vector<PopulationRaster>> LoadRastersFor(
    const std::vector<std::string>& paths, const GridSpec& grid) {
  std::vector<PopulationRaster> out;
  for (const std::string& p : paths) {
    TRAJREID_ASSIGN_OR_RETURN(PopulationRaster r, LoadRaster(p));
    if (r.density.width() != grid.width || r.density.height() != grid.height) {
      r.density = ResampleRaster(r, grid, GeoPoint{r.center_lat, r.center_lon});
      r.cell_size_m = grid.cell_size_m;
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// reid-space

struct ReidSpaceOptions {
  std::string traces;
  std::vector<std::string> rasters;
  std::string clusters = "40x40";
  std::string density = "visits";
  std::string day_range;  // "first:last", inclusive; empty = all days
  bool align = false;
  double step_deg = 0.01;
  std::string align_metric = "cell";
  int restarts = 0;
  double restart_radius_deg = 0.1;
};

inline absl::Status CmdReidSpace(const GlobalOptions& g, const ReidSpaceOptions& o) {
  TRAJREID_RETURN_IF_ERROR(RequireOut(g));
  if (o.rasters.empty()) return absl::InvalidArgumentError("--raster is required");
  TRAJREID_ASSIGN_OR_RETURN(auto dims, ParseDims(o.clusters, "--clusters"));
  const ClusterDims clusters{dims.first, dims.second};
  if (o.density != "visits" && o.density != "unique") {
    return absl::InvalidArgumentError("--density must be visits or unique");
  }
  if (o.align_metric != "cell" && o.align_metric != "clustered") {
    return absl::InvalidArgumentError("--align-metric must be cell or clustered");
  }
  std::optional<uint64_t> seed;
  if (o.align && o.restarts > 0) {
    TRAJREID_ASSIGN_OR_RETURN(seed, RequireSeed(g, "reid-space with restarts"));
  }
  std::optional<DayRange> days;
  if (!o.day_range.empty()) {
    const auto parts = SplitOn(o.day_range, ':');
    int first = 0, last = 0;
    if (parts.size() != 2 || !internal::ParseNumber(parts[0], first) ||
        !internal::ParseNumber(parts[1], last)) {
      return absl::InvalidArgumentError(
          absl::StrCat("--day-range expects FIRST:LAST, got '", o.day_range, "'"));
    }
    days = DayRange{first, last};
  }
  TRAJREID_ASSIGN_OR_RETURN(LoadedTraces in, LoadTracesWithDigest(o.traces, g));
  TRAJREID_ASSIGN_OR_RETURN(std::vector<PopulationRaster> rasters,
                            LoadRastersFor(o.rasters, in.traces.grid()));
  TRAJREID_ASSIGN_OR_RETURN(
      DensityField f,
      ComputeDensityField(in.traces, days,
                          o.density == "unique" ? DensityMode::kUniqueUsers
                                                : DensityMode::kVisits));
  TRAJREID_ASSIGN_OR_RETURN(MatchResult match, MatchCity(f, rasters, clusters));

  ArtifactWriter w(g.out);
  TRAJREID_RETURN_IF_ERROR(w.WriteJson("match.json", MatchResultJson(match)));
  TRAJREID_RETURN_IF_ERROR(w.Write("match.csv", MatchResultCsv(match)));
  if (o.align) {
    const auto it = std::find_if(rasters.begin(), rasters.end(), [&](const auto& r) {
      return r.name == match.best_city;
    });
    TRAJREID_ASSIGN_OR_RETURN(DensityField restored,
                              ApplyTransform(f, match.best_transform));
    HillClimbOptions hc;
    hc.step_deg = o.step_deg;
    hc.metric = o.align_metric == "cell" ? AlignmentMetric::kCellSpearman
                                         : AlignmentMetric::kClusteredSpearman;
    hc.clusters = clusters;
    hc.restarts = o.restarts;
    hc.restart_radius_deg = o.restart_radius_deg;
    hc.seed = seed.value_or(0);
    TRAJREID_ASSIGN_OR_RETURN(
        GeoAlignment a,
        HillClimbAlign(restored, RasterSampler(*it, in.traces.grid()),
                       GeoPoint{it->center_lat, it->center_lon}, hc));
    Json j = GeoAlignmentJson(a);
    j["city"] = it->name;
    TRAJREID_RETURN_IF_ERROR(w.WriteJson("alignment.json", j));
  }
  return w.Finish("reid-space");
}

// ---------------------------------------------------------------------------
// reid-time

struct ReidTimeOptions {
  std::string traces;
  std::string calendar;
  int top_cells = 10;
  int restarts = 50;
  int max_iterations = 300;
  std::string zscore = "bin";
  std::string window_start = "2015-01-01";
  std::string window_end = "2024-04-18";
  int tolerance = 0;
  std::vector<std::string> spike_cells;
  double spike_threshold = 3.0;
};

inline absl::Status CmdReidTime(const GlobalOptions& g, const ReidTimeOptions& o) {
  TRAJREID_RETURN_IF_ERROR(RequireOut(g));
  TRAJREID_ASSIGN_OR_RETURN(uint64_t seed, RequireSeed(g, "reid-time"));
  if (o.zscore != "bin" && o.zscore != "day") {
    return absl::InvalidArgumentError("--zscore must be bin or day");
  }
  TRAJREID_ASSIGN_OR_RETURN(Date first, ParseDate(o.window_start));
  TRAJREID_ASSIGN_OR_RETURN(Date last, ParseDate(o.window_end));
  TRAJREID_ASSIGN_OR_RETURN(HolidayCalendar cal, CalendarFrom(o.calendar));
  TRAJREID_ASSIGN_OR_RETURN(LoadedTraces in, LoadTracesWithDigest(o.traces, g));
  std::vector<Cell> spike_cells;
  for (const std::string& s : o.spike_cells) {
    TRAJREID_ASSIGN_OR_RETURN(Cell c, ParseCellArg(s));
    spike_cells.push_back(c);
  }

  TRAJREID_ASSIGN_OR_RETURN(std::vector<Cell> cells, TopCells(in.traces, o.top_cells));
  TRAJREID_ASSIGN_OR_RETURN(std::vector<DayProfile> profiles,
                            DayProfiles(in.traces, cells));
  ClassifyOptions co{seed, o.restarts, o.max_iterations,
                     o.zscore == "bin" ? ZScoreAxis::kPerBinAcrossDays
                                       : ZScoreAxis::kPerDayAcrossBins};
  TRAJREID_ASSIGN_OR_RETURN(DayClassification classes, ClassifyDays(profiles, co));
  TRAJREID_ASSIGN_OR_RETURN(WeekdayInference wi, InferWeekdayOffset(classes.labels));
  CalendarMatchOptions mo{DateWindow{first, last}, in.traces.day_count(), o.tolerance};
  TRAJREID_ASSIGN_OR_RETURN(TemporalResult tr,
                            MatchCalendar(wi.weekday_of_day0, wi.holiday_days, cal, mo));

  Json j = TemporalResultJson(tr, cal);
  j["window"] = {FormatDate(first), FormatDate(last)};
  j["tolerance"] = o.tolerance;
  j["hard_violations"] = wi.hard_violations;
  j["soft_anomalies"] = wi.soft_anomalies;
  Json top = Json::array();
  for (Cell c : cells) top.push_back(CellJson(c));
  j["top_cells"] = top;
  j["inertia"] = classes.inertia;

  ArtifactWriter w(g.out);
  TRAJREID_RETURN_IF_ERROR(w.WriteJson("temporal.json", j));
  TRAJREID_RETURN_IF_ERROR(
      w.Write("day_classes.csv", DayClassCsv(classes, wi.weekday_of_day0)));
  if (!spike_cells.empty()) {
    std::string csv = "x,y,day,count\n";
    for (Cell c : spike_cells) {
      TRAJREID_ASSIGN_OR_RETURN(auto spikes,
                                DetectActivitySpikes(in.traces, c, o.spike_threshold));
      for (const ActivitySpike& s : spikes) {
        absl::StrAppend(&csv, c.x, ",", c.y, ",", s.day, ",", s.count, "\n");
      }
    }
    TRAJREID_RETURN_IF_ERROR(w.Write("spikes.csv", csv));
  }
  return w.Finish("reid-time");
}

// ---------------------------------------------------------------------------
// metrics

inline constexpr std::string_view kAllMetrics[] = {
    "k-anonymity", "unicity", "anchors", "seclusion", "sensitive"};

struct MetricsOptions {
  std::vector<std::string> metrics;  // empty: all applicable
  std::string m = "1,2,3,4,5";
  std::string delta = "0,1,2,4";
  std::string k_thresholds = "1,2,5,10";
  int trials = 1000;
  std::string kappa = "1,3,10";
  int max_r = 3;
  std::string q = "1,2,3";
  std::string traces;
  std::string pois;
};

inline absl::Status CmdMetrics(const GlobalOptions& g, const MetricsOptions& o) {
  TRAJREID_RETURN_IF_ERROR(RequireOut(g));
  std::vector<std::string> metrics = o.metrics;
  if (metrics.empty()) {
    metrics = {"k-anonymity", "unicity", "anchors", "seclusion"};
    if (!o.pois.empty()) metrics.push_back("sensitive");
  }
  for (const std::string& m : metrics) {
    if (std::find(std::begin(kAllMetrics), std::end(kAllMetrics), m) ==
        std::end(kAllMetrics)) {
      return absl::InvalidArgumentError(absl::StrCat("unknown metric '", m, "'"));
    }
  }
  auto wants = [&](std::string_view m) {
    return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
  };
  std::optional<uint64_t> seed;
  if (wants("k-anonymity") || wants("unicity")) {
    TRAJREID_ASSIGN_OR_RETURN(seed, RequireSeed(g, "metrics (k-anonymity, unicity)"));
  }
  if (wants("sensitive") && o.pois.empty()) {
    return absl::InvalidArgumentError("the sensitive metric needs --pois");
  }
  if (o.trials < 1) return absl::InvalidArgumentError("--trials must be >= 1");
  TRAJREID_ASSIGN_OR_RETURN(auto ms, ParseList<int>(o.m, "--m"));
  TRAJREID_ASSIGN_OR_RETURN(auto deltas, ParseList<int>(o.delta, "--delta"));
  TRAJREID_ASSIGN_OR_RETURN(auto ks, ParseList<int>(o.k_thresholds, "--k-thresholds"));
  TRAJREID_ASSIGN_OR_RETURN(auto kappas, ParseList<int>(o.kappa, "--kappa"));
  TRAJREID_ASSIGN_OR_RETURN(auto qs, ParseList<int>(o.q, "--q"));
  TRAJREID_ASSIGN_OR_RETURN(LoadedTraces in, LoadTracesWithDigest(o.traces, g));
  const TraceSet& ts = in.traces;

  ArtifactWriter w(g.out);
  auto emit = [&](const std::string& stem, const RiskReport& r) -> absl::Status {
    TRAJREID_RETURN_IF_ERROR(w.WriteJson(stem + ".json", RiskReportJson(r)));
    return w.Write(stem + ".csv", RiskReportCsv(r));
  };
  if (wants("k-anonymity")) {
    TRAJREID_ASSIGN_OR_RETURN(auto r, KAnonymityRisk(ts, ms, deltas, o.trials, *seed, ks));
    TRAJREID_RETURN_IF_ERROR(emit("k_anonymity", ToRiskReport(r, *seed)));
  }
  if (wants("unicity")) {
    TRAJREID_ASSIGN_OR_RETURN(auto r, Unicity(ts, ms, o.trials, *seed));
    TRAJREID_RETURN_IF_ERROR(emit("unicity", ToRiskReport(r, *seed)));
  }
  if (wants("anchors")) {
    TRAJREID_ASSIGN_OR_RETURN(auto r, AnchorUniqueness(ts, o.max_r));
    RiskReport report = ToRiskReport(r);
    TRAJREID_RETURN_IF_ERROR(emit("anchors", report));
    std::string dist = "k_hw,users\n";
    for (const auto& [k, n] : r.k_hw_distribution) absl::StrAppend(&dist, k, ",", n, "\n");
    TRAJREID_RETURN_IF_ERROR(w.Write("anchors_k_hw.csv", dist));
  }
  if (wants("seclusion")) {
    std::vector<SeclusionResult> rs;
    for (int kappa : kappas) {
      TRAJREID_ASSIGN_OR_RETURN(auto r, SeclusionExposure(ts, kappa));
      rs.push_back(std::move(r));
    }
    TRAJREID_RETURN_IF_ERROR(emit("seclusion", ToRiskReport(rs)));
  }
  if (wants("sensitive")) {
    TRAJREID_ASSIGN_OR_RETURN(PoiCatalog pois, LoadPois(o.pois, ts.grid()));
    std::vector<SensitiveUniquenessResult> rs;
    for (int q : qs) {
      TRAJREID_ASSIGN_OR_RETURN(auto r, SensitiveUniqueness(ts, pois, q));
      rs.push_back(std::move(r));
    }
    TRAJREID_RETURN_IF_ERROR(emit("sensitive", ToRiskReport(rs)));
  }
  return w.Finish("metrics");
}

// ---------------------------------------------------------------------------
// sanitize and sweep

struct SanitizeOptions {
  std::string traces;
  std::string mechanism;
  std::optional<double> epsilon;
  std::optional<double> radius;
  double level = 0.0;
  std::string scope = "full";
};

inline absl::StatusOr<PermutationScope> ParseScope(std::string_view s) {
  if (s == "full") return PermutationScope::kFullGrid;
  if (s == "visited") return PermutationScope::kVisitedCells;
  return absl::InvalidArgumentError("--scope must be full or visited");
}

inline absl::Status CmdSanitize(const GlobalOptions& g, const SanitizeOptions& o) {
  TRAJREID_RETURN_IF_ERROR(RequireOut(g));
  TRAJREID_ASSIGN_OR_RETURN(uint64_t seed, RequireSeed(g, "sanitize"));
  TRAJREID_ASSIGN_OR_RETURN(Mechanism m, ParseMechanism(o.mechanism));
  TRAJREID_ASSIGN_OR_RETURN(PermutationScope scope, ParseScope(o.scope));
  double parameter = 0.0;
  switch (m) {
    case Mechanism::kGeoIndEpsilon:
    case Mechanism::kGrr:
      if (!o.epsilon) return absl::InvalidArgumentError("--epsilon is required");
      parameter = *o.epsilon;
      break;
    case Mechanism::kGeoIndRadius:
      if (!o.radius || !(o.level > 0)) {
        return absl::InvalidArgumentError("--radius and a positive --level are required");
      }
      parameter = *o.radius;
      break;
    case Mechanism::kDestructure:
      break;
  }
  TRAJREID_ASSIGN_OR_RETURN(LoadedTraces in, LoadTracesWithDigest(o.traces, g));
  SweepOptions so;
  so.seed = seed;
  so.geoind_level = o.level;
  so.permutation_scope = scope;
  const uint64_t row_seed = RowSeed(seed, parameter);
  int64_t clamped = 0;
  TRAJREID_ASSIGN_OR_RETURN(
      TraceSet out, SanitizeWith(in.traces, m, parameter, row_seed, so, &clamped));

  Json prov = {{"mechanism", MechanismName(m)},
               {"parameter", parameter},
               {"seed", seed},
               {"row_seed", row_seed},
               {"input_sha256", in.sha256},
               {"users", in.traces.user_count()},
               {"samples", in.traces.sample_count()}};
  switch (m) {
    case Mechanism::kGeoIndEpsilon:
    case Mechanism::kGeoIndRadius: {
      const double eps = m == Mechanism::kGeoIndEpsilon ? parameter : o.level / parameter;
      prov["epsilon_per_m"] = eps;
      if (m == Mechanism::kGeoIndRadius) {
        prov["level"] = o.level;
        prov["radius_m"] = parameter;
      }
      prov["clamped_points"] = clamped;
      break;
    }
    case Mechanism::kGrr: {
      const GrrConfig c = GrrConfig::ForGrid(in.traces.grid(), parameter, row_seed);
      prov["epsilon"] = parameter;
      prov["k"] = c.k;
      prov["p"] = c.p();
      prov["q"] = c.q();
      break;
    }
    case Mechanism::kDestructure:
      prov["scope"] = o.scope;
      break;
  }
  std::ostringstream csv;
  WriteTraceSet(out, csv);
  ArtifactWriter w(g.out);
  TRAJREID_RETURN_IF_ERROR(w.Write("sanitized.csv", csv.str()));
  TRAJREID_RETURN_IF_ERROR(w.WriteJson("provenance.json", prov));
  return w.Finish("sanitize");
}

struct SweepCmdOptions {
  std::string traces;
  std::string mechanism;
  std::string params;
  double level = 0.0;
  std::string scope = "full";
  std::vector<std::string> metrics{"anchors", "kl"};
  bool no_debias = false;
  std::string reference;
  std::vector<std::string> rasters;
  std::string clusters = "40x40";
};

inline absl::Status CmdSweep(const GlobalOptions& g, const SweepCmdOptions& o) {
  TRAJREID_RETURN_IF_ERROR(RequireOut(g));
  TRAJREID_ASSIGN_OR_RETURN(uint64_t seed, RequireSeed(g, "sweep"));
  TRAJREID_ASSIGN_OR_RETURN(Mechanism m, ParseMechanism(o.mechanism));
  TRAJREID_ASSIGN_OR_RETURN(PermutationScope scope, ParseScope(o.scope));
  TRAJREID_ASSIGN_OR_RETURN(std::vector<double> params,
                            ParseList<double>(o.params, "--params"));
  TRAJREID_ASSIGN_OR_RETURN(auto dims, ParseDims(o.clusters, "--clusters"));
  SweepOptions so;
  so.seed = seed;
  so.geoind_level = o.level;
  so.permutation_scope = scope;
  so.debias_grr = !o.no_debias;
  so.clusters = {dims.first, dims.second};
  so.anchors = so.kl = false;
  bool want_correlation = false, want_match = false;
  for (const std::string& metric : o.metrics) {
    if (metric == "anchors") {
      so.anchors = true;
    } else if (metric == "kl") {
      so.kl = true;
    } else if (metric == "correlation") {
      want_correlation = true;
    } else if (metric == "match") {
      want_match = true;
    } else {
      return absl::InvalidArgumentError(absl::StrCat("unknown sweep metric '", metric, "'"));
    }
  }
  if (want_correlation && o.reference.empty()) {
    return absl::InvalidArgumentError("the correlation metric needs --reference");
  }
  if (want_match && o.rasters.empty()) {
    return absl::InvalidArgumentError("the match metric needs --raster");
  }
  TRAJREID_ASSIGN_OR_RETURN(LoadedTraces in, LoadTracesWithDigest(o.traces, g));
  if (want_correlation) {
    TRAJREID_ASSIGN_OR_RETURN(auto ref, LoadRastersFor({o.reference}, in.traces.grid()));
    so.reference = std::move(ref.front());
  }
  if (want_match) {
    TRAJREID_ASSIGN_OR_RETURN(so.rasters, LoadRastersFor(o.rasters, in.traces.grid()));
  }
  TRAJREID_ASSIGN_OR_RETURN(UtilityReport report,
                            SanitizerSweep(in.traces, m, params, so));
  Json j = UtilityReportJson(report);
  j["seed"] = seed;
  j["input_sha256"] = in.sha256;
  ArtifactWriter w(g.out);
  TRAJREID_RETURN_IF_ERROR(w.Write("utility.csv", UtilityReportCsv(report)));
  TRAJREID_RETURN_IF_ERROR(w.WriteJson("utility.json", j));
  return w.Finish("sweep");
}

// ---------------------------------------------------------------------------
// synth

struct SynthCmdOptions {
  int template_id = 0;
  int templates = kTemplateCount;
  int users = 1000;
  std::string transform = "identity";
  std::string start_date = "2019-09-15";
  std::string calendar;
  double commuter_fraction = 0.8;
  double noise = 0.0;
  double observation_rate = 0.3;
  std::string spike_cell;
  std::string spike_days;
  std::string spike_visitors;
  std::string clusters = "40x40";
};

// Synthetic rasters get well separated, made-up geo anchors.
inline GeoPoint SyntheticCityCenter(int template_id) {
  return {34.0 + 0.5 * template_id, 135.0 + 0.5 * template_id};
}

inline absl::Status CmdSynth(const GlobalOptions& g, const SynthCmdOptions& o) {
  TRAJREID_RETURN_IF_ERROR(RequireOut(g));
  SynthConfig cfg;
  TRAJREID_ASSIGN_OR_RETURN(cfg.seed, RequireSeed(g, "synth"));
  TRAJREID_ASSIGN_OR_RETURN(cfg.grid, GridFrom(g));
  cfg.template_id = o.template_id;
  cfg.template_count = o.templates;
  cfg.users = o.users;
  cfg.days = g.days;
  TRAJREID_ASSIGN_OR_RETURN(cfg.planted_transform, ParseTransform(o.transform));
  TRAJREID_ASSIGN_OR_RETURN(cfg.start_date, ParseDate(o.start_date));
  if (!o.calendar.empty()) {
    TRAJREID_ASSIGN_OR_RETURN(cfg.calendar, LoadHolidays(o.calendar));
  }
  cfg.commuter_fraction = o.commuter_fraction;
  cfg.noise_level = o.noise;
  cfg.observation_rate = o.observation_rate;
  if (!o.spike_cell.empty()) {
    VenueSpike spike;
    TRAJREID_ASSIGN_OR_RETURN(spike.cell, ParseCellArg(o.spike_cell));
    TRAJREID_ASSIGN_OR_RETURN(spike.days, ParseList<int>(o.spike_days, "--spike-days"));
    TRAJREID_ASSIGN_OR_RETURN(spike.visitors,
                              ParseList<int>(o.spike_visitors, "--spike-visitors"));
    cfg.spikes.push_back(std::move(spike));
  }
  TRAJREID_ASSIGN_OR_RETURN(auto dims, ParseDims(o.clusters, "--clusters"));
  TRAJREID_ASSIGN_OR_RETURN(auto generated, GenTraces(cfg));
  TRAJREID_ASSIGN_OR_RETURN(std::vector<PopulationRaster> rasters,
                            GenCityRasters(cfg, ClusterDims{dims.first, dims.second}));

  Json truth = GroundTruthJson(generated.second);
  truth["config"] = {{"seed", cfg.seed},
                     {"grid", g.grid},
                     {"cell_size_m", g.cell_size_m},
                     {"days", cfg.days},
                     {"template", o.template_id},
                     {"templates", o.templates},
                     {"users", o.users},
                     {"transform", o.transform},
                     {"start_date", o.start_date},
                     {"calendar", o.calendar.empty() ? "bundled" : o.calendar},
                     {"commuter_fraction", o.commuter_fraction},
                     {"noise", o.noise},
                     {"observation_rate", o.observation_rate},
                     {"spike_cell", o.spike_cell},
                     {"spike_days", o.spike_days},
                     {"spike_visitors", o.spike_visitors},
                     {"clusters", o.clusters}};
  std::ostringstream csv;
  WriteTraceSet(generated.first, csv);
  ArtifactWriter w(g.out);
  TRAJREID_RETURN_IF_ERROR(w.Write("traces.csv", csv.str()));
  TRAJREID_RETURN_IF_ERROR(w.WriteJson("ground_truth.json", truth));
  for (size_t i = 0; i < rasters.size(); ++i) {
    PopulationRaster& r = rasters[i];
    const GeoPoint c = SyntheticCityCenter(static_cast<int>(i));
    r.center_lat = c.lat;
    r.center_lon = c.lon;
    const std::string stem = "rasters/" + r.name;
    TRAJREID_RETURN_IF_ERROR(w.Write(stem + ".csv", RasterCsv(r)));
    TRAJREID_RETURN_IF_ERROR(w.WriteJson(stem + ".meta.json", RasterMeta(r)));
  }
  return w.Finish("synth");
}

// ---------------------------------------------------------------------------
// validate

struct ValidateOptions {
  std::string traces;
  std::string calendar;
  std::string pois;
  std::vector<std::string> rasters;
};

inline absl::Status CmdValidate(const GlobalOptions& g, const ValidateOptions& o) {
  TRAJREID_RETURN_IF_ERROR(RequireOut(g));
  TRAJREID_ASSIGN_OR_RETURN(LoadedTraces in, LoadTracesWithDigest(o.traces, g));
  const TraceSet& ts = in.traces;
  int visited = 0;
  for (int32_t i = 0; i < ts.grid().CellCount(); ++i) visited += !ts.UsersAtIndex(i).empty();
  Json j = {{"traces", {{"sha256", in.sha256},
                        {"users", ts.user_count()},
                        {"samples", ts.sample_count()},
                        {"day_count", ts.day_count()},
                        {"grid", g.grid},
                        {"visited_cells", visited}}}};
  if (!o.calendar.empty()) {
    TRAJREID_ASSIGN_OR_RETURN(HolidayCalendar cal, LoadHolidays(o.calendar));
    j["calendar"] = {{"country", cal.country()}, {"holidays", cal.holidays().size()}};
  }
  if (!o.pois.empty()) {
    TRAJREID_ASSIGN_OR_RETURN(PoiCatalog pois, LoadPois(o.pois, ts.grid()));
    j["pois"] = {{"entries", pois.entries().size()},
                 {"sensitive_cells", pois.SensitiveCells().size()}};
  }
  if (!o.rasters.empty()) {
    Json rs = Json::array();
    for (const std::string& p : o.rasters) {
      TRAJREID_ASSIGN_OR_RETURN(PopulationRaster r, LoadRaster(p));
      rs.push_back(RasterMeta(r));
    }
    j["rasters"] = rs;
  }
  ArtifactWriter w(g.out);
  TRAJREID_RETURN_IF_ERROR(w.WriteJson("validation.json", j));
  return w.Finish("validate");
}

// ---------------------------------------------------------------------------
// Config files: one `key = value` per line, keys spelled like the long flags
// without dashes, `#` starts a comment. Flags given on the command line win.

inline absl::StatusOr<std::vector<std::pair<std::string, std::string>>> ReadConfigFile(
    const std::string& path) {
  TRAJREID_ASSIGN_OR_RETURN(std::string text, ReadTextFile(path));
  std::vector<std::pair<std::string, std::string>> out;
  int line_no = 0;
  for (std::string_view line : SplitOn(text, '\n')) {
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, " line ", line_no, ": expected key = value"));
    }
    std::string_view key = Trim(line.substr(0, eq));
    std::string_view value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty() || key == "config") {
      return absl::InvalidArgumentError(
          absl::StrCat(path, " line ", line_no, ": invalid key"));
    }
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

// Appends config entries as `--key=value` unless the flag already appears.
inline absl::StatusOr<std::vector<std::string>> ExpandConfig(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].starts_with("--config=")) config = args[i].substr(9);
  }
  if (!config) return args;
  TRAJREID_ASSIGN_OR_RETURN(auto entries, ReadConfigFile(*config));
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
  };
  std::vector<std::string> extra;
  for (const auto& [k, v] : entries) {
    if (!given(k)) extra.push_back("--" + k + "=" + v);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// ---------------------------------------------------------------------------

inline int Run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  auto expanded = ExpandConfig(std::move(args));
  if (!expanded.ok()) {
    err << "error: " << expanded.status().message() << "\n";
    return ExitCodeFor(expanded.status());
  }
  args = std::move(*expanded);

  CLI::App app("Re-identification and privacy auditing of grid mobility traces",
               "trajreid");
  app.fallthrough();
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--grid", g.grid, "Grid size WxH")->capture_default_str();
  app.add_option("--cell-size-m", g.cell_size_m, "Cell side in meters")
      ->capture_default_str();
  app.add_option("--days", g.days, "Day count D of the release")->capture_default_str();
  app.add_option("--seed", g.seed, "RNG seed (required by stochastic commands)");
  app.add_option("--workers", g.workers, "Worker threads, 0 = all cores")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--config", g.config, "key = value file mirroring the flags");

  ReidSpaceOptions rs;
  auto* c_space = app.add_subcommand("reid-space", "Match the release to a city and orientation");
  c_space->add_option("--traces", rs.traces)->required();
  c_space->add_option("--raster", rs.rasters, "Raster CSV (repeatable)")->delimiter(',');
  c_space->add_option("--clusters", rs.clusters)->capture_default_str();
  c_space->add_option("--density", rs.density, "visits or unique")->capture_default_str();
  c_space->add_option("--day-range", rs.day_range, "Match on days FIRST:LAST only");
  c_space->add_flag("--align", rs.align, "Hill-climb the geo anchor of the best city");
  c_space->add_option("--step-deg", rs.step_deg)->capture_default_str();
  c_space->add_option("--align-metric", rs.align_metric, "cell or clustered")
      ->capture_default_str();
  c_space->add_option("--restarts", rs.restarts)->capture_default_str();
  c_space->add_option("--restart-radius-deg", rs.restart_radius_deg)->capture_default_str();

  ReidTimeOptions rt;
  auto* c_time = app.add_subcommand("reid-time", "Recover weekday and start date");
  c_time->add_option("--traces", rt.traces)->required();
  c_time->add_option("--calendar", rt.calendar, "Holiday CSV (default: bundled Japan)");
  c_time->add_option("--top-cells", rt.top_cells)->capture_default_str();
  c_time->add_option("--restarts", rt.restarts)->capture_default_str();
  c_time->add_option("--max-iterations", rt.max_iterations)->capture_default_str();
  c_time->add_option("--zscore", rt.zscore, "bin or day")->capture_default_str();
  c_time->add_option("--window-start", rt.window_start)->capture_default_str();
  c_time->add_option("--window-end", rt.window_end)->capture_default_str();
  c_time->add_option("--tolerance", rt.tolerance)->capture_default_str();
  c_time->add_option("--spike-cell", rt.spike_cells, "x,y (repeatable)");
  c_time->add_option("--spike-threshold", rt.spike_threshold)->capture_default_str();

  MetricsOptions mo;
  auto* c_metrics = app.add_subcommand("metrics", "Privacy risk metrics");
  c_metrics->add_option("--traces", mo.traces)->required();
  c_metrics->add_option("--metrics", mo.metrics,
                        "k-anonymity,unicity,anchors,seclusion,sensitive")
      ->delimiter(',');
  c_metrics->add_option("--m", mo.m)->capture_default_str();
  c_metrics->add_option("--delta", mo.delta)->capture_default_str();
  c_metrics->add_option("--k-thresholds", mo.k_thresholds)->capture_default_str();
  c_metrics->add_option("--trials", mo.trials)->capture_default_str();
  c_metrics->add_option("--kappa", mo.kappa)->capture_default_str();
  c_metrics->add_option("--max-r", mo.max_r)->capture_default_str();
  c_metrics->add_option("--q", mo.q)->capture_default_str();
  c_metrics->add_option("--pois", mo.pois);

  SanitizeOptions so;
  auto* c_sanitize = app.add_subcommand("sanitize", "Apply one sanitization mechanism");
  c_sanitize->add_option("--traces", so.traces)->required();
  c_sanitize->add_option("--mechanism", so.mechanism,
                         "geoind-epsilon, geoind-radius, grr or destructure")
      ->required();
  c_sanitize->add_option("--epsilon", so.epsilon);
  c_sanitize->add_option("--radius", so.radius, "Geo-Ind radius in meters");
  c_sanitize->add_option("--level", so.level, "Geo-Ind privacy level l");
  c_sanitize->add_option("--scope", so.scope, "full or visited")->capture_default_str();

  SweepCmdOptions sw;
  auto* c_sweep = app.add_subcommand("sweep", "Privacy-utility sweep over a parameter grid");
  c_sweep->add_option("--traces", sw.traces)->required();
  c_sweep->add_option("--mechanism", sw.mechanism)->required();
  c_sweep->add_option("--params", sw.params, "Comma-separated parameter grid");
  c_sweep->add_option("--level", sw.level);
  c_sweep->add_option("--scope", sw.scope)->capture_default_str();
  c_sweep->add_option("--metrics", sw.metrics, "anchors,kl,correlation,match")
      ->delimiter(',');
  c_sweep->add_flag("--no-debias", sw.no_debias);
  c_sweep->add_option("--reference", sw.reference, "Reference raster CSV");
  c_sweep->add_option("--raster", sw.rasters)->delimiter(',');
  c_sweep->add_option("--clusters", sw.clusters)->capture_default_str();

  SynthCmdOptions sy;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic city with ground truth");
  c_synth->add_option("--template", sy.template_id)->capture_default_str();
  c_synth->add_option("--templates", sy.templates)->capture_default_str();
  c_synth->add_option("--users", sy.users)->capture_default_str();
  c_synth->add_option("--transform", sy.transform)->capture_default_str();
  c_synth->add_option("--start-date", sy.start_date)->capture_default_str();
  c_synth->add_option("--calendar", sy.calendar);
  c_synth->add_option("--commuter-fraction", sy.commuter_fraction)->capture_default_str();
  c_synth->add_option("--noise", sy.noise)->capture_default_str();
  c_synth->add_option("--observation-rate", sy.observation_rate)->capture_default_str();
  c_synth->add_option("--spike-cell", sy.spike_cell);
  c_synth->add_option("--spike-days", sy.spike_days);
  c_synth->add_option("--spike-visitors", sy.spike_visitors);
  c_synth->add_option("--clusters", sy.clusters, "Blocks for the template check")
      ->capture_default_str();

  ValidateOptions vo;
  auto* c_validate = app.add_subcommand("validate", "Check input files");
  c_validate->add_option("--traces", vo.traces)->required();
  c_validate->add_option("--calendar", vo.calendar);
  c_validate->add_option("--pois", vo.pois);
  c_validate->add_option("--raster", vo.rasters)->delimiter(',');

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  SetMaxWorkers(g.workers > 0 ? g.workers : static_cast<int>(cores));

  absl::Status status;
  try {
    if (c_space->parsed()) {
      status = CmdReidSpace(g, rs);
    } else if (c_time->parsed()) {
      status = CmdReidTime(g, rt);
    } else if (c_metrics->parsed()) {
      status = CmdMetrics(g, mo);
    } else if (c_sanitize->parsed()) {
      status = CmdSanitize(g, so);
    } else if (c_sweep->parsed()) {
      status = CmdSweep(g, sw);
    } else if (c_synth->parsed()) {
      status = CmdSynth(g, sy);
    } else if (c_validate->parsed()) {
      status = CmdValidate(g, vo);
    }
  } catch (const std::exception& e) {
    status = absl::InternalError(e.what());
  }
  if (!status.ok()) {
    err << "error: " << status.message() << "\n";
    return ExitCodeFor(status);
  }
  return kExitOk;
}

inline int Run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  return Run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace trajreid::cli

#endif  // TRAJREID_CLI_COMMANDS_H_
