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

#ifndef TRAJREID_REPORT_IO_H_
#define TRAJREID_REPORT_IO_H_

// Serialization of attack and evaluation results. JSON objects keep field
// insertion order and doubles are printed in shortest round-trip form, so
// equal results always produce equal bytes.

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "trajreid/base/status.h"
#include "trajreid/catalogs.h"
#include "trajreid/density.h"
#include "trajreid/geo_align.h"
#include "trajreid/privacy_metrics.h"
#include "trajreid/synth.h"
#include "trajreid/temporal.h"
#include "trajreid/trace_store.h"
#include "trajreid/utility_eval.h"

namespace trajreid {

using Json = nlohmann::ordered_json;

inline std::string FormatDouble(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline Json CellJson(Cell c) { return Json::array({c.x, c.y}); }

inline Json OptionalJson(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

// ---------------------------------------------------------------------------
// Files

inline absl::Status WriteTextFile(const std::filesystem::path& path,
                                  std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      return absl::InternalError(absl::StrCat("cannot create directory ",
                                              path.parent_path().string(), ": ",
                                              ec.message()));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::InternalError(absl::StrCat("cannot write ", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) return absl::InternalError(absl::StrCat("write failed: ", path.string()));
  return absl::OkStatus();
}

inline absl::StatusOr<std::string> ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(2 * len);
  static constexpr char kHex[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 15]);
  }
  return hex;
}

// Collects artifacts written under one output directory and emits
// manifest.json listing each with its SHA-256 digest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  absl::Status Write(const std::string& name, std::string_view content) {
    TRAJREID_RETURN_IF_ERROR(WriteTextFile(dir_ / name, content));
    digests_[name] = {Sha256Hex(content), content.size()};
    return absl::OkStatus();
  }

  absl::Status WriteJson(const std::string& name, const Json& j) {
    return Write(name, j.dump(2) + "\n");
  }

  absl::Status Finish(std::string_view command) {
    Json artifacts = Json::array();
    for (const auto& [name, d] : digests_) {
      artifacts.push_back({{"path", name}, {"sha256", d.first}, {"bytes", d.second}});
    }
    Json manifest = {{"command", command}, {"artifacts", artifacts}};
    return WriteTextFile(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::pair<std::string, size_t>> digests_;
};

// ---------------------------------------------------------------------------
// Rasters: `x,y,density` CSV plus a JSON sidecar with name, center and cell
// size. The sidecar of "city.csv" is "city.meta.json".

inline std::filesystem::path RasterMetaPath(const std::filesystem::path& csv) {
  std::filesystem::path meta = csv;
  meta.replace_extension(".meta.json");
  return meta;
}

inline absl::StatusOr<PopulationRaster> ReadRaster(std::istream& csv,
                                                   const Json& meta) {
  PopulationRaster r;
  try {
    r.name = meta.at("name").get<std::string>();
    r.center_lat = meta.at("center_lat").get<double>();
    r.center_lon = meta.at("center_lon").get<double>();
    r.cell_size_m = meta.at("cell_size_m").get<double>();
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("raster metadata: ", e.what()));
  }
  if (!(r.cell_size_m > 0)) {
    return absl::InvalidArgumentError("raster cell_size_m must be positive");
  }
  struct Entry {
    int x, y;
    double v;
  };
  std::vector<Entry> entries;
  int width = meta.value("width", 0), height = meta.value("height", 0);
  const bool declared = width > 0 && height > 0;
  std::string line;
  int line_no = 0;
  while (std::getline(csv, line)) {
    ++line_no;
    internal::StripLineEnd(line);
    if (line.empty()) continue;
    const auto fields = internal::SplitCsv(line);
    Entry e{};
    bool ok = fields.size() == 3 && internal::ParseNumber(fields[0], e.x) &&
              internal::ParseNumber(fields[1], e.y);
    if (ok) {
      const std::string_view f = fields[2];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), e.v);
      ok = ec == std::errc() && p == f.data() + f.size();
    }
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrCat("raster line ", line_no, ": expected x,y,density"));
    }
    if (e.x < 0 || e.y < 0 || !(e.v >= 0) ||
        (declared && (e.x >= width || e.y >= height))) {
      return absl::InvalidArgumentError(
          absl::StrCat("raster line ", line_no, ": value out of range"));
    }
    entries.push_back(e);
  }
  if (!declared) {
    for (const Entry& e : entries) {
      width = std::max(width, e.x + 1);
      height = std::max(height, e.y + 1);
    }
  }
  if (width == 0) return absl::InvalidArgumentError("raster has no cells");
  r.density = DensityField(width, height);
  for (const Entry& e : entries) r.density.at(e.x, e.y) = e.v;
  return r;
}

inline absl::StatusOr<PopulationRaster> LoadRaster(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open raster ", csv.string()));
  const auto meta_path = RasterMetaPath(csv);
  TRAJREID_ASSIGN_OR_RETURN(std::string meta_text, ReadTextFile(meta_path));
  Json meta = Json::parse(meta_text, nullptr, /*allow_exceptions=*/false);
  if (meta.is_discarded()) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed raster metadata ", meta_path.string()));
  }
  auto r = ReadRaster(in, meta);
  if (!r.ok()) {
    return absl::Status(r.status().code(),
                        absl::StrCat(csv.string(), ": ", r.status().message()));
  }
  return r;
}

inline std::string RasterCsv(const PopulationRaster& r) {
  std::string out;
  for (int y = 0; y < r.density.height(); ++y) {
    for (int x = 0; x < r.density.width(); ++x) {
      absl::StrAppend(&out, x, ",", y, ",", FormatDouble(r.density.at(x, y)), "\n");
    }
  }
  return out;
}

inline Json RasterMeta(const PopulationRaster& r) {
  return {{"name", r.name},
          {"center_lat", r.center_lat},
          {"center_lon", r.center_lon},
          {"cell_size_m", r.cell_size_m},
          {"width", r.density.width()},
          {"height", r.density.height()}};
}

// ---------------------------------------------------------------------------
// Spatial results

inline Json MatchResultJson(const MatchResult& m) {
  Json scores = Json::array();
  for (const MatchScore& s : m.scores) {
    scores.push_back({{"city", s.city},
                      {"transform", TransformName(s.transform)},
                      {"correlation", OptionalJson(s.correlation)}});
  }
  return {{"best_city", m.best_city},
          {"best_transform", TransformName(m.best_transform)},
          {"best_correlation", m.best_correlation},
          {"margin", OptionalJson(m.margin)},
          {"city_margin", OptionalJson(m.city_margin)},
          {"scores", scores}};
}

inline std::string MatchResultCsv(const MatchResult& m) {
  std::string out = "city,transform,correlation\n";
  for (const MatchScore& s : m.scores) {
    absl::StrAppend(&out, s.city, ",", std::string(TransformName(s.transform)), ",",
                    s.correlation ? FormatDouble(*s.correlation) : "", "\n");
  }
  return out;
}

inline Json GeoAlignmentJson(const GeoAlignment& g) {
  return {{"center_lat", g.center.lat},
          {"center_lon", g.center.lon},
          {"correlation", g.correlation},
          {"initial_correlation", g.initial_correlation},
          {"iterations", g.iterations},
          {"evaluations", g.evaluations},
          {"step_deg", g.step_deg},
          {"trace", g.trace}};
}

// ---------------------------------------------------------------------------
// Temporal results

inline Json TemporalResultJson(const TemporalResult& t, const HolidayCalendar& cal) {
  Json candidates = Json::array();
  for (const CalendarCandidate& c : t.candidates) {
    Json matched = Json::array();
    for (const auto& [day, name] : c.matched) {
      matched.push_back({{"day", day}, {"name", name}});
    }
    candidates.push_back({{"start_date", FormatDate(c.start)},
                          {"matched_holidays", matched},
                          {"unmatched_days", c.unmatched}});
  }
  return {{"weekday_of_day0", WeekdayName(t.weekday_of_day0)},
          {"holiday_days", t.holiday_days},
          {"calendar", cal.country()},
          {"unique", t.unique},
          {"candidates", candidates}};
}

// One row per day: index, class, inferred weekday.
inline std::string DayClassCsv(const DayClassification& c,
                               std::optional<Weekday> day0) {
  std::string out = "day,class,weekday\n";
  for (size_t i = 0; i < c.days.size(); ++i) {
    absl::StrAppend(&out, c.days[i], ",", std::string(1, static_cast<char>(c.labels[i])),
                    ",",
                    day0 ? std::string(WeekdayName(WeekdayOfDay(*day0, c.days[i]))) : "",
                    "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Risk reports

inline RiskReport ToRiskReport(const KAnonymityResult& r, uint64_t seed) {
  RiskReport out{"k-anonymity", seed, {}, {}};
  out.notes.emplace_back("trials", absl::StrCat(r.trials));
  out.notes.emplace_back("excluded_users", absl::StrCat(r.excluded_users));
  for (const KAnonymityCell& c : r.cells) {
    RiskRow row;
    row.params = {{"m", c.m}, {"delta", c.delta}};
    for (size_t i = 0; i < r.thresholds.size(); ++i) {
      row.values.emplace_back(absl::StrCat("p_k_le_", r.thresholds[i]), c.risk[i]);
    }
    double mean = 0;
    for (int k : c.k_values) mean += k;
    row.values.emplace_back("mean_k", c.k_values.empty() ? 0 : mean / c.k_values.size());
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline RiskReport ToRiskReport(const UnicityResult& r, uint64_t seed) {
  RiskReport out{"unicity", seed, {}, {}};
  out.notes.emplace_back("trials", absl::StrCat(r.trials));
  out.notes.emplace_back("excluded_users", absl::StrCat(r.excluded_users));
  for (size_t i = 0; i < r.ms.size(); ++i) {
    out.rows.push_back({{{"m", r.ms[i]}}, {{"unicity", r.unicity[i]}}});
  }
  return out;
}

inline RiskReport ToRiskReport(const AnchorUniquenessResult& r) {
  RiskReport out{"anchor-uniqueness", std::nullopt, {}, {}};
  out.notes.emplace_back("users", absl::StrCat(r.users.size()));
  out.notes.emplace_back("excluded_users", absl::StrCat(r.excluded_users));
  out.notes.emplace_back("ua_hw", FormatDouble(r.ua_hw));
  for (size_t rr = 0; rr < r.unique_by_r.size(); ++rr) {
    out.rows.push_back({{{"r", static_cast<double>(rr)}},
                        {{"p_unique", r.unique_by_r[rr]}}});
  }
  return out;
}

inline RiskReport ToRiskReport(const std::vector<SeclusionResult>& rs) {
  RiskReport out{"seclusion", std::nullopt, {}, {}};
  for (const SeclusionResult& r : rs) {
    double mean = 0;
    for (double e : r.exposure) mean += e;
    const double n = static_cast<double>(r.exposure.size());
    out.rows.push_back({{{"kappa", r.kappa}},
                        {{"mean_exposure", n > 0 ? mean / n : 0.0},
                         {"exposed_fraction", n > 0 ? r.exposed_users / n : 0.0}}});
  }
  return out;
}

inline RiskReport ToRiskReport(const std::vector<SensitiveUniquenessResult>& rs) {
  RiskReport out{"sensitive-uniqueness", std::nullopt, {}, {}};
  for (const SensitiveUniquenessResult& r : rs) {
    RiskRow row{{{"q", r.q}},
                {{"eligible_users", r.eligible_users},
                 {"unique_users", r.unique_users}}};
    // A missing probability means "not applicable" and becomes NaN -> null.
    row.values.emplace_back("p_unique",
                            r.probability.value_or(std::numeric_limits<double>::quiet_NaN()));
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline Json RiskReportJson(const RiskReport& r) {
  Json notes = Json::object();
  for (const auto& [k, v] : r.notes) notes[k] = v;
  Json rows = Json::array();
  for (const RiskRow& row : r.rows) {
    Json params = Json::object(), values = Json::object();
    for (const auto& [k, v] : row.params) params[k] = v;
    for (const auto& [k, v] : row.values) {
      values[k] = std::isnan(v) ? Json(nullptr) : Json(v);
    }
    rows.push_back({{"params", params}, {"values", values}});
  }
  return {{"metric", r.metric},
          {"seed", r.seed ? Json(*r.seed) : Json(nullptr)},
          {"notes", notes},
          {"rows", rows}};
}

inline std::string RiskReportCsv(const RiskReport& r) {
  std::string out;
  if (r.rows.empty()) return out;
  std::vector<std::string> header;
  for (const auto& [k, v] : r.rows.front().params) header.push_back(k);
  for (const auto& [k, v] : r.rows.front().values) header.push_back(k);
  out = absl::StrJoin(header, ",") + "\n";
  for (const RiskRow& row : r.rows) {
    std::vector<std::string> cells;
    for (const auto& [k, v] : row.params) cells.push_back(FormatDouble(v));
    for (const auto& [k, v] : row.values) {
      cells.push_back(std::isnan(v) ? "" : FormatDouble(v));
    }
    absl::StrAppend(&out, absl::StrJoin(cells, ","), "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Utility reports. CSV columns, in order:
//   parameter, row_seed, error, reid_rate, reid_rate_within_one,
//   compared_users, dropped_users, home_error_median, work_error_median,
//   home_error_p90, work_error_p90, mean_kl, kl_slots, kl_smoothing,
//   clustered_correlation, match_city, match_transform, match_margin,
//   clamped_points

inline constexpr std::string_view kUtilityCsvHeader =
    "parameter,row_seed,error,reid_rate,reid_rate_within_one,compared_users,"
    "dropped_users,home_error_median,work_error_median,home_error_p90,"
    "work_error_p90,mean_kl,kl_slots,kl_smoothing,clustered_correlation,"
    "match_city,match_transform,match_margin,clamped_points";

// Nearest-rank percentile of sorted values.
inline double SortedPercentile(const std::vector<double>& sorted, double pct) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const size_t rank = static_cast<size_t>(std::ceil(pct / 100.0 * sorted.size()));
  return sorted[std::clamp<size_t>(rank, 1, sorted.size()) - 1];
}

inline std::string UtilityReportCsv(const UtilityReport& r) {
  std::string out = std::string(kUtilityCsvHeader) + "\n";
  auto num = [](double v) { return std::isnan(v) ? std::string() : FormatDouble(v); };
  for (const UtilityRow& row : r.rows) {
    std::vector<std::string> c;
    c.push_back(FormatDouble(row.parameter));
    c.push_back(absl::StrCat(row.row_seed));
    std::string err = row.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    c.push_back(err);
    if (row.anchors) {
      const AnchorReidResult& a = *row.anchors;
      c.insert(c.end(), {num(a.rate), num(a.rate_within_one),
                         absl::StrCat(a.compared_users), absl::StrCat(a.dropped_users),
                         num(SortedPercentile(a.home_errors, 50)),
                         num(SortedPercentile(a.work_errors, 50)),
                         num(SortedPercentile(a.home_errors, 90)),
                         num(SortedPercentile(a.work_errors, 90))});
    } else {
      c.insert(c.end(), 8, "");
    }
    if (row.kl) {
      c.insert(c.end(), {num(row.kl->mean_kl), absl::StrCat(row.kl->slots),
                         FormatDouble(kKlSmoothing)});
    } else {
      c.insert(c.end(), 3, "");
    }
    c.push_back(row.clustered_correlation ? num(*row.clustered_correlation) : "");
    if (row.match) {
      c.push_back(row.match->best_city);
      c.push_back(std::string(TransformName(row.match->best_transform)));
      c.push_back(row.match->margin ? num(*row.match->margin) : "");
    } else {
      c.insert(c.end(), 3, "");
    }
    c.push_back(absl::StrCat(row.clamped_points));
    absl::StrAppend(&out, absl::StrJoin(c, ","), "\n");
  }
  return out;
}

inline Json UtilityReportJson(const UtilityReport& r) {
  Json rows = Json::array();
  for (const UtilityRow& row : r.rows) {
    Json j = {{"parameter", row.parameter},
              {"row_seed", row.row_seed},
              {"error", row.error ? Json(*row.error) : Json(nullptr)}};
    if (row.anchors) {
      const AnchorReidResult& a = *row.anchors;
      j["anchors"] = {{"rate", a.rate},
                      {"rate_within_one", a.rate_within_one},
                      {"compared_users", a.compared_users},
                      {"dropped_users", a.dropped_users},
                      {"home_errors", a.home_errors},
                      {"work_errors", a.work_errors}};
    }
    if (row.kl) {
      j["kl"] = {{"mean_kl", row.kl->mean_kl},
                 {"slots", row.kl->slots},
                 {"smoothing", kKlSmoothing}};
    }
    if (row.clustered_correlation) {
      j["clustered_correlation"] = *row.clustered_correlation;
    }
    if (row.match) j["match"] = MatchResultJson(*row.match);
    j["clamped_points"] = row.clamped_points;
    rows.push_back(std::move(j));
  }
  return {{"mechanism", MechanismName(r.mechanism)}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Synthetic ground truth

inline Json GroundTruthJson(const GroundTruth& g) {
  Json users = Json::array();
  for (size_t i = 0; i < g.users.size(); ++i) {
    users.push_back({{"user", g.users[i]},
                     {"home", CellJson(g.homes[i])},
                     {"work", CellJson(g.works[i])},
                     {"commuter", static_cast<bool>(g.commuters[i])}});
  }
  Json spikes = Json::array();
  for (size_t i = 0; i < g.spike_cells.size(); ++i) {
    spikes.push_back({{"cell", CellJson(g.spike_cells[i])}, {"days", g.spike_days[i]}});
  }
  return {{"template_id", g.template_id},
          {"template_name", g.template_name},
          {"obfuscation_transform", TransformName(g.obfuscation)},
          {"recovery_transform", TransformName(g.recovery)},
          {"start_date", FormatDate(g.start_date)},
          {"weekday_of_day0", WeekdayName(g.weekday_of_day0)},
          {"holiday_days", g.holiday_days},
          {"spikes", spikes},
          {"users", users}};
}

}  // namespace trajreid

#endif  // TRAJREID_REPORT_IO_H_
