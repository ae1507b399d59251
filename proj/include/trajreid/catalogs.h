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

#ifndef TRAJREID_CATALOGS_H_
#define TRAJREID_CATALOGS_H_

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/status.h"
#include "trajreid/bundled_holidays.h"
#include "trajreid/trace_store.h"

namespace trajreid {

using Date = std::chrono::sys_days;

inline absl::StatusOr<Date> ParseDate(std::string_view s) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
      !internal::ParseNumber(s.substr(0, 4), y) ||
      !internal::ParseNumber(s.substr(5, 2), m) ||
      !internal::ParseNumber(s.substr(8, 2), d)) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad date '", std::string(s), "' (expected YYYY-MM-DD)"));
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) {
    return absl::InvalidArgumentError(absl::StrCat("invalid date '", std::string(s), "'"));
  }
  return Date{ymd};
}

inline std::string FormatDate(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

class HolidayCalendar {
 public:
  HolidayCalendar() = default;
  explicit HolidayCalendar(std::string country) : country_(std::move(country)) {}

  const std::string& country() const { return country_; }
  const std::map<Date, std::string>& holidays() const { return holidays_; }
  bool empty() const { return holidays_.empty(); }

  bool IsHoliday(Date d) const { return holidays_.contains(d); }
  std::string_view NameOf(Date d) const {
    auto it = holidays_.find(d);
    return it == holidays_.end() ? std::string_view{} : it->second;
  }

  absl::Status Add(Date d, std::string name) {
    if (!holidays_.emplace(d, std::move(name)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate holiday date ", FormatDate(d)));
    }
    return absl::OkStatus();
  }

  // Holidays within [first, last], inclusive.
  std::vector<Date> Between(Date first, Date last) const {
    std::vector<Date> out;
    for (auto it = holidays_.lower_bound(first);
         it != holidays_.end() && it->first <= last; ++it) {
      out.push_back(it->first);
    }
    return out;
  }

 private:
  std::string country_;
  std::map<Date, std::string> holidays_;
};

// `YYYY-MM-DD,name` rows. The name may itself contain commas.
inline absl::StatusOr<HolidayCalendar> ReadHolidays(std::istream& in,
                                                    std::string country) {
  HolidayCalendar cal(std::move(country));
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = internal::StripLineEnd(line);
    if (view.empty()) continue;
    const size_t comma = view.find(',');
    if (comma == std::string_view::npos || comma + 1 >= view.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected 'YYYY-MM-DD,name'"));
    }
    auto date = ParseDate(view.substr(0, comma));
    if (!date.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", date.status().message()));
    }
    auto st = cal.Add(*date, std::string(view.substr(comma + 1)));
    if (!st.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", st.message()));
    }
  }
  return cal;
}

inline absl::StatusOr<HolidayCalendar> LoadHolidays(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ReadHolidays(in, path);
}

inline const HolidayCalendar& BundledJapaneseHolidays() {
  static const HolidayCalendar* cal = [] {
    std::istringstream in{std::string(kBundledJapaneseHolidaysCsv)};
    return new HolidayCalendar(*ReadHolidays(in, "JP"));
  }();
  return *cal;
}

// Case-insensitive substrings that mark a POI category as sensitive.
inline const std::vector<std::string>& DefaultSensitiveKeywords() {
  static const std::vector<std::string> kKeywords = {
      "Hospital", "Clinic",    "Medical",   "Pharmacy", "Relig",
      "Church",   "Mosque",    "Temple",    "Shrine",   "Nightclub",
      "Addiction", "Rehab",    "Counsel",   "Therapy",  "Politic",
      "Party",    "Campaign",  "Adult",     "Strip"};
  return kKeywords;
}

struct PoiEntry {
  Cell cell;
  std::string category;
};

class PoiCatalog {
 public:
  PoiCatalog() : keywords_(DefaultSensitiveKeywords()) {}

  const std::vector<PoiEntry>& entries() const { return entries_; }
  const std::vector<std::string>& keywords() const { return keywords_; }
  void set_keywords(std::vector<std::string> keywords) {
    keywords_ = std::move(keywords);
  }
  void Add(PoiEntry entry) { entries_.push_back(std::move(entry)); }

  bool IsSensitiveCategory(std::string_view category) const {
    auto lower = [](std::string_view s) {
      std::string out(s);
      std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
      });
      return out;
    };
    const std::string cat = lower(category);
    return std::any_of(keywords_.begin(), keywords_.end(),
                       [&](const std::string& k) {
                         return cat.find(lower(k)) != std::string::npos;
                       });
  }

  // The sensitive cell set, sorted and deduplicated.
  std::vector<Cell> SensitiveCells() const {
    std::set<Cell> cells;
    for (const PoiEntry& e : entries_) {
      if (IsSensitiveCategory(e.category)) cells.insert(e.cell);
    }
    return {cells.begin(), cells.end()};
  }

 private:
  std::vector<PoiEntry> entries_;
  std::vector<std::string> keywords_;
};

// `x,y,category` rows; cells must lie inside `grid`.
inline absl::StatusOr<PoiCatalog> ReadPois(std::istream& in,
                                           const GridSpec& grid) {
  PoiCatalog catalog;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = internal::StripLineEnd(line);
    if (view.empty()) continue;
    const size_t c1 = view.find(',');
    const size_t c2 =
        c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    Cell cell;
    if (c2 == std::string_view::npos ||
        !internal::ParseNumber(view.substr(0, c1), cell.x) ||
        !internal::ParseNumber(view.substr(c1 + 1, c2 - c1 - 1), cell.y)) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected 'x,y,category'"));
    }
    if (!grid.Contains(cell)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": cell ", CellToString(cell), " outside grid"));
    }
    catalog.Add({cell, std::string(view.substr(c2 + 1))});
  }
  return catalog;
}

inline absl::StatusOr<PoiCatalog> LoadPois(const std::string& path,
                                           const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ReadPois(in, grid);
}

}  // namespace trajreid

#endif  // TRAJREID_CATALOGS_H_
