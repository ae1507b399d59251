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

#ifndef TRAJREID_TRACE_STORE_H_
#define TRAJREID_TRACE_STORE_H_

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/status.h"

namespace trajreid {

inline constexpr int kBinsPerDay = 48;
inline constexpr int kDefaultDayCount = 75;
inline constexpr int kDefaultGridSide = 200;
inline constexpr double kDefaultCellSizeMeters = 500.0;

struct Cell {
  int32_t x = 0;
  int32_t y = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline std::string CellToString(Cell c) {
  return absl::StrCat("(", c.x, ",", c.y, ")");
}

struct GridSpec {
  int width = kDefaultGridSide;
  int height = kDefaultGridSide;
  double cell_size_m = kDefaultCellSizeMeters;
  // Unknown until spatial re-identification assigns them.
  std::optional<double> origin_lat;
  std::optional<double> origin_lon;

  int CellCount() const { return width * height; }
  bool Contains(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
  }
  // Row-major index. Also the fixed cell <-> symbol mapping used by GRR.
  int Index(Cell c) const { return c.y * width + c.x; }
  Cell CellAt(int index) const { return {index % width, index / width}; }

  absl::Status Validate() const {
    if (width < 1 || height < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("grid dimensions must be >= 1, got ", width, "x",
                       height));
    }
    if (!(cell_size_m > 0)) {
      return absl::InvalidArgumentError("cell_size_m must be positive");
    }
    return absl::OkStatus();
  }
};

struct Sample {
  int32_t day = 0;
  int32_t bin = 0;
  Cell cell;

  friend bool operator==(const Sample&, const Sample&) = default;
};

using UserId = int64_t;

struct Trajectory {
  UserId user = 0;
  // Sorted by (day, bin); at most one sample per (day, bin).
  std::vector<Sample> samples;
};

// Immutable corpus of grid trajectories plus the cell -> users inverted
// index. Users are kept sorted by id; "user index" below always refers to
// the position in trajectories().
class TraceSet {
 public:
  TraceSet() = default;

  // Validates and canonicalizes (sorts users by id, samples by (day, bin)).
  static absl::StatusOr<TraceSet> Create(GridSpec grid, int day_count,
                                         std::vector<Trajectory> trajectories) {
    TRAJREID_RETURN_IF_ERROR(grid.Validate());
    if (day_count < 1) {
      return absl::InvalidArgumentError("day_count must be >= 1");
    }
    std::sort(trajectories.begin(), trajectories.end(),
              [](const Trajectory& a, const Trajectory& b) {
                return a.user < b.user;
              });
    for (size_t i = 0; i < trajectories.size(); ++i) {
      Trajectory& t = trajectories[i];
      if (i > 0 && trajectories[i - 1].user == t.user) {
        return absl::InvalidArgumentError(
            absl::StrCat("duplicate user id ", t.user));
      }
      if (t.samples.empty()) {
        return absl::InvalidArgumentError(
            absl::StrCat("user ", t.user, " has no samples"));
      }
      std::stable_sort(t.samples.begin(), t.samples.end(),
                       [](const Sample& a, const Sample& b) {
                         return std::tie(a.day, a.bin) <
                                std::tie(b.day, b.bin);
                       });
      for (size_t j = 0; j < t.samples.size(); ++j) {
        const Sample& s = t.samples[j];
        if (s.day < 0 || s.day >= day_count || s.bin < 0 ||
            s.bin >= kBinsPerDay || !grid.Contains(s.cell)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "user ", t.user, ": sample out of range (day=", s.day,
              ", bin=", s.bin, ", cell=", CellToString(s.cell), ")"));
        }
        if (j > 0 && t.samples[j - 1].day == s.day &&
            t.samples[j - 1].bin == s.bin) {
          return absl::InvalidArgumentError(
              absl::StrCat("user ", t.user, ": duplicate sample at day ",
                           s.day, " bin ", s.bin));
        }
      }
    }
    TraceSet ts;
    ts.grid_ = std::move(grid);
    ts.day_count_ = day_count;
    ts.trajectories_ = std::move(trajectories);
    ts.BuildIndex();
    return ts;
  }

  const GridSpec& grid() const { return grid_; }
  int day_count() const { return day_count_; }
  std::span<const Trajectory> trajectories() const { return trajectories_; }
  size_t user_count() const { return trajectories_.size(); }
  size_t sample_count() const { return sample_count_; }

  std::optional<size_t> FindUser(UserId user) const {
    auto it = std::lower_bound(
        trajectories_.begin(), trajectories_.end(), user,
        [](const Trajectory& t, UserId u) { return t.user < u; });
    if (it == trajectories_.end() || it->user != user) return std::nullopt;
    return static_cast<size_t>(it - trajectories_.begin());
  }

  // Sorted user indices that ever visited the cell; this is U(cell).
  std::span<const int32_t> UsersAt(Cell c) const {
    return visitors_[static_cast<size_t>(grid_.Index(c))];
  }
  std::span<const int32_t> UsersAtIndex(int cell_index) const {
    return visitors_[static_cast<size_t>(cell_index)];
  }
  // Total samples recorded in the cell (all users, all times).
  int64_t SamplesAtIndex(int cell_index) const {
    return cell_samples_[static_cast<size_t>(cell_index)];
  }

  absl::StatusOr<int> UniqueVisitors(Cell c) const {
    if (!grid_.Contains(c)) {
      return absl::InvalidArgumentError(
          absl::StrCat("cell ", CellToString(c), " outside grid"));
    }
    return static_cast<int>(UsersAt(c).size());
  }

 private:
  void BuildIndex() {
    const size_t k = static_cast<size_t>(grid_.CellCount());
    visitors_.assign(k, {});
    cell_samples_.assign(k, 0);
    sample_count_ = 0;
    for (size_t u = 0; u < trajectories_.size(); ++u) {
      for (const Sample& s : trajectories_[u].samples) {
        const size_t idx = static_cast<size_t>(grid_.Index(s.cell));
        ++cell_samples_[idx];
        auto& users = visitors_[idx];
        // Users are visited in increasing order, so a back() check dedups.
        if (users.empty() || users.back() != static_cast<int32_t>(u)) {
          users.push_back(static_cast<int32_t>(u));
        }
      }
      sample_count_ += trajectories_[u].samples.size();
    }
  }

  GridSpec grid_;
  int day_count_ = kDefaultDayCount;
  std::vector<Trajectory> trajectories_;
  std::vector<std::vector<int32_t>> visitors_;
  std::vector<int64_t> cell_samples_;
  size_t sample_count_ = 0;
};

namespace internal {

// Splits a line on commas into at most `max_fields` views.
inline std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
bool ParseNumber(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::string_view StripLineEnd(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace internal

// Reads headerless `uid,d,t,x,y` rows. Errors carry the 1-based line number.
inline absl::StatusOr<TraceSet> ReadTraceSet(std::istream& in, GridSpec grid,
                                             int day_count = kDefaultDayCount) {
  TRAJREID_RETURN_IF_ERROR(grid.Validate());
  std::vector<Trajectory> trajectories;
  UserId last_user = 0;
  size_t last_slot = 0;
  bool have_last = false;
  std::string line;
  int64_t line_no = 0;
  // Input is usually grouped by user, so the last-user cache short-circuits
  // almost every lookup.
  std::unordered_map<UserId, size_t> slots;
  auto find_slot = [&](UserId uid) -> size_t {
    if (have_last && uid == last_user) return last_slot;
    auto [it, inserted] = slots.try_emplace(uid, trajectories.size());
    if (inserted) trajectories.push_back(Trajectory{uid, {}});
    last_user = uid;
    last_slot = it->second;
    have_last = true;
    return last_slot;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = internal::StripLineEnd(line);
    if (view.empty()) continue;
    const auto fields = internal::SplitCsv(view);
    UserId uid = 0;
    int32_t d = 0, t = 0, x = 0, y = 0;
    if (fields.size() != 5 || !internal::ParseNumber(fields[0], uid) ||
        !internal::ParseNumber(fields[1], d) ||
        !internal::ParseNumber(fields[2], t) ||
        !internal::ParseNumber(fields[3], x) ||
        !internal::ParseNumber(fields[4], y)) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": malformed row '", std::string(view),
                       "' (expected uid,d,t,x,y integers)"));
    }
    if (d < 0 || d >= day_count) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": day ", d, " outside [0,", day_count, ")"));
    }
    if (t < 0 || t >= kBinsPerDay) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": bin ", t, " outside [0,", kBinsPerDay, ")"));
    }
    if (!grid.Contains({x, y})) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": cell (", x, ",", y, ") outside ", grid.width,
          "x", grid.height, " grid"));
    }
    trajectories[find_slot(uid)].samples.push_back(Sample{d, t, {x, y}});
  }
  if (in.bad()) return absl::DataLossError("read error");
  // Duplicate detection with row-level context happens here, before Create
  // re-validates.
  for (Trajectory& tr : trajectories) {
    std::stable_sort(tr.samples.begin(), tr.samples.end(),
                     [](const Sample& a, const Sample& b) {
                       return std::tie(a.day, a.bin) < std::tie(b.day, b.bin);
                     });
    for (size_t j = 1; j < tr.samples.size(); ++j) {
      if (tr.samples[j].day == tr.samples[j - 1].day &&
          tr.samples[j].bin == tr.samples[j - 1].bin) {
        return absl::InvalidArgumentError(absl::StrCat(
            "duplicate sample for user ", tr.user, " at day ",
            tr.samples[j].day, " bin ", tr.samples[j].bin));
      }
    }
  }
  return TraceSet::Create(std::move(grid), day_count, std::move(trajectories));
}

inline absl::StatusOr<TraceSet> LoadTraceSet(const std::string& path,
                                             GridSpec grid,
                                             int day_count = kDefaultDayCount) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  auto ts = ReadTraceSet(in, std::move(grid), day_count);
  if (!ts.ok()) {
    return absl::Status(ts.status().code(),
                        absl::StrCat(path, ": ", ts.status().message()));
  }
  return ts;
}

// Canonical output: users ascending, samples by (day, bin), LF endings.
inline void WriteTraceSet(const TraceSet& ts, std::ostream& out) {
  std::string buf;
  for (const Trajectory& t : ts.trajectories()) {
    for (const Sample& s : t.samples) {
      buf.clear();
      absl::StrAppend(&buf, t.user, ",", s.day, ",", s.bin, ",", s.cell.x, ",",
                      s.cell.y, "\n");
      out << buf;
    }
  }
}

inline absl::Status SaveTraceSet(const TraceSet& ts, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  WriteTraceSet(ts, out);
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

}  // namespace trajreid

#endif  // TRAJREID_TRACE_STORE_H_
