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

#ifndef TRAJREID_PRIVACY_METRICS_H_
#define TRAJREID_PRIVACY_METRICS_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
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
#include "trajreid/trace_store.h"

namespace trajreid {

// "The user was in `cell` at some bin in [bin_lo, bin_hi]" on `day`, or on
// any day when `day` is absent.
struct Constraint {
  Cell cell;
  std::optional<int> day;
  int bin_lo = 0;
  int bin_hi = kBinsPerDay - 1;
};

struct QuerySpec {
  std::vector<Constraint> constraints;
};

inline absl::Status ValidateQuery(const TraceSet& ts, const QuerySpec& q) {
  if (q.constraints.empty()) {
    return absl::InvalidArgumentError("query needs at least one constraint");
  }
  for (const Constraint& c : q.constraints) {
    if (!ts.grid().Contains(c.cell)) {
      return absl::InvalidArgumentError(
          absl::StrCat("constraint cell ", CellToString(c.cell), " outside grid"));
    }
    if (c.bin_lo < 0 || c.bin_hi >= kBinsPerDay || c.bin_lo > c.bin_hi) {
      return absl::InvalidArgumentError(absl::StrCat(
          "bad time window [", c.bin_lo, ",", c.bin_hi, "]"));
    }
    if (c.day && (*c.day < 0 || *c.day >= ts.day_count())) {
      return absl::InvalidArgumentError(
          absl::StrCat("constraint day ", *c.day, " out of range"));
    }
  }
  return absl::OkStatus();
}

namespace internal {

inline bool Witnesses(std::span<const Sample> samples, const Constraint& c) {
  if (c.day) {
    auto it = std::lower_bound(
        samples.begin(), samples.end(), std::make_pair(*c.day, c.bin_lo),
        [](const Sample& s, const std::pair<int, int>& key) {
          return std::make_pair(s.day, s.bin) < key;
        });
    for (; it != samples.end() && it->day == *c.day && it->bin <= c.bin_hi;
         ++it) {
      if (it->cell == c.cell) return true;
    }
    return false;
  }
  return std::any_of(samples.begin(), samples.end(), [&](const Sample& s) {
    return s.cell == c.cell && s.bin >= c.bin_lo && s.bin <= c.bin_hi;
  });
}

inline bool HasPoint(std::span<const Sample> samples, const Sample& p) {
  auto it = std::lower_bound(samples.begin(), samples.end(), p,
                             [](const Sample& a, const Sample& b) {
                               return std::tie(a.day, a.bin) < std::tie(b.day, b.bin);
                             });
  return it != samples.end() && it->day == p.day && it->bin == p.bin &&
         it->cell == p.cell;
}

}  // namespace internal

// Cand(Q): sorted indices of users witnessing every constraint.
inline absl::StatusOr<std::vector<int32_t>> CandidateSet(const TraceSet& ts,
                                                         const QuerySpec& q) {
  TRAJREID_RETURN_IF_ERROR(ValidateQuery(ts, q));
  // Start from the rarest cell's visitor list.
  const Constraint* seed = &q.constraints[0];
  for (const Constraint& c : q.constraints) {
    if (ts.UsersAt(c.cell).size() < ts.UsersAt(seed->cell).size()) seed = &c;
  }
  std::vector<int32_t> out;
  const auto trajs = ts.trajectories();
  for (int32_t u : ts.UsersAt(seed->cell)) {
    const auto& samples = trajs[u].samples;
    if (std::all_of(q.constraints.begin(), q.constraints.end(),
                    [&](const Constraint& c) {
                      return internal::Witnesses(samples, c);
                    })) {
      out.push_back(u);
    }
  }
  return out;
}

// M(P): number of users whose point set contains every point of P.
inline int MatchCount(const TraceSet& ts, std::span<const Sample> points) {
  if (points.empty()) return static_cast<int>(ts.user_count());
  const Sample* rarest = &points[0];
  for (const Sample& p : points) {
    if (ts.UsersAt(p.cell).size() < ts.UsersAt(rarest->cell).size()) rarest = &p;
  }
  int count = 0;
  const auto trajs = ts.trajectories();
  for (int32_t u : ts.UsersAt(rarest->cell)) {
    const auto& samples = trajs[u].samples;
    if (std::all_of(points.begin(), points.end(), [&](const Sample& p) {
          return internal::HasPoint(samples, p);
        })) {
      ++count;
    }
  }
  return count;
}

// One sampled adversary observation: a user and an ordered draw of their
// distinct points. The m-point query of a trial is the length-m prefix, so
// curves over m are nested.
struct PointDraw {
  int32_t user = 0;
  std::vector<Sample> points;
};

struct PointDraws {
  std::vector<PointDraw> draws;
  int eligible_users = 0;
  int excluded_users = 0;  // fewer than max_m distinct points
};

// Trial t uses its own stream derived from (seed, t); users are drawn
// uniformly among those with at least max_m points.
inline absl::StatusOr<PointDraws> SamplePointDraws(const TraceSet& ts,
                                                   int max_m, int trials,
                                                   uint64_t seed) {
  if (max_m < 1) return absl::InvalidArgumentError("m must be >= 1");
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  std::vector<int32_t> eligible;
  const auto trajs = ts.trajectories();
  for (size_t u = 0; u < trajs.size(); ++u) {
    if (trajs[u].samples.size() >= static_cast<size_t>(max_m)) {
      eligible.push_back(static_cast<int32_t>(u));
    }
  }
  PointDraws out;
  out.eligible_users = static_cast<int>(eligible.size());
  out.excluded_users = static_cast<int>(trajs.size() - eligible.size());
  if (eligible.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("no user has ", max_m, " distinct points"));
  }
  out.draws.resize(static_cast<size_t>(trials));
  ParallelFor(out.draws.size(), [&](size_t t) {
    Rng rng(DeriveSeed(seed, t));
    PointDraw& d = out.draws[t];
    d.user = eligible[rng.UniformInt(eligible.size())];
    const auto& samples = trajs[d.user].samples;
    // Partial Fisher-Yates over sample positions.
    std::vector<uint32_t> pos(samples.size());
    for (size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<uint32_t>(i);
    for (int i = 0; i < max_m; ++i) {
      const size_t j = i + rng.UniformInt(pos.size() - i);
      std::swap(pos[i], pos[j]);
      d.points.push_back(samples[pos[i]]);
    }
  });
  return out;
}

// Constraint windows [bin - delta, bin + delta] clipped to the day.
inline QuerySpec QueryFromPoints(std::span<const Sample> points, int delta) {
  QuerySpec q;
  for (const Sample& p : points) {
    q.constraints.push_back(Constraint{p.cell, p.day, std::max(0, p.bin - delta),
                                       std::min(kBinsPerDay - 1, p.bin + delta)});
  }
  return q;
}

inline const std::vector<int>& DefaultKThresholds() {
  static const std::vector<int> k = {1, 2, 5, 10};
  return k;
}
inline const std::vector<int>& DefaultDeltaGrid() {
  static const std::vector<int> d = {0, 1, 2, 4};
  return d;
}

// Generic report row: parameter columns then value columns, in insertion
// order.
struct RiskRow {
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::pair<std::string, double>> values;
};

struct RiskReport {
  std::string metric;
  std::optional<uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<RiskRow> rows;
};

struct KAnonymityCell {
  int m = 0;
  int delta = 0;
  std::vector<int> k_values;  // per trial
  std::vector<double> risk;   // Pr[k(Q) <= k] per threshold
};

struct KAnonymityResult {
  std::vector<int> thresholds;
  std::vector<KAnonymityCell> cells;  // m-major, then delta
  int trials = 0;
  int excluded_users = 0;
};

inline absl::StatusOr<KAnonymityResult> KAnonymityRisk(
    const TraceSet& ts, const std::vector<int>& ms,
    const std::vector<int>& deltas, int trials, uint64_t seed,
    const std::vector<int>& thresholds = DefaultKThresholds()) {
  if (ms.empty() || deltas.empty()) {
    return absl::InvalidArgumentError("empty m or delta grid");
  }
  for (int d : deltas) {
    if (d < 0) return absl::InvalidArgumentError("delta must be >= 0");
  }
  const int max_m = *std::max_element(ms.begin(), ms.end());
  if (*std::min_element(ms.begin(), ms.end()) < 1) {
    return absl::InvalidArgumentError("m must be >= 1");
  }
  TRAJREID_ASSIGN_OR_RETURN(PointDraws draws,
                            SamplePointDraws(ts, max_m, trials, seed));
  KAnonymityResult out;
  out.thresholds = thresholds;
  out.trials = trials;
  out.excluded_users = draws.excluded_users;
  for (int m : ms) {
    for (int delta : deltas) {
      KAnonymityCell cell{m, delta, std::vector<int>(trials, 0), {}};
      std::vector<absl::Status> errors(trials);
      ParallelFor(static_cast<size_t>(trials), [&](size_t t) {
        const auto& pts = draws.draws[t].points;
        auto cand = CandidateSet(
            ts, QueryFromPoints(std::span(pts).first(m), delta));
        if (cand.ok()) {
          cell.k_values[t] = static_cast<int>(cand->size());
        } else {
          errors[t] = cand.status();
        }
      });
      for (const auto& e : errors) TRAJREID_RETURN_IF_ERROR(e);
      for (int k : thresholds) {
        const auto hits = std::count_if(cell.k_values.begin(), cell.k_values.end(),
                                        [k](int v) { return v <= k; });
        cell.risk.push_back(static_cast<double>(hits) / trials);
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

struct UnicityResult {
  std::vector<int> ms;
  std::vector<double> unicity;              // U(m), parallel to ms
  std::vector<std::vector<int>> match_counts;  // [m index][trial]
  int trials = 0;
  int excluded_users = 0;
};

// U(m) over nested draws: the m-point set of a trial is a prefix of its
// (m+1)-point set.
inline absl::StatusOr<UnicityResult> Unicity(const TraceSet& ts,
                                             const std::vector<int>& ms,
                                             int trials, uint64_t seed) {
  if (ms.empty()) return absl::InvalidArgumentError("empty m grid");
  if (*std::min_element(ms.begin(), ms.end()) < 1) {
    return absl::InvalidArgumentError("m must be >= 1");
  }
  const int max_m = *std::max_element(ms.begin(), ms.end());
  TRAJREID_ASSIGN_OR_RETURN(PointDraws draws,
                            SamplePointDraws(ts, max_m, trials, seed));
  UnicityResult out;
  out.ms = ms;
  out.trials = trials;
  out.excluded_users = draws.excluded_users;
  for (int m : ms) {
    std::vector<int> counts(trials);
    ParallelFor(static_cast<size_t>(trials), [&](size_t t) {
      counts[t] = MatchCount(ts, std::span(draws.draws[t].points).first(m));
    });
    const auto unique = std::count(counts.begin(), counts.end(), 1);
    out.unicity.push_back(static_cast<double>(unique) / trials);
    out.match_counts.push_back(std::move(counts));
  }
  return out;
}

// Home mask [22:00, 06:00) and work mask [09:00, 17:00) in half-hour bins.
inline constexpr bool InHomeMask(int bin) { return bin >= 44 || bin < 12; }
inline constexpr bool InWorkMask(int bin) { return bin >= 18 && bin < 34; }

struct AnchorSignature {
  std::optional<Cell> home;
  std::optional<Cell> work;
  std::vector<Cell> extras;  // descending visit count, ties by (x, y)

  bool complete() const { return home.has_value() && work.has_value(); }
  friend auto operator<=>(const AnchorSignature&, const AnchorSignature&) = default;
};

namespace internal {

// Cells ordered by descending count, ties by (x, y).
inline std::vector<std::pair<Cell, int>> RankCells(std::map<Cell, int> counts) {
  std::vector<std::pair<Cell, int>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return v;
}

inline AnchorSignature AnchorsOf(std::span<const Sample> samples, int r) {
  std::map<Cell, int> home, work, all;
  for (const Sample& s : samples) {
    ++all[s.cell];
    if (InHomeMask(s.bin)) ++home[s.cell];
    if (InWorkMask(s.bin)) ++work[s.cell];
  }
  AnchorSignature sig;
  if (!home.empty()) sig.home = RankCells(std::move(home)).front().first;
  if (!work.empty()) sig.work = RankCells(std::move(work)).front().first;
  for (const auto& [cell, n] : RankCells(std::move(all))) {
    if (static_cast<int>(sig.extras.size()) >= r) break;
    if (cell == sig.home || cell == sig.work) continue;
    sig.extras.push_back(cell);
  }
  return sig;
}

}  // namespace internal

inline absl::StatusOr<AnchorSignature> InferAnchors(const TraceSet& ts,
                                                    UserId user, int r) {
  if (r < 0) return absl::InvalidArgumentError("r must be >= 0");
  auto idx = ts.FindUser(user);
  if (!idx) return absl::NotFoundError(absl::StrCat("unknown user ", user));
  return internal::AnchorsOf(ts.trajectories()[*idx].samples, r);
}

// Anchors for every user (by index), computed in parallel.
inline std::vector<AnchorSignature> AllAnchors(const TraceSet& ts, int r) {
  std::vector<AnchorSignature> out(ts.user_count());
  const auto trajs = ts.trajectories();
  ParallelFor(out.size(), [&](size_t u) {
    out[u] = internal::AnchorsOf(trajs[u].samples, r);
  });
  return out;
}

// Equivalence-class size of each key under exact equality.
template <typename Key>
std::vector<int> GroupSizes(const std::vector<Key>& keys) {
  std::vector<size_t> order(keys.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return keys[a] < keys[b]; });
  std::vector<int> sizes(keys.size(), 0);
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i + 1;
    while (j < order.size() && keys[order[j]] == keys[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) sizes[order[k]] = static_cast<int>(j - i);
    i = j;
  }
  return sizes;
}

struct AnchorUniquenessResult {
  std::vector<int32_t> users;  // included user indices
  int excluded_users = 0;      // missing a home or work anchor
  std::vector<int> k_hw;       // parallel to users
  double ua_hw = 0.0;
  std::map<int, int> k_hw_distribution;  // class size -> users
  std::map<int, int> shared_pairs;       // users per pair -> pairs
  std::vector<double> unique_by_r;       // Pr[k_{A_r} = 1], r = 0..max_r
  std::vector<std::vector<int>> k_by_r;  // [r][included user]
};

inline absl::StatusOr<AnchorUniquenessResult> AnchorUniqueness(
    const TraceSet& ts, int max_r) {
  if (max_r < 0) return absl::InvalidArgumentError("r must be >= 0");
  const std::vector<AnchorSignature> sigs = AllAnchors(ts, max_r);
  AnchorUniquenessResult out;
  for (size_t u = 0; u < sigs.size(); ++u) {
    if (sigs[u].complete()) {
      out.users.push_back(static_cast<int32_t>(u));
    } else {
      ++out.excluded_users;
    }
  }
  if (out.users.empty()) {
    return absl::FailedPreconditionError("no user has both home and work anchors");
  }
  const double n = static_cast<double>(out.users.size());
  for (int r = 0; r <= max_r; ++r) {
    std::vector<AnchorSignature> keys;
    keys.reserve(out.users.size());
    for (int32_t u : out.users) {
      AnchorSignature k = sigs[u];
      if (static_cast<int>(k.extras.size()) > r) k.extras.resize(r);
      keys.push_back(std::move(k));
    }
    std::vector<int> sizes = GroupSizes(keys);
    out.unique_by_r.push_back(std::count(sizes.begin(), sizes.end(), 1) / n);
    out.k_by_r.push_back(std::move(sizes));
  }
  out.k_hw = out.k_by_r[0];
  out.ua_hw = out.unique_by_r[0];
  for (int k : out.k_hw) {
    ++out.k_hw_distribution[k];
    ++out.shared_pairs[k];
  }
  // Each pair shared by k users was counted k times above.
  for (auto& [k, c] : out.shared_pairs) c /= k;
  return out;
}

struct SeclusionResult {
  int kappa = 0;
  std::vector<double> exposure;  // SE_kappa per user index
  int exposed_users = 0;         // SE_kappa > 0
};

inline absl::StatusOr<SeclusionResult> SeclusionExposure(const TraceSet& ts,
                                                         int kappa) {
  if (kappa < 1) return absl::InvalidArgumentError("kappa must be >= 1");
  SeclusionResult out;
  out.kappa = kappa;
  out.exposure.resize(ts.user_count());
  const auto trajs = ts.trajectories();
  const GridSpec& grid = ts.grid();
  for (size_t u = 0; u < trajs.size(); ++u) {
    int secluded = 0;
    for (const Sample& s : trajs[u].samples) {
      if (ts.UsersAtIndex(grid.Index(s.cell)).size() <=
          static_cast<size_t>(kappa)) {
        ++secluded;
      }
    }
    out.exposure[u] = static_cast<double>(secluded) / trajs[u].samples.size();
    if (secluded > 0) ++out.exposed_users;
  }
  return out;
}

struct SensitiveUniquenessResult {
  int q = 0;
  int eligible_users = 0;
  int unique_users = 0;
  // nullopt when no user has q sensitive cells ("not applicable").
  std::optional<double> probability;
  std::vector<int32_t> users;       // eligible user indices
  std::vector<int> class_sizes;     // parallel to users
};

// Top-q sensitive cells of every user, as sorted cell sets. Users with fewer
// than q distinct sensitive cells get nullopt.
inline std::vector<std::optional<std::vector<Cell>>> SensitiveSignatures(
    const TraceSet& ts, const std::vector<Cell>& sensitive, int q) {
  std::vector<char> flag(static_cast<size_t>(ts.grid().CellCount()), 0);
  for (Cell c : sensitive) flag[ts.grid().Index(c)] = 1;
  std::vector<std::optional<std::vector<Cell>>> out(ts.user_count());
  const auto trajs = ts.trajectories();
  ParallelFor(out.size(), [&](size_t u) {
    std::map<Cell, int> counts;
    for (const Sample& s : trajs[u].samples) {
      if (flag[ts.grid().Index(s.cell)]) ++counts[s.cell];
    }
    if (static_cast<int>(counts.size()) < q) return;
    auto ranked = internal::RankCells(std::move(counts));
    std::vector<Cell> top;
    for (int i = 0; i < q; ++i) top.push_back(ranked[i].first);
    std::sort(top.begin(), top.end());
    out[u] = std::move(top);
  });
  return out;
}

inline absl::StatusOr<SensitiveUniquenessResult> SensitiveUniqueness(
    const TraceSet& ts, const PoiCatalog& pois, int q) {
  if (q < 1) return absl::InvalidArgumentError("q must be >= 1");
  for (const PoiEntry& e : pois.entries()) {
    if (!ts.grid().Contains(e.cell)) {
      return absl::InvalidArgumentError(
          absl::StrCat("POI cell ", CellToString(e.cell), " outside grid"));
    }
  }
  const std::vector<Cell> sensitive = pois.SensitiveCells();
  if (sensitive.empty()) {
    return absl::InvalidArgumentError("no sensitive cells in the POI catalog");
  }
  auto sigs = SensitiveSignatures(ts, sensitive, q);
  SensitiveUniquenessResult out;
  out.q = q;
  std::vector<std::vector<Cell>> keys;
  for (size_t u = 0; u < sigs.size(); ++u) {
    if (!sigs[u]) continue;
    out.users.push_back(static_cast<int32_t>(u));
    keys.push_back(std::move(*sigs[u]));
  }
  out.eligible_users = static_cast<int>(out.users.size());
  out.class_sizes = GroupSizes(keys);
  out.unique_users = static_cast<int>(
      std::count(out.class_sizes.begin(), out.class_sizes.end(), 1));
  if (out.eligible_users > 0) {
    out.probability = static_cast<double>(out.unique_users) / out.eligible_users;
  }
  return out;
}

}  // namespace trajreid

#endif  // TRAJREID_PRIVACY_METRICS_H_
