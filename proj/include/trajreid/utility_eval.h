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

#ifndef TRAJREID_UTILITY_EVAL_H_
#define TRAJREID_UTILITY_EVAL_H_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/base/parallel.h"
#include "trajreid/base/rng.h"
#include "trajreid/base/status.h"
#include "trajreid/density.h"
#include "trajreid/privacy_metrics.h"
#include "trajreid/sanitizers.h"
#include "trajreid/trace_store.h"

namespace trajreid {

inline constexpr double kKlSmoothing = 1e-9;

// KL(p || q) after adding `alpha` to every entry and renormalizing both.
inline absl::StatusOr<double> KlDivergence(std::span<const double> p,
                                           std::span<const double> q,
                                           double alpha = kKlSmoothing) {
  if (p.size() != q.size() || p.empty()) {
    return absl::InvalidArgumentError("distributions must be equal-length and non-empty");
  }
  double sp = 0, sq = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0 || !std::isfinite(p[i]) || !std::isfinite(q[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("negative or non-finite entry at index ", i));
    }
    sp += p[i] + alpha;
    sq += q[i] + alpha;
  }
  double kl = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double pi = (p[i] + alpha) / sp;
    const double qi = (q[i] + alpha) / sq;
    kl += pi * std::log(pi / qi);
  }
  return std::max(0.0, kl);
}

struct AnchorReidResult {
  double rate = 0.0;          // home AND work exactly equal
  double rate_within_one = 0.0;  // both within Chebyshev distance 1
  int compared_users = 0;
  int dropped_users = 0;  // anchor-absent on either side
  std::vector<double> home_errors;  // sorted Euclidean cell distances
  std::vector<double> work_errors;
};

inline double CellDistance(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

inline absl::StatusOr<AnchorReidResult> AnchorReidRate(const TraceSet& original,
                                                       const TraceSet& sanitized) {
  if (original.user_count() != sanitized.user_count()) {
    return absl::InvalidArgumentError("original and sanitized user sets differ");
  }
  for (size_t u = 0; u < original.user_count(); ++u) {
    if (original.trajectories()[u].user != sanitized.trajectories()[u].user) {
      return absl::InvalidArgumentError("original and sanitized user sets differ");
    }
  }
  const auto a = AllAnchors(original, 0);
  const auto b = AllAnchors(sanitized, 0);
  AnchorReidResult out;
  int exact = 0, near = 0;
  for (size_t u = 0; u < a.size(); ++u) {
    if (!a[u].complete() || !b[u].complete()) {
      ++out.dropped_users;
      continue;
    }
    ++out.compared_users;
    const Cell ha = *a[u].home, hb = *b[u].home, wa = *a[u].work, wb = *b[u].work;
    if (ha == hb && wa == wb) ++exact;
    auto cheb = [](Cell x, Cell y) {
      return std::max(std::abs(x.x - y.x), std::abs(x.y - y.y));
    };
    if (cheb(ha, hb) <= 1 && cheb(wa, wb) <= 1) ++near;
    out.home_errors.push_back(CellDistance(ha, hb));
    out.work_errors.push_back(CellDistance(wa, wb));
  }
  if (out.compared_users == 0) {
    return absl::FailedPreconditionError("no user has anchors on both sides");
  }
  out.rate = static_cast<double>(exact) / out.compared_users;
  out.rate_within_one = static_cast<double>(near) / out.compared_users;
  std::sort(out.home_errors.begin(), out.home_errors.end());
  std::sort(out.work_errors.begin(), out.work_errors.end());
  return out;
}

struct PopulationKlResult {
  double mean_kl = 0.0;
  int slots = 0;  // (day, bin) slots populated on both sides
};

namespace internal {

// Per (day, bin) slot, the cell indices of every sample.
inline std::vector<std::vector<int32_t>> SlotCells(const TraceSet& ts) {
  std::vector<std::vector<int32_t>> slots(
      static_cast<size_t>(ts.day_count()) * kBinsPerDay);
  for (const Trajectory& t : ts.trajectories()) {
    for (const Sample& s : t.samples) {
      slots[static_cast<size_t>(s.day) * kBinsPerDay + s.bin].push_back(
          ts.grid().Index(s.cell));
    }
  }
  return slots;
}

}  // namespace internal

// Mean over time slots of KL(f || f_hat) where f is the original per-cell
// visit frequency and f_hat the sanitized one, GRR-debiased (clipped and
// renormalized) when `debias` is given.
inline absl::StatusOr<PopulationKlResult> PopulationKlOverTime(
    const TraceSet& original, const TraceSet& sanitized,
    const std::optional<GrrConfig>& debias = std::nullopt) {
  if (original.grid().width != sanitized.grid().width ||
      original.grid().height != sanitized.grid().height ||
      original.day_count() != sanitized.day_count()) {
    return absl::InvalidArgumentError("original and sanitized grids differ");
  }
  if (debias) TRAJREID_RETURN_IF_ERROR(debias->Validate());
  const auto a = internal::SlotCells(original);
  const auto b = internal::SlotCells(sanitized);
  const size_t k = static_cast<size_t>(original.grid().CellCount());
  std::vector<std::optional<double>> per_slot(a.size());
  std::vector<absl::Status> errors(a.size());
  ParallelFor(a.size(), [&](size_t i) {
    if (a[i].empty() || b[i].empty()) return;
    std::vector<double> f(k, 0.0), g(k, 0.0);
    for (int32_t c : a[i]) f[c] += 1.0 / a[i].size();
    for (int32_t c : b[i]) g[c] += 1.0 / b[i].size();
    if (debias) {
      auto d = GrrDebias(g, *debias);
      if (!d.ok()) {
        errors[i] = d.status();
        return;
      }
      g = std::move(d->clipped);
    }
    auto kl = KlDivergence(f, g);
    if (kl.ok()) {
      per_slot[i] = *kl;
    } else {
      errors[i] = kl.status();
    }
  });
  for (const auto& e : errors) TRAJREID_RETURN_IF_ERROR(e);
  PopulationKlResult out;
  double total = 0;
  for (const auto& v : per_slot) {
    if (!v) continue;
    total += *v;
    ++out.slots;
  }
  if (out.slots == 0) {
    return absl::FailedPreconditionError("no time slot is populated on both sides");
  }
  out.mean_kl = total / out.slots;
  return out;
}

enum class Mechanism {
  kGeoIndEpsilon,  // parameter = epsilon (1/m)
  kGeoIndRadius,   // parameter = radius (m), epsilon = level / radius
  kGrr,            // parameter = epsilon
  kDestructure,    // parameter = replicate id
};

inline std::string_view MechanismName(Mechanism m) {
  switch (m) {
    case Mechanism::kGeoIndEpsilon: return "geoind-epsilon";
    case Mechanism::kGeoIndRadius: return "geoind-radius";
    case Mechanism::kGrr: return "grr";
    case Mechanism::kDestructure: return "destructure";
  }
  return "unknown";
}

inline absl::StatusOr<Mechanism> ParseMechanism(std::string_view s) {
  for (Mechanism m : {Mechanism::kGeoIndEpsilon, Mechanism::kGeoIndRadius,
                      Mechanism::kGrr, Mechanism::kDestructure}) {
    if (MechanismName(m) == s) return m;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown mechanism '", std::string(s), "'"));
}

struct SweepOptions {
  uint64_t seed = 0;
  double geoind_level = 0.0;  // required for kGeoIndRadius
  PermutationScope permutation_scope = PermutationScope::kFullGrid;
  bool anchors = true;
  bool kl = true;
  bool debias_grr = true;
  // Correlation to `reference` and city match against `rasters` run only
  // when these are set.
  std::optional<PopulationRaster> reference;
  std::vector<PopulationRaster> rasters;
  ClusterDims clusters;
};

struct UtilityRow {
  double parameter = 0.0;
  uint64_t row_seed = 0;
  std::optional<std::string> error;
  std::optional<AnchorReidResult> anchors;
  std::optional<PopulationKlResult> kl;
  std::optional<double> clustered_correlation;
  std::optional<MatchResult> match;
  int64_t clamped_points = 0;
};

struct UtilityReport {
  Mechanism mechanism = Mechanism::kGrr;
  std::vector<UtilityRow> rows;  // ascending by parameter
};

// The seed of a row depends only on (master seed, parameter), so a row is
// reproducible on its own.
inline uint64_t RowSeed(uint64_t seed, double parameter) {
  return DeriveSeed(seed, std::bit_cast<uint64_t>(parameter));
}

inline absl::StatusOr<TraceSet> SanitizeWith(const TraceSet& ts, Mechanism m,
                                             double parameter, uint64_t seed,
                                             const SweepOptions& opts,
                                             int64_t* clamped = nullptr) {
  switch (m) {
    case Mechanism::kGeoIndEpsilon:
    case Mechanism::kGeoIndRadius: {
      GeoIndConfig cfg{parameter, seed};
      if (m == Mechanism::kGeoIndRadius) {
        TRAJREID_ASSIGN_OR_RETURN(
            cfg, GeoIndConfig::FromLevelRadius(opts.geoind_level, parameter, seed));
      }
      TRAJREID_ASSIGN_OR_RETURN(SanitizedTraces out, GeoIndSanitize(ts, cfg));
      if (clamped) *clamped = out.clamped_points;
      return std::move(out.traces);
    }
    case Mechanism::kGrr:
      return GrrSanitize(ts, GrrConfig::ForGrid(ts.grid(), parameter, seed));
    case Mechanism::kDestructure:
      return Destructure(ts, PermutationConfig{seed, opts.permutation_scope, false});
  }
  return absl::InternalError("unhandled mechanism");
}

inline UtilityRow EvaluateRow(const TraceSet& original, Mechanism m,
                              double parameter, const SweepOptions& opts) {
  UtilityRow row;
  row.parameter = parameter;
  row.row_seed = RowSeed(opts.seed, parameter);
  auto fail = [&](const absl::Status& s) {
    row.error = std::string(s.message());
    return row;
  };
  auto sanitized =
      SanitizeWith(original, m, parameter, row.row_seed, opts, &row.clamped_points);
  if (!sanitized.ok()) return fail(sanitized.status());
  if (opts.anchors) {
    auto a = AnchorReidRate(original, *sanitized);
    if (!a.ok()) return fail(a.status());
    row.anchors = std::move(*a);
  }
  if (opts.kl) {
    std::optional<GrrConfig> debias;
    if (m == Mechanism::kGrr && opts.debias_grr) {
      debias = GrrConfig::ForGrid(original.grid(), parameter, row.row_seed);
    }
    auto kl = PopulationKlOverTime(original, *sanitized, debias);
    if (!kl.ok()) return fail(kl.status());
    row.kl = *kl;
  }
  if (opts.reference || !opts.rasters.empty()) {
    auto density = ComputeDensityField(*sanitized);
    if (!density.ok()) return fail(density.status());
    if (opts.reference) {
      auto c = ClusteredCorrelation(*density, opts.reference->density, opts.clusters);
      if (c.ok()) {
        row.clustered_correlation = *c;
      } else if (!absl::IsFailedPrecondition(c.status())) {
        return fail(c.status());
      }
    }
    if (!opts.rasters.empty()) {
      auto match = MatchCity(*density, opts.rasters, opts.clusters);
      if (match.ok()) {
        row.match = std::move(*match);
      } else if (!absl::IsFailedPrecondition(match.status())) {
        return fail(match.status());
      }
    }
  }
  return row;
}

// One row per parameter point, sorted by parameter. A failing row records
// its error and the sweep continues.
inline absl::StatusOr<UtilityReport> SanitizerSweep(const TraceSet& original,
                                                    Mechanism m,
                                                    std::vector<double> parameters,
                                                    const SweepOptions& opts) {
  if (m == Mechanism::kGeoIndRadius && !(opts.geoind_level > 0)) {
    return absl::InvalidArgumentError("radius sweeps need a positive Geo-Ind level");
  }
  std::sort(parameters.begin(), parameters.end());
  parameters.erase(std::unique(parameters.begin(), parameters.end()), parameters.end());
  UtilityReport report;
  report.mechanism = m;
  for (double p : parameters) report.rows.push_back(EvaluateRow(original, m, p, opts));
  return report;
}

}  // namespace trajreid

#endif  // TRAJREID_UTILITY_EVAL_H_
