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

#ifndef TRAJREID_TESTS_TESTING_FIXTURES_H_
#define TRAJREID_TESTS_TESTING_FIXTURES_H_

// Small hand-built and random trace sets, plus brute-force reference
// implementations that scan raw samples without using any index.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "trajreid/privacy_metrics.h"
#include "trajreid/trace_store.h"

namespace trajreid::testing {

struct Row {
  UserId user;
  int day, bin, x, y;
};

inline TraceSet MakeTraces(GridSpec grid, int days, const std::vector<Row>& rows) {
  std::map<UserId, std::vector<Sample>> by_user;
  for (const Row& r : rows) by_user[r.user].push_back(Sample{r.day, r.bin, {r.x, r.y}});
  std::vector<Trajectory> trajs;
  for (auto& [u, s] : by_user) trajs.push_back({u, std::move(s)});
  auto ts = TraceSet::Create(std::move(grid), days, std::move(trajs));
  if (!ts.ok()) throw std::invalid_argument(std::string(ts.status().message()));
  return std::move(*ts);
}

inline GridSpec Grid(int w, int h) { return GridSpec{w, h, 500.0, {}, {}}; }

inline std::string ToCsv(const TraceSet& ts) {
  std::ostringstream out;
  WriteTraceSet(ts, out);
  return out.str();
}

struct RandomSpec {
  int max_users = 50;
  int max_samples = 200;  // per user
  int grid = 6;
  int days = 4;
  int pool = 4;  // favourite cells per user, drawn from a shared hot set
};

// Random instance with deliberate overlap between users: favourite cells come
// from a small hot set and samples cluster in a few bins, so candidate sets,
// match counts and anchor groups are non-trivial.
inline TraceSet RandomTraces(uint32_t seed, const RandomSpec& spec = {}) {
  std::mt19937 gen(seed);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); };
  const int users = 2 + pick(spec.max_users - 1);
  std::vector<Cell> hot;
  for (int i = 0; i < 6; ++i) hot.push_back({pick(spec.grid), pick(spec.grid)});
  std::vector<Row> rows;
  for (int u = 0; u < users; ++u) {
    std::vector<Cell> fav;
    for (int i = 0; i < spec.pool; ++i) {
      fav.push_back(pick(3) == 0 ? Cell{pick(spec.grid), pick(spec.grid)}
                                 : hot[pick(static_cast<int>(hot.size()))]);
    }
    const int n = 1 + pick(spec.max_samples);
    std::set<std::pair<int, int>> used;
    for (int i = 0; i < n; ++i) {
      const int day = pick(spec.days);
      const int bin = pick(4) == 0 ? pick(kBinsPerDay) : 8 * pick(6) + pick(3);
      if (!used.insert({day, bin}).second) continue;
      const Cell c = fav[pick(spec.pool)];
      rows.push_back({u * 7 + 3, day, bin, c.x, c.y});
    }
  }
  return MakeTraces(Grid(spec.grid, spec.grid), spec.days, rows);
}

// ---------------------------------------------------------------------------
// Oracles

namespace oracle {

inline int UniqueVisitors(const TraceSet& ts, Cell c) {
  std::set<UserId> users;
  for (const Trajectory& t : ts.trajectories()) {
    for (const Sample& s : t.samples) {
      if (s.cell == c) users.insert(t.user);
    }
  }
  return static_cast<int>(users.size());
}

inline bool Satisfies(const Trajectory& t, const Constraint& c) {
  for (const Sample& s : t.samples) {
    if (s.cell == c.cell && s.bin >= c.bin_lo && s.bin <= c.bin_hi &&
        (!c.day || s.day == *c.day)) {
      return true;
    }
  }
  return false;
}

inline std::vector<int32_t> CandidateSet(const TraceSet& ts, const QuerySpec& q) {
  std::vector<int32_t> out;
  const auto trajs = ts.trajectories();
  for (size_t u = 0; u < trajs.size(); ++u) {
    bool all = true;
    for (const Constraint& c : q.constraints) all = all && Satisfies(trajs[u], c);
    if (all) out.push_back(static_cast<int32_t>(u));
  }
  return out;
}

inline int MatchCount(const TraceSet& ts, const std::vector<Sample>& points) {
  int n = 0;
  for (const Trajectory& t : ts.trajectories()) {
    bool all = true;
    for (const Sample& p : points) {
      all = all && std::find(t.samples.begin(), t.samples.end(), p) != t.samples.end();
    }
    n += all;
  }
  return n;
}

// Most frequent cell among samples passing `keep`, smallest (x, y) on ties.
template <typename Keep>
std::optional<Cell> ArgmaxCell(const std::vector<Sample>& samples, Keep keep,
                               const std::set<Cell>& skip = {}) {
  std::optional<Cell> best;
  int best_n = 0;
  std::set<Cell> seen;
  for (const Sample& s : samples) {
    if (!keep(s) || skip.count(s.cell) || !seen.insert(s.cell).second) continue;
    int n = 0;
    for (const Sample& o : samples) n += keep(o) && o.cell == s.cell;
    if (n > best_n || (n == best_n && s.cell < *best)) {
      best = s.cell;
      best_n = n;
    }
  }
  return best;
}

inline AnchorSignature Anchors(const std::vector<Sample>& samples, int r) {
  AnchorSignature sig;
  sig.home = ArgmaxCell(samples, [](const Sample& s) { return s.bin >= 44 || s.bin < 12; });
  sig.work = ArgmaxCell(samples, [](const Sample& s) { return s.bin >= 18 && s.bin <= 33; });
  std::set<Cell> skip;
  if (sig.home) skip.insert(*sig.home);
  if (sig.work) skip.insert(*sig.work);
  for (int i = 0; i < r; ++i) {
    auto next = ArgmaxCell(samples, [](const Sample&) { return true; }, skip);
    if (!next) break;
    sig.extras.push_back(*next);
    skip.insert(*next);
  }
  return sig;
}

// Quadratic group sizes under ==.
template <typename Key>
std::vector<int> GroupSizes(const std::vector<Key>& keys) {
  std::vector<int> out;
  for (const Key& a : keys) {
    out.push_back(static_cast<int>(std::count(keys.begin(), keys.end(), a)));
  }
  return out;
}

inline std::vector<double> Seclusion(const TraceSet& ts, int kappa) {
  std::vector<double> out;
  for (const Trajectory& t : ts.trajectories()) {
    int n = 0;
    for (const Sample& s : t.samples) n += UniqueVisitors(ts, s.cell) <= kappa;
    out.push_back(static_cast<double>(n) / t.samples.size());
  }
  return out;
}

// Top-q sensitive cells by visit count (ties by smaller (x, y)), as a set.
inline std::optional<std::set<Cell>> SensitiveSignature(const Trajectory& t,
                                                        const std::set<Cell>& sensitive,
                                                        int q) {
  std::set<Cell> chosen;
  for (int i = 0; i < q; ++i) {
    auto next = ArgmaxCell(
        t.samples, [&](const Sample& s) { return sensitive.count(s.cell) > 0; }, chosen);
    if (!next) return std::nullopt;
    chosen.insert(*next);
  }
  return chosen;
}

// Spearman from scratch: mid-ranks by counting, then the Pearson formula.
inline double Spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto midranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  const auto ra = midranks(a), rb = midranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
}  // namespace trajreid::testing

#endif  // TRAJREID_TESTS_TESTING_FIXTURES_H_
