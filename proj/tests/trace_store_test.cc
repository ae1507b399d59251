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

#include "trajreid/trace_store.h"

#include <sstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"

namespace trajreid {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;
using testing::Grid;
using testing::MakeTraces;
using testing::RandomTraces;

absl::StatusOr<TraceSet> Parse(const std::string& text, GridSpec grid, int days = 75) {
  std::istringstream in(text);
  return ReadTraceSet(in, grid, days);
}

TEST(ReadTraceSetTest, MinimalFileForOneUser) {
  auto ts = Parse("7,0,1,0,0\n7,0,2,1,1\n7,1,0,3,3\n", Grid(4, 4));
  ASSERT_TRUE(ts.ok()) << ts.status();
  EXPECT_EQ(ts->user_count(), 1u);
  EXPECT_EQ(ts->sample_count(), 3u);
  EXPECT_EQ(ts->trajectories()[0].user, 7);
}

TEST(ReadTraceSetTest, CellOutsideGridNamesTheLine) {
  auto ts = Parse("1,0,0,199,199\n1,0,1,200,5\n", Grid(200, 200));
  ASSERT_FALSE(ts.ok());
  EXPECT_EQ(ts.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_THAT(ts.status().message(), HasSubstr("line 2"));
}

TEST(ReadTraceSetTest, DayAndBinBounds) {
  GridSpec g = Grid(2, 2);
  auto ok = Parse("1,0,0,0,0\n1,74,47,1,1\n", g);
  ASSERT_TRUE(ok.ok()) << ok.status();
  EXPECT_EQ(ok->day_count(), 75);
  for (const Sample& s : ok->trajectories()[0].samples) {
    EXPECT_GE(s.bin, 0);
    EXPECT_LT(s.bin, kBinsPerDay);
  }
  EXPECT_THAT(Parse("1,75,0,0,0\n", g).status().message(), HasSubstr("line 1"));
  EXPECT_THAT(Parse("1,0,0,0,0\n1,3,48,0,0\n", g).status().message(),
              HasSubstr("line 2"));
  EXPECT_FALSE(Parse("1,-1,0,0,0\n", g).ok());
}

TEST(ReadTraceSetTest, MalformedRows) {
  GridSpec g = Grid(4, 4);
  for (const char* bad : {"1,0,0,0\n", "1,0,0,0,0,0\n", "a,0,0,0,0\n", "1,0,0,0,1.5\n",
                          "1,,0,0,0\n"}) {
    auto ts = Parse(std::string("2,0,0,0,0\n") + bad, g);
    ASSERT_FALSE(ts.ok()) << bad;
    EXPECT_EQ(ts.status().code(), absl::StatusCode::kInvalidArgument);
    EXPECT_THAT(ts.status().message(), HasSubstr("line 2")) << bad;
  }
}

TEST(ReadTraceSetTest, DuplicateSampleIsAnError) {
  auto different = Parse("1,0,5,0,0\n1,0,5,1,1\n", Grid(4, 4));
  ASSERT_FALSE(different.ok());
  EXPECT_THAT(different.status().message(), HasSubstr("duplicate"));
  EXPECT_FALSE(Parse("1,0,5,0,0\n1,0,5,0,0\n", Grid(4, 4)).ok());
  // Same (day, bin) for different users is fine.
  EXPECT_TRUE(Parse("1,0,5,0,0\n2,0,5,1,1\n", Grid(4, 4)).ok());
}

TEST(ReadTraceSetTest, RowsAreSortedPerUser) {
  auto ts = Parse("9,2,0,0,0\n4,0,3,1,1\n9,0,7,2,2\n9,0,1,3,3\n", Grid(4, 4));
  ASSERT_TRUE(ts.ok());
  ASSERT_EQ(ts->user_count(), 2u);
  EXPECT_EQ(ts->trajectories()[0].user, 4);
  const auto& s = ts->trajectories()[1].samples;
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(std::make_pair(s[0].day, s[0].bin), std::make_pair(0, 1));
  EXPECT_EQ(std::make_pair(s[1].day, s[1].bin), std::make_pair(0, 7));
  EXPECT_EQ(std::make_pair(s[2].day, s[2].bin), std::make_pair(2, 0));
}

TEST(ReadTraceSetTest, AcceptsCrLfAndBlankLines) {
  auto ts = Parse("1,0,0,0,0\r\n\n1,0,1,1,1\r\n", Grid(2, 2));
  ASSERT_TRUE(ts.ok()) << ts.status();
  EXPECT_EQ(ts->sample_count(), 2u);
}

TEST(ReadTraceSetTest, InvalidGridRejected) {
  EXPECT_FALSE(Parse("1,0,0,0,0\n", Grid(0, 4)).ok());
  EXPECT_FALSE(Parse("1,0,0,0,0\n", GridSpec{4, 4, 0.0, {}, {}}).ok());
}

TEST(UniqueVisitorsTest, SetSemantics) {
  TraceSet ts = MakeTraces(Grid(3, 3), 2,
                           {{1, 0, 0, 1, 1}, {2, 0, 0, 1, 1}, {1, 1, 0, 1, 1}});
  EXPECT_EQ(*ts.UniqueVisitors({1, 1}), 2);
  EXPECT_EQ(*ts.UniqueVisitors({0, 2}), 0);
  EXPECT_EQ(ts.UniqueVisitors({3, 0}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(UniqueVisitorsTest, AgreesWithFullScanOnEveryCell) {
  for (uint32_t seed = 1; seed <= 5; ++seed) {
    TraceSet ts = RandomTraces(seed);
    ASSERT_LE(ts.user_count(), 50u);
    for (int y = 0; y < ts.grid().height; ++y) {
      for (int x = 0; x < ts.grid().width; ++x) {
        EXPECT_EQ(*ts.UniqueVisitors({x, y}), testing::oracle::UniqueVisitors(ts, {x, y}))
            << "seed " << seed << " cell " << x << "," << y;
      }
    }
  }
}

TEST(TraceSetTest, IndexConservesSamples) {
  for (uint32_t seed = 10; seed < 20; ++seed) {
    TraceSet ts = RandomTraces(seed);
    int64_t indexed = 0;
    for (int i = 0; i < ts.grid().CellCount(); ++i) indexed += ts.SamplesAtIndex(i);
    int64_t per_user = 0;
    for (const Trajectory& t : ts.trajectories()) per_user += t.samples.size();
    EXPECT_EQ(indexed, per_user);
    EXPECT_EQ(indexed, static_cast<int64_t>(ts.sample_count()));
  }
}

TEST(TraceSetTest, VisitorListsAreSortedAndExact) {
  TraceSet ts = RandomTraces(77);
  const auto trajs = ts.trajectories();
  for (int i = 0; i < ts.grid().CellCount(); ++i) {
    const Cell c = ts.grid().CellAt(i);
    std::vector<int32_t> expected;
    for (size_t u = 0; u < trajs.size(); ++u) {
      for (const Sample& s : trajs[u].samples) {
        if (s.cell == c) {
          expected.push_back(static_cast<int32_t>(u));
          break;
        }
      }
    }
    auto got = ts.UsersAt(c);
    EXPECT_EQ(std::vector<int32_t>(got.begin(), got.end()), expected);
  }
}

TEST(TraceSetTest, CreateRejectsBadTrajectories) {
  GridSpec g = Grid(2, 2);
  EXPECT_FALSE(TraceSet::Create(g, 3, {{1, {}}}).ok());
  EXPECT_FALSE(TraceSet::Create(g, 3, {{1, {{0, 0, {0, 0}}}}, {1, {{0, 1, {0, 0}}}}}).ok());
  EXPECT_FALSE(TraceSet::Create(g, 3, {{1, {{3, 0, {0, 0}}}}}).ok());
  EXPECT_FALSE(TraceSet::Create(g, 0, {}).ok());
  auto empty = TraceSet::Create(g, 3, {});
  ASSERT_TRUE(empty.ok());
  EXPECT_EQ(empty->user_count(), 0u);
}

TEST(TraceSetTest, FindUser) {
  TraceSet ts = MakeTraces(Grid(2, 2), 1, {{5, 0, 0, 0, 0}, {2, 0, 0, 1, 1}});
  EXPECT_EQ(ts.FindUser(2), 0u);
  EXPECT_EQ(ts.FindUser(5), 1u);
  EXPECT_EQ(ts.FindUser(3), std::nullopt);
}

TEST(WriteTraceSetTest, CanonicalRoundTripIsByteIdentical) {
  for (uint32_t seed = 30; seed < 35; ++seed) {
    TraceSet ts = RandomTraces(seed);
    std::ostringstream first;
    WriteTraceSet(ts, first);
    auto again = Parse(first.str(), ts.grid(), ts.day_count());
    ASSERT_TRUE(again.ok());
    std::ostringstream second;
    WriteTraceSet(*again, second);
    EXPECT_EQ(first.str(), second.str());
  }
}

TEST(WriteTraceSetTest, NormalizesUnsortedInput) {
  auto ts = Parse("2,1,0,1,1\n1,0,4,0,0\n2,0,9,0,1\n", Grid(2, 2));
  ASSERT_TRUE(ts.ok());
  std::ostringstream out;
  WriteTraceSet(*ts, out);
  EXPECT_EQ(out.str(), "1,0,4,0,0\n2,0,9,0,1\n2,1,0,1,1\n");
}

TEST(GridSpecTest, IndexRoundTrip) {
  GridSpec g = Grid(7, 3);
  EXPECT_EQ(g.CellCount(), 21);
  for (int i = 0; i < g.CellCount(); ++i) EXPECT_EQ(g.Index(g.CellAt(i)), i);
  EXPECT_EQ(g.Index({6, 2}), 20);
  EXPECT_TRUE(g.Contains({6, 2}));
  EXPECT_FALSE(g.Contains({7, 0}));
  EXPECT_FALSE(g.Contains({0, -1}));
}

TEST(LoadTraceSetTest, MissingFile) {
  auto ts = LoadTraceSet("/nonexistent/traces.csv", Grid(2, 2));
  EXPECT_EQ(ts.status().code(), absl::StatusCode::kNotFound);
  EXPECT_THAT(ts.status().message(), HasSubstr("/nonexistent/traces.csv"));
}

}  // namespace
}  // namespace trajreid
