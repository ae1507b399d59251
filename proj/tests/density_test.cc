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

#include "trajreid/density.h"

#include <cmath>
#include <random>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"
#include "trajreid/dihedral.h"
#include "trajreid/spearman.h"
#include "trajreid/synth.h"

namespace trajreid {
namespace {

using testing::Grid;
using testing::MakeTraces;
using testing::RandomTraces;
using T = DihedralTransform;

DensityField RandomField(int w, int h, uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(0, 100);
  DensityField f(w, h);
  for (double& v : f.mutable_values()) v = d(gen);
  return f;
}

// Distinct values everywhere, so no symmetry maps it onto itself.
DensityField Probe(int side) {
  DensityField f(side, side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) f.at(x, y) = 1 + x + side * y + 0.001 * x * x;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Dihedral group

TEST(DihedralTest, NamesRoundTrip) {
  for (T t : kAllTransforms) EXPECT_EQ(*ParseTransform(TransformName(t)), t);
  EXPECT_FALSE(ParseTransform("rot+180").ok());
}

TEST(DihedralTest, CellMapsMatchDefinitions) {
  // 4x4 grid, doubled centred coordinates: cell 0 -> -3, cell 3 -> +3.
  const Cell c{0, 1};  // centred (-3, -1)
  EXPECT_EQ(TransformCell(T::kIdentity, c, 4, 4), (Cell{0, 1}));
  EXPECT_EQ(TransformCell(T::kFlipX, c, 4, 4), (Cell{0, 2}));       // (x, -y)
  EXPECT_EQ(TransformCell(T::kFlipY, c, 4, 4), (Cell{3, 1}));       // (-x, y)
  EXPECT_EQ(TransformCell(T::kFlipBoth, c, 4, 4), (Cell{3, 2}));
  EXPECT_EQ(TransformCell(T::kRot90, c, 4, 4), (Cell{1, 3}));       // (y, -x)
  EXPECT_EQ(TransformCell(T::kRotMinus90, c, 4, 4), (Cell{2, 0}));  // (-y, x)
  EXPECT_EQ(TransformCell(T::kRot90FlipX, c, 4, 4), (Cell{2, 3}));  // (-y, -x)
  EXPECT_EQ(TransformCell(T::kRot90FlipY, c, 4, 4), (Cell{1, 0}));  // (y, x)
}

TEST(DihedralTest, NamedCompositesAgreeWithComposition) {
  EXPECT_EQ(Compose(T::kFlipY, T::kFlipX), T::kFlipBoth);
  EXPECT_EQ(Compose(T::kRot90, T::kFlipX), T::kRot90FlipX);
  EXPECT_EQ(Compose(T::kRot90, T::kFlipY), T::kRot90FlipY);
  EXPECT_EQ(Compose(T::kRot90, T::kRot90), T::kFlipBoth);
  EXPECT_EQ(Inverse(T::kRot90), T::kRotMinus90);
  EXPECT_EQ(Inverse(T::kRot90FlipY), T::kRot90FlipY);
}

TEST(DihedralTest, ExhaustiveCompositionOnProbeField) {
  for (int side : {7, 8}) {
    const DensityField probe = Probe(side);
    for (T a : kAllTransforms) {
      for (T b : kAllTransforms) {
        auto ab = ApplyTransform(*ApplyTransform(probe, b), a);
        ASSERT_TRUE(ab.ok());
        EXPECT_EQ(*ab, *ApplyTransform(probe, Compose(a, b)))
            << TransformName(a) << " after " << TransformName(b);
      }
      EXPECT_EQ(*ApplyTransform(*ApplyTransform(probe, a), Inverse(a)), probe);
    }
  }
}

TEST(DihedralTest, ProbeImagesAreDistinct) {
  const DensityField probe = Probe(8);
  for (size_t i = 0; i < kAllTransforms.size(); ++i) {
    for (size_t j = i + 1; j < kAllTransforms.size(); ++j) {
      EXPECT_NE(*ApplyTransform(probe, kAllTransforms[i]),
                *ApplyTransform(probe, kAllTransforms[j]));
    }
  }
}

TEST(ApplyTransformTest, GroupOrderAndMass) {
  const DensityField f = RandomField(8, 8, 3);
  EXPECT_EQ(*ApplyTransform(f, T::kIdentity), f);
  DensityField r = f;
  for (int i = 0; i < 4; ++i) r = *ApplyTransform(r, T::kRot90);
  EXPECT_EQ(r, f);
  for (T t : kAllTransforms) {
    EXPECT_NEAR(ApplyTransform(f, t)->Total(), f.Total(), 1e-9);
  }
  EXPECT_EQ(*ApplyTransform(*ApplyTransform(f, T::kFlipX), T::kFlipY),
            *ApplyTransform(f, T::kFlipBoth));
}

TEST(ApplyTransformTest, RotationNeedsSquareField) {
  const DensityField f = RandomField(6, 4, 1);
  EXPECT_EQ(ApplyTransform(f, T::kRot90).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_TRUE(ApplyTransform(f, T::kFlipBoth).ok());
}

// ---------------------------------------------------------------------------
// Spearman

TEST(SpearmanTest, Examples) {
  const std::vector<double> a = {0.3, 5, 1, 9, -2};
  EXPECT_DOUBLE_EQ(*Spearman(a, a), 1.0);
  EXPECT_DOUBLE_EQ(*Spearman(std::vector<double>{1, 2, 3, 4},
                             std::vector<double>{9, 7, 4, 1}),
                   -1.0);
  // Mid-ranks (1, 2.5, 2.5, 4) and (4, 1.5, 1.5, 3): rho = -1.5 / 4.5.
  EXPECT_NEAR(*Spearman(std::vector<double>{1, 2, 2, 4}, std::vector<double>{3, 1, 1, 2}),
              -1.0 / 3.0, 1e-15);
}

TEST(SpearmanTest, Errors) {
  EXPECT_EQ(Spearman(std::vector<double>{1, 2}, std::vector<double>{1}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(Spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3})
                .status()
                .code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(Spearman(std::vector<double>{1}, std::vector<double>{2}).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(SpearmanTest, AgreesWithCountingOracleAndMonotoneMaps) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 30;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(gen() % 6);  // plenty of ties
      b[i] = static_cast<int>(gen() % 9);
    }
    auto r = Spearman(a, b);
    if (!r.ok()) continue;
    EXPECT_NEAR(*r, testing::oracle::Spearman(a, b), 1e-12);
    std::vector<double> ea(n), cb(n);
    for (int i = 0; i < n; ++i) {
      ea[i] = std::exp(a[i]) - 7;
      cb[i] = b[i] * b[i] * b[i];
    }
    EXPECT_NEAR(*Spearman(ea, cb), *r, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Density fields

TEST(DensityFieldTest, Examples) {
  auto empty = TraceSet::Create(Grid(3, 3), 2, {});
  EXPECT_EQ(ComputeDensityField(*empty)->Total(), 0.0);

  TraceSet ts = MakeTraces(Grid(4, 4), 3, {{1, 0, 3, 2, 3}, {1, 1, 5, 2, 3}});
  DensityField f = *ComputeDensityField(ts);
  EXPECT_EQ(f.at(2, 3), 2.0);
  EXPECT_EQ(f.Total(), 2.0);
  EXPECT_EQ(ComputeDensityField(ts, std::nullopt, DensityMode::kUniqueUsers)->at(2, 3), 1.0);
  EXPECT_EQ(ComputeDensityField(ts, DayRange{1, 2})->at(2, 3), 1.0);
}

TEST(DensityFieldTest, DayRangeErrors) {
  TraceSet ts = MakeTraces(Grid(2, 2), 3, {{1, 0, 0, 0, 0}});
  EXPECT_FALSE(ComputeDensityField(ts, DayRange{2, 1}).ok());
  EXPECT_FALSE(ComputeDensityField(ts, DayRange{0, 3}).ok());
  EXPECT_FALSE(ComputeDensityField(ts, DayRange{-1, 0}).ok());
}

TEST(DensityFieldTest, MatchesBruteForceTally) {
  for (uint32_t seed = 1; seed <= 10; ++seed) {
    TraceSet ts = RandomTraces(seed, {.max_users = 10});
    const DayRange range{1, 2};
    auto visits = *ComputeDensityField(ts, range);
    auto unique = *ComputeDensityField(ts, range, DensityMode::kUniqueUsers);
    for (int y = 0; y < ts.grid().height; ++y) {
      for (int x = 0; x < ts.grid().width; ++x) {
        double v = 0, users = 0;
        for (const Trajectory& t : ts.trajectories()) {
          bool seen = false;
          for (const Sample& s : t.samples) {
            if (s.cell == Cell{x, y} && s.day >= 1 && s.day <= 2) {
              ++v;
              seen = true;
            }
          }
          users += seen;
        }
        EXPECT_EQ(visits.at(x, y), v);
        EXPECT_EQ(unique.at(x, y), users);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Clustered correlation and city matching

TEST(ClusteredCorrelationTest, Examples) {
  const DensityField f = RandomField(200, 200, 5);
  EXPECT_EQ(BlockSums(f, {})->size(), 25u);
  EXPECT_DOUBLE_EQ(*ClusteredCorrelation(f, f), 1.0);
  EXPECT_EQ(ClusteredCorrelation(f, f, {200, 200}).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(ClusteredCorrelation(f, f, {30, 30}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ClusteredCorrelation(f, RandomField(100, 100, 1)).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ClusteredCorrelationTest, BlockSumsByHand) {
  DensityField f(4, 2, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(*BlockSums(f, {2, 2}), (std::vector<double>{14, 22}));
  EXPECT_EQ(*BlockSums(f, {1, 2}), (std::vector<double>{6, 8, 10, 12}));
}

std::vector<PopulationRaster> Templates(int side) {
  std::vector<PopulationRaster> out;
  for (int i = 0; i < kTemplateCount; ++i) {
    out.push_back({std::string(kTemplateNames[i]), TemplateField(i, side, side)});
  }
  return out;
}

TEST(MatchCityTest, SelfMatch) {
  const DensityField f = RandomField(40, 40, 9);
  auto m = MatchCity(f, {{"self", f}}, {8, 8});
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->best_city, "self");
  EXPECT_EQ(m->best_transform, T::kIdentity);
  EXPECT_DOUBLE_EQ(m->best_correlation, 1.0);
  EXPECT_EQ(m->scores.size(), 8u);
  EXPECT_FALSE(m->city_margin.has_value());
}

TEST(MatchCityTest, RecoversPlantedTemplateAndTransform) {
  const auto rasters = Templates(200);
  std::mt19937 gen(4);
  for (int id = 0; id < kTemplateCount; ++id) {
    const T planted = T::kRot90FlipY;
    DensityField f = *ApplyTransform(rasters[id].density, planted);
    // Poisson-perturbed counts around the template density.
    for (double& v : f.mutable_values()) {
      v = std::poisson_distribution<int>(v / 100.0)(gen);
    }
    auto m = MatchCity(f, rasters);
    ASSERT_TRUE(m.ok());
    EXPECT_EQ(m->best_city, rasters[id].name);
    EXPECT_EQ(m->best_transform, Inverse(planted));
    EXPECT_GT(*m->margin, 0.0);
    EXPECT_EQ(m->scores.size(), 80u);
  }
}

TEST(MatchCityTest, ArgmaxInvariantUnderMonotoneRescaling) {
  const auto rasters = Templates(200);
  DensityField f = *ApplyTransform(rasters[4].density, T::kFlipX);
  auto base = *MatchCity(f, rasters);
  for (double& v : f.mutable_values()) v = std::sqrt(v) * 3 + 1;
  auto scaled = *MatchCity(f, rasters);
  EXPECT_EQ(scaled.best_city, base.best_city);
  EXPECT_EQ(scaled.best_transform, base.best_transform);
}

TEST(MatchCityTest, TieBreakAndUndefinedScores) {
  // Two identical rasters: the smaller label wins. A constant raster is
  // undefined and excluded.
  const DensityField f = RandomField(10, 10, 2);
  DensityField flat(10, 10);
  for (double& v : flat.mutable_values()) v = 1;
  auto m = MatchCity(f, {{"b", f}, {"a", f}, {"flat", flat}}, {5, 5});
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->best_city, "a");
  EXPECT_EQ(m->best_transform, T::kIdentity);
  EXPECT_DOUBLE_EQ(*m->margin, 0.0);
  int undefined = 0;
  for (const MatchScore& s : m->scores) undefined += !s.correlation.has_value();
  EXPECT_EQ(undefined, 8);

  auto all_flat = MatchCity(f, {{"flat", flat}}, {5, 5});
  EXPECT_EQ(all_flat.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(MatchCity(f, {}).status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(MatchCity(f, {{"small", RandomField(5, 5, 1)}}, {5, 5}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(MatchCityTest, IndependentOfWorkerCount) {
  const auto rasters = Templates(200);
  const DensityField f = *ApplyTransform(rasters[2].density, T::kRot90);
  SetMaxWorkers(1);
  auto one = *MatchCity(f, rasters);
  SetMaxWorkers(4);
  auto four = *MatchCity(f, rasters);
  SetMaxWorkers(0);
  ASSERT_EQ(one.scores.size(), four.scores.size());
  for (size_t i = 0; i < one.scores.size(); ++i) {
    EXPECT_EQ(one.scores[i].correlation, four.scores[i].correlation);
  }
}

}  // namespace
}  // namespace trajreid
