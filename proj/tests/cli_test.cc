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


#include "trajreid/cli/commands.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <unistd.h>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"

namespace trajreid::cli {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() /
            (std::string("trajreid_cli_") + info->name() + "_" +
             std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override {
    fs::remove_all(root_);
    SetMaxWorkers(0);
  }

  std::string Path(const std::string& name) const { return (root_ / name).string(); }

  static Outcome Cli(std::vector<std::string> args) {
    args.insert(args.begin(), "trajreid");
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::Run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
  }

  static std::string Slurp(const std::string& path) {
    auto text = ReadTextFile(path);
    EXPECT_TRUE(text.ok()) << text.status();
    return text.value_or("");
  }
  static Json LoadJson(const std::string& path) { return Json::parse(Slurp(path)); }

  void Write(const std::string& name, const std::string& content) {
    ASSERT_TRUE(WriteTextFile(Path(name), content).ok());
  }

  // Small synthetic city on a 100x100 grid over 75 days.
  std::string Synth(const std::string& dir, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"--grid", "100x100", "--days", "75", "--seed", "3",
                                     "--out", Path(dir), "synth", "--clusters", "20x20"};
    args.insert(args.end(), extra.begin(), extra.end());
    if (std::find(extra.begin(), extra.end(), "--users") == extra.end()) {
      args.insert(args.end(), {"--users", "600"});
    }
    const Outcome o = Cli(args);
    EXPECT_EQ(o.code, 0) << o.err;
    return Path(dir);
  }

  std::string RasterList(const std::string& synth_dir) const {
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(fs::path(synth_dir) / "rasters")) {
      if (e.path().extension() == ".csv") paths.push_back(e.path().string());
    }
    std::sort(paths.begin(), paths.end());
    std::string joined;
    for (const auto& p : paths) joined += (joined.empty() ? "" : ",") + p;
    return joined;
  }

  static TraceSet LoadTraces(const std::string& path, int w, int h, int days) {
    std::istringstream in(Slurp(path));
    auto ts = ReadTraceSet(in, testing::Grid(w, h), days);
    EXPECT_TRUE(ts.ok()) << ts.status();
    return std::move(ts).value();
  }

  fs::path root_;
};

const std::vector<std::string> kGrid100 = {"--grid", "100x100", "--days", "75"};

std::vector<std::string> Cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST_F(CliTest, HelpAndMissingSubcommand) {
  EXPECT_EQ(Cli({"--help"}).code, 0);
  EXPECT_EQ(Cli({}).code, kExitInvalidInput);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitInvalidInput);
}

TEST_F(CliTest, MissingRasterNamesThePath) {
  const std::string s = Synth("s");
  const std::string missing = Path("nowhere/city.csv");
  const Outcome o = Cli(Cat(kGrid100, {"--out", Path("r"), "reid-space", "--traces",
                                       s + "/traces.csv", "--raster", missing}));
  EXPECT_EQ(o.code, kExitInvalidInput);
  EXPECT_THAT(o.err, HasSubstr(missing));
}

TEST_F(CliTest, MissingTracesIsInputError) {
  const Outcome o = Cli({"--out", Path("r"), "validate", "--traces", Path("none.csv")});
  EXPECT_EQ(o.code, kExitInvalidInput);
  EXPECT_THAT(o.err, HasSubstr("none.csv"));
}

TEST_F(CliTest, StochasticCommandsRequireSeed) {
  const std::string s = Synth("s");
  const std::string traces = s + "/traces.csv";
  const std::vector<std::vector<std::string>> cases = {
      {"metrics", "--traces", traces},
      {"reid-time", "--traces", traces},
      {"sanitize", "--traces", traces, "--mechanism", "grr", "--epsilon", "1"},
      {"sweep", "--traces", traces, "--mechanism", "grr", "--params", "1"},
      {"synth"},
  };
  for (const auto& c : cases) {
    const Outcome o = Cli(Cat(Cat(kGrid100, {"--out", Path("x")}), c));
    EXPECT_EQ(o.code, kExitInvalidInput) << c[0];
    EXPECT_THAT(o.err, HasSubstr("--seed")) << c[0];
  }
  // Deterministic metrics alone need no seed.
  const Outcome o = Cli(Cat(kGrid100, {"--out", Path("m"), "metrics", "--traces", traces,
                                       "--metrics", "anchors,seclusion"}));
  EXPECT_EQ(o.code, 0) << o.err;
}

TEST_F(CliTest, UndefinedCorrelationIsDegenerate) {
  // Every sample sits on day 0, so the field restricted to day 1 is empty.
  Write("t.csv", "1,0,0,1,1\n1,0,1,2,2\n2,0,3,3,1\n");
  const std::string s = Synth("s");
  const Outcome o = Cli(Cat(kGrid100, {"--out", Path("r"), "reid-space", "--traces",
                                       Path("t.csv"), "--raster", RasterList(s),
                                       "--clusters", "20x20", "--day-range", "1:1"}));
  EXPECT_EQ(o.code, kExitDegenerate) << o.err;
}

TEST_F(CliTest, DayRangeValidation) {
  const std::string s = Synth("s");
  for (const std::string bad : {"3", "a:b", "1:2:3"}) {
    const Outcome o = Cli(Cat(kGrid100, {"--out", Path("r"), "reid-space", "--traces",
                                         s + "/traces.csv", "--raster", RasterList(s),
                                         "--day-range", bad}));
    EXPECT_EQ(o.code, kExitInvalidInput) << bad;
  }
  const Outcome o = Cli(Cat(kGrid100, {"--out", Path("r"), "reid-space", "--traces",
                                       s + "/traces.csv", "--raster", RasterList(s),
                                       "--day-range", "70:80"}));
  EXPECT_EQ(o.code, kExitInvalidInput);
}

TEST_F(CliTest, DayRangeMatchesDirectComputation) {
  const std::string s = Synth("s", {"--template", "6", "--transform", "flip-y"});
  const Outcome o = Cli(Cat(kGrid100, {"--out", Path("r"), "reid-space", "--traces",
                                       s + "/traces.csv", "--raster", RasterList(s),
                                       "--clusters", "20x20", "--day-range", "2:20"}));
  ASSERT_EQ(o.code, 0) << o.err;
  const TraceSet ts = LoadTraces(s + "/traces.csv", 100, 100, 75);
  std::vector<PopulationRaster> rasters;
  for (const auto& e : fs::directory_iterator(fs::path(s) / "rasters")) {
    if (e.path().extension() == ".csv") rasters.push_back(*LoadRaster(e.path().string()));
  }
  const DensityField f = *ComputeDensityField(ts, DayRange{2, 20});
  const MatchResult direct = *MatchCity(f, rasters, ClusterDims{20, 20});
  const Json j = LoadJson(Path("r/match.json"));
  EXPECT_EQ(j["best_city"], direct.best_city);
  EXPECT_EQ(j["best_transform"], std::string(TransformName(direct.best_transform)));
  EXPECT_EQ(j["best_correlation"].get<double>(), direct.best_correlation);
}

TEST_F(CliTest, SynthEchoesConfigAndIsDeterministic) {
  const std::string a = Synth("a", {"--template", "2"});
  const std::string b = Synth("b", {"--template", "2"});
  EXPECT_EQ(Slurp(a + "/manifest.json"), Slurp(b + "/manifest.json"));
  const Json truth = LoadJson(a + "/ground_truth.json");
  EXPECT_EQ(truth["config"]["seed"], 3);
  EXPECT_EQ(truth["config"]["users"], 600);
  EXPECT_EQ(truth["config"]["template"], 2);
  EXPECT_EQ(truth["config"]["grid"], "100x100");
  EXPECT_EQ(truth["template_id"], 2);
}

TEST_F(CliTest, ManifestListsArtifactDigests) {
  const std::string s = Synth("s");
  const Json m = LoadJson(s + "/manifest.json");
  EXPECT_EQ(m["command"], "synth");
  bool saw_traces = false;
  for (const auto& a : m["artifacts"]) {
    const std::string body = Slurp(s + "/" + a["path"].get<std::string>());
    EXPECT_EQ(a["sha256"], Sha256Hex(body));
    EXPECT_EQ(a["bytes"], body.size());
    saw_traces |= a["path"] == "traces.csv";
  }
  EXPECT_TRUE(saw_traces);
}

TEST_F(CliTest, ClosureRecoversPlant) {
  const std::string s = Synth("s", {"--template", "3", "--transform", "rot+90"});
  const Json truth = LoadJson(s + "/ground_truth.json");

  Outcome o = Cli(Cat(kGrid100, {"--out", Path("r"), "reid-space", "--traces",
                                 s + "/traces.csv", "--raster", RasterList(s),
                                 "--clusters", "20x20"}));
  ASSERT_EQ(o.code, 0) << o.err;
  const Json match = LoadJson(Path("r/match.json"));
  EXPECT_EQ(match["best_city"], truth["template_name"]);
  EXPECT_EQ(match["best_transform"], truth["recovery_transform"]);
  EXPECT_GT(match["margin"].get<double>(), 0);

  o = Cli(Cat(kGrid100, {"--seed", "1", "--out", Path("t"), "reid-time", "--traces",
                         s + "/traces.csv"}));
  ASSERT_EQ(o.code, 0) << o.err;
  const Json t = LoadJson(Path("t/temporal.json"));
  EXPECT_EQ(t["weekday_of_day0"], truth["weekday_of_day0"]);
  EXPECT_EQ(t["holiday_days"], truth["holiday_days"]);
  ASSERT_TRUE(t["unique"].get<bool>());
  EXPECT_EQ(t["candidates"][0]["start_date"], truth["start_date"]);
  EXPECT_EQ(t["window"], Json::array({"2015-01-01", "2024-04-18"}));
}

TEST_F(CliTest, EmptyCalendarIsRejected) {
  const std::string s = Synth("s");
  Write("empty.csv", "");
  const Outcome o = Cli(Cat(kGrid100, {"--seed", "1", "--out", Path("t"), "reid-time",
                                       "--traces", s + "/traces.csv", "--calendar",
                                       Path("empty.csv")}));
  EXPECT_EQ(o.code, kExitInvalidInput);
  EXPECT_THAT(o.err, HasSubstr("no entries"));
}

TEST_F(CliTest, OutputsIndependentOfWorkers) {
  const std::string s = Synth("s");
  const std::string traces = s + "/traces.csv";
  std::string reference;
  for (const std::string workers : {"1", "4", "0"}) {
    const std::string out = Path("w" + workers);
    const Outcome o = Cli(Cat(kGrid100, {"--seed", "9", "--workers", workers, "--out", out,
                                         "sweep", "--traces", traces, "--mechanism", "grr",
                                         "--params", "1,4"}));
    ASSERT_EQ(o.code, 0) << o.err;
    const std::string manifest = Slurp(out + "/manifest.json");
    if (reference.empty()) reference = manifest;
    EXPECT_EQ(manifest, reference) << "workers=" << workers;
  }
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const std::string s = Synth("s");
  Write("run.cfg",
        "# sanitize settings\n"
        "grid = 100x100\n"
        "days = 75\n"
        "seed = 4\n"
        "mechanism = grr\n"
        "epsilon = 3\n");
  Outcome o = Cli({"--config", Path("run.cfg"), "--out", Path("c"), "sanitize", "--traces",
                   s + "/traces.csv", "--epsilon", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  o = Cli(Cat(kGrid100, {"--seed", "4", "--out", Path("f"), "sanitize", "--traces",
                         s + "/traces.csv", "--mechanism", "grr", "--epsilon", "2"}));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(Slurp(Path("c/manifest.json")), Slurp(Path("f/manifest.json")));
  EXPECT_EQ(LoadJson(Path("c/provenance.json"))["epsilon"], 2.0);

  Write("bad.cfg", "grid 100x100\n");
  EXPECT_EQ(Cli({"--config", Path("bad.cfg"), "--out", Path("b"), "validate", "--traces",
                 s + "/traces.csv"})
                .code,
            kExitInvalidInput);
  EXPECT_EQ(Cli({"--config", Path("missing.cfg"), "validate", "--traces", "x"}).code,
            kExitInvalidInput);
}

TEST_F(CliTest, GrrProvenanceRecomputesChannel) {
  const std::string s = Synth("s");
  const Outcome o = Cli(Cat(kGrid100, {"--seed", "5", "--out", Path("g"), "sanitize",
                                       "--traces", s + "/traces.csv", "--mechanism", "grr",
                                       "--epsilon", "2.5"}));
  ASSERT_EQ(o.code, 0) << o.err;
  const Json p = LoadJson(Path("g/provenance.json"));
  const double k = 100.0 * 100.0;
  const double e = std::exp(2.5);
  EXPECT_EQ(p["k"], 10000);
  EXPECT_EQ(p["seed"], 5);
  EXPECT_EQ(p["epsilon"], 2.5);
  EXPECT_NEAR(p["p"].get<double>(), e / (e + k - 1), 1e-15);
  EXPECT_NEAR(p["q"].get<double>(), 1 / (e + k - 1), 1e-17);
  EXPECT_EQ(p["input_sha256"], Sha256Hex(Slurp(s + "/traces.csv")));
}

TEST_F(CliTest, HugeEpsilonGeoIndIsIdentity) {
  const std::string s = Synth("s");
  const Outcome o = Cli(Cat(kGrid100, {"--seed", "5", "--out", Path("g"), "sanitize",
                                       "--traces", s + "/traces.csv", "--mechanism",
                                       "geoind-epsilon", "--epsilon", "1e6"}));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(Slurp(Path("g/sanitized.csv")), Slurp(s + "/traces.csv"));
  EXPECT_EQ(LoadJson(Path("g/provenance.json"))["clamped_points"], 0);
}

TEST_F(CliTest, DestructurePreservesCountMultisets) {
  const std::string s = Synth("s");
  const Outcome o = Cli(Cat(kGrid100, {"--seed", "5", "--out", Path("d"), "sanitize",
                                       "--traces", s + "/traces.csv", "--mechanism",
                                       "destructure"}));
  ASSERT_EQ(o.code, 0) << o.err;
  const TraceSet a = LoadTraces(s + "/traces.csv", 100, 100, 75);
  const TraceSet b = LoadTraces(Path("d/sanitized.csv"), 100, 100, 75);
  ASSERT_EQ(a.user_count(), b.user_count());
  auto counts = [](const Trajectory& t) {
    std::map<std::pair<int, int>, int> per_cell;
    for (const Sample& smp : t.samples) ++per_cell[{smp.cell.x, smp.cell.y}];
    std::vector<int> out;
    for (const auto& [c, n] : per_cell) out.push_back(n);
    std::sort(out.begin(), out.end());
    return out;
  };
  bool moved = false;
  for (size_t u = 0; u < a.user_count(); ++u) {
    const Trajectory& ta = a.trajectories()[u];
    const Trajectory& tb = b.trajectories()[u];
    ASSERT_EQ(ta.user, tb.user);
    EXPECT_EQ(counts(ta), counts(tb));
    ASSERT_EQ(ta.samples.size(), tb.samples.size());
    for (size_t i = 0; i < ta.samples.size(); ++i) {
      EXPECT_EQ(ta.samples[i].day, tb.samples[i].day);
      EXPECT_EQ(ta.samples[i].bin, tb.samples[i].bin);
      moved |= !(ta.samples[i].cell == tb.samples[i].cell);
    }
  }
  EXPECT_TRUE(moved);
}

TEST_F(CliTest, SinglePointSweepEqualsSanitizePlusMetrics) {
  const std::string s = Synth("s");
  Outcome o = Cli(Cat(kGrid100, {"--seed", "6", "--out", Path("sw"), "sweep", "--traces",
                                 s + "/traces.csv", "--mechanism", "grr", "--params", "3",
                                 "--metrics", "anchors,kl"}));
  ASSERT_EQ(o.code, 0) << o.err;
  o = Cli(Cat(kGrid100, {"--seed", "6", "--out", Path("sa"), "sanitize", "--traces",
                         s + "/traces.csv", "--mechanism", "grr", "--epsilon", "3"}));
  ASSERT_EQ(o.code, 0) << o.err;

  const TraceSet original = LoadTraces(s + "/traces.csv", 100, 100, 75);
  const TraceSet sanitized = LoadTraces(Path("sa/sanitized.csv"), 100, 100, 75);
  const uint64_t row_seed = LoadJson(Path("sa/provenance.json"))["row_seed"];
  const AnchorReidResult anchors = *AnchorReidRate(original, sanitized);
  const PopulationKlResult kl = *PopulationKlOverTime(
      original, sanitized, GrrConfig::ForGrid(original.grid(), 3, row_seed));

  const Json sweep = LoadJson(Path("sw/utility.json"));
  const std::string csv = Slurp(Path("sw/utility.csv"));
  const std::string row = csv.substr(csv.find('\n') + 1);
  const auto cols = SplitOn(row, ',');
  EXPECT_EQ(std::string(cols[1]), std::to_string(row_seed));
  EXPECT_EQ(std::string(cols[3]), FormatDouble(anchors.rate));
  EXPECT_EQ(std::string(cols[5]), std::to_string(anchors.compared_users));
  EXPECT_EQ(std::string(cols[11]), FormatDouble(kl.mean_kl));
  EXPECT_EQ(std::string(cols[12]), std::to_string(kl.slots));
  EXPECT_EQ(sweep["input_sha256"], LoadJson(Path("sa/provenance.json"))["input_sha256"]);
}

TEST_F(CliTest, SweepCsvHeaderIsStable) {
  const std::string s = Synth("s");
  std::vector<std::string> headers;
  for (const std::string seed : {"1", "2"}) {
    const Outcome o = Cli(Cat(kGrid100, {"--seed", seed, "--out", Path("h" + seed), "sweep",
                                         "--traces", s + "/traces.csv", "--mechanism",
                                         "geoind-epsilon", "--params", "0.001,0.01"}));
    ASSERT_EQ(o.code, 0) << o.err;
    const std::string csv = Slurp(Path("h" + seed + "/utility.csv"));
    headers.push_back(csv.substr(0, csv.find('\n')));
  }
  EXPECT_EQ(headers[0], headers[1]);
  EXPECT_EQ(headers[0], std::string(kUtilityCsvHeader));
}

TEST_F(CliTest, MetricsMatchLibraryAndDefaults) {
  const std::string s = Synth("s", {"--users", "150"});
  const Outcome o = Cli(Cat(kGrid100, {"--seed", "2", "--out", Path("m"), "metrics",
                                       "--traces", s + "/traces.csv", "--trials", "50"}));
  ASSERT_EQ(o.code, 0) << o.err;
  for (const std::string f : {"k_anonymity", "unicity", "anchors", "seclusion"}) {
    EXPECT_TRUE(fs::exists(Path("m/" + f + ".json"))) << f;
  }
  EXPECT_FALSE(fs::exists(Path("m/sensitive.json")));
  const TraceSet ts = LoadTraces(s + "/traces.csv", 100, 100, 75);
  std::vector<SeclusionResult> se;
  for (int kappa : {1, 3, 10}) se.push_back(*SeclusionExposure(ts, kappa));
  EXPECT_EQ(Slurp(Path("m/seclusion.csv")), RiskReportCsv(ToRiskReport(se)));
  EXPECT_EQ(Slurp(Path("m/anchors.csv")), RiskReportCsv(ToRiskReport(*AnchorUniqueness(ts, 3))));
  const auto u = *Unicity(ts, {1, 2, 3, 4, 5}, 50, 2);
  EXPECT_EQ(Slurp(Path("m/unicity.csv")), RiskReportCsv(ToRiskReport(u, 2)));

  EXPECT_EQ(Cli(Cat(kGrid100, {"--out", Path("x"), "metrics", "--traces", s + "/traces.csv",
                               "--metrics", "sensitive"}))
                .code,
            kExitInvalidInput);
  EXPECT_EQ(Cli(Cat(kGrid100, {"--out", Path("x"), "metrics", "--traces", s + "/traces.csv",
                               "--metrics", "entropy"}))
                .code,
            kExitInvalidInput);
}

TEST_F(CliTest, ValidateSummarizesInputs) {
  Write("t.csv", "1,0,0,1,1\n1,0,1,2,2\n2,3,3,1,1\n");
  Write("cal.csv", "2020-01-01,New Year\n2020-02-11,Foundation Day\n");
  const Outcome o = Cli({"--grid", "4x4", "--days", "5", "--out", Path("v"), "validate",
                         "--traces", Path("t.csv"), "--calendar", Path("cal.csv")});
  ASSERT_EQ(o.code, 0) << o.err;
  const Json v = LoadJson(Path("v/validation.json"));
  EXPECT_EQ(v["traces"]["users"], 2);
  EXPECT_EQ(v["traces"]["samples"], 3);
  EXPECT_EQ(v["traces"]["visited_cells"], 2);
  EXPECT_EQ(v["calendar"]["holidays"], 2);

  Write("oob.csv", "1,0,0,9,1\n");
  EXPECT_EQ(Cli({"--grid", "4x4", "--days", "5", "--out", Path("v2"), "validate", "--traces",
                 Path("oob.csv")})
                .code,
            kExitInvalidInput);
  EXPECT_EQ(Cli({"--grid", "4by4", "--out", Path("v3"), "validate", "--traces", Path("t.csv")})
                .code,
            kExitInvalidInput);
}

TEST_F(CliTest, MissingOutIsRejected) {
  Write("t.csv", "1,0,0,1,1\n");
  const Outcome o = Cli({"--grid", "4x4", "--days", "5", "validate", "--traces", Path("t.csv")});
  EXPECT_EQ(o.code, kExitInvalidInput);
  EXPECT_THAT(o.err, HasSubstr("--out"));
}

}  // namespace
}  // namespace trajreid::cli
