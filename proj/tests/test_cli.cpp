#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "oracles.hpp"
#include "vorosense/cli.hpp"
#include "vorosense/json_io.hpp"
#include "vorosense/site_io.hpp"

using namespace vorosense;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int rc;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  return {rc, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vorosense_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& contents) const {
    std::ofstream(path(name), std::ios::binary) << contents;
    return path(name);
  }

  fs::path dir_;
};

void expect_error_line(const CliRun& r, const std::string& code) {
  EXPECT_NE(r.rc, 0);
  EXPECT_TRUE(std::regex_match(r.err, std::regex("ERROR " + code + ": [^\n]+\n"))) << r.err;
}

}  // namespace

TEST_F(CliTest, GenSites) {
  ASSERT_EQ(cli({"gen-sites", "--n", "1", "--out", path("one.csv")}).rc, 0);
  EXPECT_EQ(count(slurp(path("one.csv")), "\n"), 2u);
  ASSERT_EQ(cli({"--seed", "5", "gen-sites", "--n", "1000", "--out", path("a.csv")}).rc, 0);
  ASSERT_EQ(cli({"gen-sites", "--n", "1000", "--seed", "5", "--out", path("b.csv")}).rc, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  const auto sites = read_sites_csv(fs::path(path("a.csv")));
  ASSERT_EQ(sites.size(), 1000u);
  const BoundingBox box({0, 0}, {1000, 1000});
  for (const Site& s : sites) EXPECT_TRUE(box.strictly_contains(s.position));
  EXPECT_TRUE(fs::exists(path("a.csv.manifest.json")));
  const json m = json::parse(slurp(path("a.csv.manifest.json")));
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["subcommand"], "gen-sites");
  EXPECT_EQ(m["version"], kToolVersion);
  expect_error_line(cli({"gen-sites", "--n", "0"}), "InvalidParams");
}

TEST_F(CliTest, GenSitesToStdout) {
  const CliRun r = cli({"--box", "0,0,10,10", "gen-sites", "--n", "3"});
  ASSERT_EQ(r.rc, 0);
  EXPECT_TRUE(r.out.starts_with("id,x,y\n"));
}

TEST_F(CliTest, VoronoiTwoSites) {
  const auto csv = write("two.csv", "id,x,y\n0,2,5\n1,8,5\n");
  const CliRun r = cli({"--box", "0,0,10,10", "voronoi", "--sites", csv});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(count(r.out, R"(class="edge")"), 1u);
  EXPECT_EQ(count(r.out, R"(class="cell")"), 2u);
  EXPECT_EQ(count(r.out, R"(class="site")"), 2u);
  EXPECT_NE(r.out.find(R"(viewBox="0 0 800.000 800.000")"), std::string::npos);
}

TEST_F(CliTest, VoronoiRightTriangleStats) {
  const auto csv = write("tri.csv", "id,x,y\n0,0,0\n1,4,0\n2,0,4\n");
  ASSERT_EQ(cli({"--box", "-10,-10,10,10", "voronoi", "--sites", csv, "--out", path("t.svg"), "--stats",
                 path("t.json")}).rc, 0);
  const json j = json::parse(slurp(path("t.json")));
  EXPECT_EQ(j["vertices"], 1);
  EXPECT_EQ(j["stats"]["circle_events_processed"], 1);
  EXPECT_EQ(j["seed"], 0);
  EXPECT_FALSE(j["stats"].contains("build_wall_time_s"));
}

TEST_F(CliTest, VoronoiFiveHundredSites) {
  ASSERT_EQ(cli({"gen-sites", "--n", "500", "--seed", "3", "--out", path("s.csv")}).rc, 0);
  ASSERT_EQ(cli({"voronoi", "--sites", path("s.csv"), "--out", path("v.svg"), "--stats", path("v.json"),
                 "--timing"}).rc, 0);
  EXPECT_EQ(count(slurp(path("v.svg")), R"(class="cell")"), 500u);
  const json j = json::parse(slurp(path("v.json")));
  EXPECT_LE(j["stats"]["circle_events_processed"].get<int>(), 995);
  EXPECT_TRUE(j["stats"].contains("build_wall_time_s"));
}

TEST_F(CliTest, VoronoiErrorsPointAtLines) {
  const auto bad = write("bad.csv", "id,x,y\n0,1,1\n1,2,oops\n");
  CliRun r = cli({"voronoi", "--sites", bad});
  expect_error_line(r, "ParseError");
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  const auto out = write("out.csv", "id,x,y\n0,1,1\n\n1,2000,1\n");
  r = cli({"voronoi", "--sites", out});
  expect_error_line(r, "SiteOutsideBox");
  EXPECT_NE(r.err.find("line 4"), std::string::npos);
  const auto dup = write("dup.csv", "id,x,y\n4,1,1\n5,2,2\n4,3,3\n");
  r = cli({"voronoi", "--sites", dup});
  expect_error_line(r, "DuplicateSite");
  EXPECT_NE(r.err.find("line 4"), std::string::npos);
  const auto same = write("same.csv", "id,x,y\n0,1,1\n1,1,1\n");
  expect_error_line(cli({"voronoi", "--sites", same}), "DuplicateSite");
  expect_error_line(cli({"voronoi", "--sites", path("missing.csv")}), "IoError");
}

TEST_F(CliTest, DynamicStaticFrameMatchesVoronoi) {
  ASSERT_EQ(cli({"gen-sites", "--n", "40", "--out", path("s.csv")}).rc, 0);
  ASSERT_EQ(cli({"voronoi", "--sites", path("s.csv"), "--out", path("v.svg")}).rc, 0);
  ASSERT_EQ(cli({"dynamic", "--sites", path("s.csv"), "--ticks", "1", "--motion", "static", "--out",
                 path("dyn")}).rc, 0);
  EXPECT_EQ(slurp(path("dyn/frame_000000.svg")), slurp(path("v.svg")));
  const json frames = json::parse(slurp(path("dyn/frames.json")));
  ASSERT_EQ(frames["frames"].size(), 1u);
  EXPECT_EQ(frames["frames"][0]["file"], "frame_000000.svg");
  EXPECT_TRUE(fs::exists(path("dyn/manifest.json")));
}

TEST_F(CliTest, DynamicRerunIsByteIdentical) {
  ASSERT_EQ(cli({"gen-sites", "--n", "30", "--out", path("s.csv")}).rc, 0);
  for (const std::string motion : {"bounce", "walk", "waypoint"}) {
    ASSERT_EQ(cli({"--seed", "9", "dynamic", "--sites", path("s.csv"), "--ticks", "10", "--motion", motion,
                   "--out", path("a")}).rc, 0);
    ASSERT_EQ(cli({"--seed", "9", "dynamic", "--sites", path("s.csv"), "--ticks", "10", "--motion", motion,
                   "--out", path("b")}).rc, 0);
    for (int t = 0; t < 10; ++t) {
      const std::string f = fmt::format("frame_{:06}.svg", t);
      ASSERT_EQ(slurp(path("a/" + f)), slurp(path("b/" + f))) << motion << " " << f;
    }
    EXPECT_EQ(slurp(path("a/frames.json")), slurp(path("b/frames.json")));
    EXPECT_NE(slurp(path("a/frame_000000.svg")), slurp(path("a/frame_000009.svg")));
  }
}

TEST_F(CliTest, DynamicFiftySitesHundredTicks) {
  ASSERT_EQ(cli({"gen-sites", "--n", "50", "--out", path("s.csv")}).rc, 0);
  ASSERT_EQ(cli({"dynamic", "--sites", path("s.csv"), "--ticks", "100", "--speed", "40", "--out",
                 path("d")}).rc, 0);
  const json frames = json::parse(slurp(path("d/frames.json")));
  ASSERT_EQ(frames["frames"].size(), 100u);
  for (const auto& f : frames["frames"]) EXPECT_LE(f["stats"]["circle_events_processed"].get<int>(), 95);
  expect_error_line(cli({"dynamic", "--sites", path("s.csv"), "--ticks", "0", "--out", path("z")}),
                    "InvalidParams");
}

TEST_F(CliTest, Morton) {
  EXPECT_EQ(cli({"morton", "encode", "5", "3"}).out, "27\n");
  EXPECT_EQ(cli({"morton", "decode", "27"}).out, "5 3\n");
  EXPECT_EQ(cli({"morton", "decompose", "0", "1", "1", "2", "--bits", "2"}).out, "[[2,3],[8,9]]\n");
  EXPECT_EQ(cli({"--bits", "2", "morton", "decompose", "0", "1", "1", "2", "--max-ranges", "1"}).out,
            "[[2,9]]\n");
  EXPECT_EQ(cli({"--bits", "32", "morton", "encode", "4294967295", "4294967295"}).out,
            "18446744073709551615\n");
  CliRun r = cli({"--bits", "2", "morton", "encode", "4", "0"});
  expect_error_line(r, "CoordOutOfGrid");
  EXPECT_NE(r.err.find("--bits"), std::string::npos);
  expect_error_line(cli({"--bits", "2", "morton", "decompose", "0", "0", "9", "1"}), "CoordOutOfGrid");
  expect_error_line(cli({"--bits", "2", "morton", "decode", "16"}), "KeyOutOfGrid");
  expect_error_line(cli({"--bits", "40", "morton", "decode", "1"}), "UsageError");
}

TEST_F(CliTest, SimulateZeroDuration) {
  const auto cfg = write("c.json", R"({"version": 1, "duration_s": 0,
    "service": {"kind": "exponential", "mean": 0.5},
    "publishers": [{"id": 0, "x": 500, "y": 500, "lambda": 1}]})");
  const CliRun r = cli({"simulate", "--config", cfg, "--out", path("r.json")});
  ASSERT_EQ(r.rc, 0) << r.err;
  const json j = json::parse(slurp(path("r.json")));
  EXPECT_EQ(j["published"], 0);
  EXPECT_EQ(j["served"], 0);
  EXPECT_EQ(j["mean_sojourn_s"], 0.0);
  EXPECT_NE(r.out.find("published=0 served=0"), std::string::npos);
}

TEST_F(CliTest, SimulateMM1AndDeterminism) {
  const auto cfg = write("mm1.json", R"({"version": 1, "duration_s": 10000,
    "service": {"kind": "exponential", "mean": 0.5},
    "publishers": [{"id": 0, "x": 500, "y": 500, "lambda": 1}], "query_period_s": 100})");
  const CliRun a = cli({"simulate", "--config", cfg, "--out", path("a.json"), "--snapshot", path("a.snap")});
  ASSERT_EQ(a.rc, 0) << a.err;
  const json j = json::parse(slurp(path("a.json")));
  EXPECT_NEAR(j["mean_sojourn_s"].get<double>(), 1.0, 0.05);
  EXPECT_EQ(j["kingman_prediction_s"].get<double>(), 1.0);
  ASSERT_EQ(cli({"simulate", "--config", cfg, "--out", path("b.json")}).rc, 0);
  EXPECT_EQ(json::parse(slurp(path("b.json"))), j);
  ASSERT_EQ(cli({"--seed", "1", "simulate", "--config", cfg, "--out", path("c.json")}).rc, 0);
  const json c = json::parse(slurp(path("c.json")));
  EXPECT_EQ(c["seed"], 1);
  EXPECT_NE(c["published"], j["published"]);
}

TEST_F(CliTest, SimulateConfigErrors) {
  const auto cfg = write("bad.json", R"({"version": 1, "duration_s": 10,
    "service": {"kind": "exponential"}, "publishers": []})");
  CliRun r = cli({"simulate", "--config", cfg});
  expect_error_line(r, "ConfigError");
  EXPECT_NE(r.err.find("service.mean"), std::string::npos);
  expect_error_line(cli({"simulate", "--config", write("x.json", "{not json")}), "ParseError");
  expect_error_line(cli({"simulate", "--config", write("hi.json", R"({"version": 1, "duration_s": 10,
    "service": {"kind": "exponential", "mean": 3}, "publishers": [{"id": 0, "x": 1, "y": 1, "lambda": 1}]})")}),
                    "ConfigUtilizationTooHigh");
}

TEST_F(CliTest, QueryMatchesLinearScan) {
  ASSERT_EQ(cli({"gen-sites", "--n", "400", "--seed", "2", "--out", path("s.csv")}).rc, 0);
  ASSERT_EQ(cli({"--bits", "6", "index", "build", "--sites", path("s.csv"), "--out", path("s.snap")}).rc, 0);
  const auto records = read_snapshot(path("s.snap"));
  ASSERT_EQ(records.size(), 400u);

  const CliRun all = cli({"--bits", "6", "query", "--snapshot", path("s.snap"), "--extent", "0,0,63,63"});
  ASSERT_EQ(all.rc, 0) << all.err;
  EXPECT_EQ(json::parse(all.out)["count"], 400);

  const ZCurve z(6);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const SearchExtent e = oracle::random_extent(rng, 6);
    const std::string ext = fmt::format("{},{},{},{}", e.min.ix, e.min.iy, e.max.ix, e.max.iy);
    const CliRun r = cli({"--bits", "6", "query", "--snapshot", path("s.snap"), "--extent", ext});
    ASSERT_EQ(r.rc, 0) << r.err;
    const json j = json::parse(r.out);
    const auto expected = oracle::filter(records, z, e);
    ASSERT_EQ(j["records"].size(), expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) {
      ASSERT_EQ(j["records"][k]["key"], expected[k].key.value);
      ASSERT_EQ(j["records"][k]["site_id"], expected[k].site_id);
      const CellCoord c = z.decode(expected[k].key);
      ASSERT_EQ(j["records"][k]["position"][0].get<double>(), c.ix * 1000.0 / 64);
    }
  }
}

TEST_F(CliTest, QueryEmptyIntersection) {
  const auto csv = write("s.csv", "id,x,y\n0,10,10\n1,20,20\n");
  ASSERT_EQ(cli({"index", "build", "--sites", csv, "--out", path("s.snap")}).rc, 0);
  const CliRun r = cli({"query", "--snapshot", path("s.snap"), "--extent", "60000,60000,65535,65535"});
  ASSERT_EQ(r.rc, 0);
  EXPECT_EQ(json::parse(r.out)["records"].size(), 0u);
  expect_error_line(cli({"query", "--snapshot", write("junk.snap", "VORX1\x05"), "--extent", "0,0,1,1"}),
                    "SnapshotFormatError");
  expect_error_line(cli({"query", "--snapshot", path("s.snap"), "--extent", "0,0,1"}), "UsageError");
}

TEST_F(CliTest, ReplayReproducesOutputs) {
  ASSERT_EQ(cli({"--seed", "4", "gen-sites", "--n", "60", "--out", path("s.csv")}).rc, 0);
  ASSERT_EQ(cli({"voronoi", "--sites", path("s.csv"), "--out", path("v.svg"), "--stats", path("v.json")}).rc, 0);
  const auto cfg = write("c.json", R"({"version": 1, "duration_s": 500, "seed": 3,
    "service": {"kind": "deterministic", "mean": 0.2}, "generate_publishers": {"count": 5, "lambda": 0.5}})");
  ASSERT_EQ(cli({"simulate", "--config", cfg, "--out", path("r.json")}).rc, 0);
  const std::string csv = slurp(path("s.csv")), svg = slurp(path("v.svg")), stats = slurp(path("v.json"));
  const std::string report = slurp(path("r.json"));
  fs::remove(path("s.csv"));
  fs::remove(path("v.svg"));
  fs::remove(path("r.json"));
  // The config file changing afterwards must not affect a replay.
  write("c.json", "{}");

  ASSERT_EQ(cli({"replay", path("s.csv.manifest.json")}).rc, 0);
  ASSERT_EQ(cli({"replay", path("v.svg.manifest.json")}).rc, 0);
  const CliRun r = cli({"replay", path("r.json.manifest.json")});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(slurp(path("s.csv")), csv);
  EXPECT_EQ(slurp(path("v.svg")), svg);
  EXPECT_EQ(slurp(path("v.json")), stats);
  EXPECT_EQ(json::parse(slurp(path("r.json"))), json::parse(report));
}

TEST_F(CliTest, UsageErrors) {
  expect_error_line(cli({}), "UsageError");
  expect_error_line(cli({"frobnicate"}), "UsageError");
  expect_error_line(cli({"voronoi"}), "UsageError");
  expect_error_line(cli({"--box", "0,0,1", "gen-sites", "--n", "2"}), "UsageError");
  expect_error_line(cli({"--box", "5,0,1,1", "gen-sites", "--n", "2"}), "InvalidBox");
  EXPECT_EQ(cli({"--help"}).rc, 0);
  EXPECT_EQ(cli({"--version"}).out, std::string(kToolVersion) + "\n");
}
