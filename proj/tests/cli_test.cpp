#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "zerotemp/cli.hpp"

using namespace zerotemp;
using cli::Json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "zerotemp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch() {
  auto d = std::filesystem::temp_directory_path() / "zerotemp_cli_test";
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, VersionListsDefaults) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("c0=10 c1=6.6 c2=1.5 logbase=natural"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"simulate", "--no-such-flag"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"simulate", "--geometry", "torus"}).code, 1);
  EXPECT_EQ(run({"simulate", "--engine", "warp"}).code, 1);
  EXPECT_EQ(run({"geometry", "--d", "3"}).code, 1);
}

TEST(Cli, SimulateEchoesConfigAndIsDeterministic) {
  const auto a = run({"simulate", "--d", "2", "--L", "10", "--seed", "5", "--replica", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto j = a.json();
  EXPECT_EQ(j["config"]["L"], 10);
  EXPECT_EQ(j["config"]["boundary"], "plus");
  EXPECT_FALSE(j["timeout"].get<bool>());
  EXPECT_GT(j["t_plus"].get<double>(), 0.0);
  EXPECT_EQ(j["wall_ms"], 0.0);
  EXPECT_EQ(a.out, run({"simulate", "--d", "2", "--L", "10", "--seed", "5", "--replica", "3"}).out);
  EXPECT_NE(a.out, run({"simulate", "--d", "2", "--L", "10", "--seed", "5", "--replica", "4"}).out);
}

TEST(Cli, SimulateTimeoutAndFilters) {
  const auto t = run({"simulate", "--d", "2", "--L", "20", "--tcap", "1"}).json();
  EXPECT_TRUE(t["timeout"].get<bool>());
  EXPECT_TRUE(t["t_plus"].is_null());
  const auto f = run({"simulate", "--d", "2", "--L", "6", "--filter", "freeze-layers:1", "--engine", "graphical"});
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_GT(f.json()["t_plus"].get<double>(), 5 * 36.0);
  EXPECT_EQ(run({"simulate", "--filter", "nonsense"}).code, 1);
}

TEST(Cli, SimulateShell) {
  const auto r = run({"simulate", "--geometry", "shell", "--r", "6", "--l", "2", "--init", "random"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["config"]["boundary"], "shell");
}

TEST(Cli, GeometryPartitionReport) {
  const auto r = run({"geometry", "--d", "4", "--L", "3", "--check-bdecop"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_TRUE(j["c0_equals_cylinder"].get<bool>());
  EXPECT_EQ(j["ball_sites"], 88423);
  EXPECT_EQ(j["cylinder_sites"], 3 * 88423);
  EXPECT_EQ(j["partition"].size(), 11u);
  EXPECT_EQ(j["shrunk_sets"][0]["sites"], j["cylinder_sites"]);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
}

TEST(Cli, CoupleCheckPassesAndCatchesFault) {
  const auto ok = run({"couple-check", "--runs", "30", "--tmax", "5"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.json()["violations"], 0);
  const auto bad = run({"couple-check", "--runs", "40", "--tmax", "30", "--dims", "2", "--inject-fault"});
  EXPECT_EQ(bad.code, 2);
  const auto j = bad.json();
  EXPECT_GT(j["violations"].get<int>(), 0);
  ASSERT_FALSE(j["witnesses"].empty());
  EXPECT_TRUE(j["witnesses"][0].contains("site"));
  const auto cen = run({"couple-check", "--mode", "censoring", "--runs", "20", "--tmax", "5"});
  EXPECT_EQ(cen.code, 0) << cen.err;
}

TEST(Cli, SliceCheck) {
  const auto r = run({"slice-check", "--d", "4", "--L", "3", "--i", "2", "--events", "10000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.json()["ok"].get<bool>());
  EXPECT_EQ(r.json()["events"], 10000);
  const auto f = run({"slice-check", "--d", "4", "--L", "3", "--first-layer", "--events", "10000"});
  EXPECT_EQ(f.code, 0) << f.err;
}

TEST(Cli, CampaignThenFit) {
  const auto dir = scratch();
  const auto cfg = dir / "small.cfg";
  std::ofstream(cfg) << "id = small\ndim = 2\nLs = 4, 8, 12\nreplicas = 24\nseed = 3\n";
  const auto csv = dir / "small.csv";
  const auto c = run({"campaign", "--config", cfg.string(), "--out", csv.string(), "--jobs", "2"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_TRUE(std::filesystem::exists(csv.string() + ".summary.json"));
  ASSERT_EQ(run({"campaign", "--config", cfg.string(), "--out", (dir / "again.csv").string()}).code, 0);
  EXPECT_EQ(slurp(csv), slurp(dir / "again.csv"));

  const auto plot = dir / "plot.dat";
  const auto f = run({"fit", "--in", csv.string(), "--emit-plot", plot.string()});
  ASSERT_EQ(f.code, 0) << f.err;
  const auto j = f.json();
  EXPECT_EQ(j["tmix"].size(), 3u);
  EXPECT_GT(j["fit"]["exponent"].get<double>(), 1.0);
  EXPECT_NE(j["source"].get<std::string>().find("config_hash="), std::string::npos);
  std::ifstream p(plot);
  std::string line;
  int rows = 0;
  while (std::getline(p, line))
    if (!line.empty() && line[0] != '#') ++rows;
  EXPECT_EQ(rows, 3);

  EXPECT_EQ(run({"fit", "--in", csv.string(), "--min-samples", "100"}).code, 3);
  std::filesystem::remove_all(dir);
}

TEST(Cli, SampleConfigParses) {
  EXPECT_NO_THROW(CampaignConfig::parse(slurp(ZEROTEMP_SAMPLE_CONFIG)));
}
