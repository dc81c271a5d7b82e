#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mhplan/campaign.hpp"

using namespace mhplan;
namespace fs = std::filesystem;

namespace {

std::string readFile(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path freshDir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mhplan_test_" + name);
  fs::remove_all(d);
  return d;
}

// Small world so that campaign tests finish quickly.
CampaignConfig smallCampaign(const fs::path& dir) {
  CampaignConfig c = parseCampaignConfig(R"(
num_forests: 2
densities_per_m2: [0.1]
distributions: [uniform]
planners:
  - {type: baseline}
  - {type: mh, n_hyp: 2, p_target: 0.95}
world: {width_m: 12, height_m: 6, start_y_m: 3, goal_x_m: 12, goal_y_m: 3}
)",
                                         "inline");
  c.outputDir = dir.string();
  return c;
}

}  // namespace

TEST(Config, ShippedDefaultMatchesBuiltIn) {
  const CampaignConfig shipped = loadCampaignConfig(fs::path(MHPLAN_SOURCE_DIR) / "configs/default.yaml");
  EXPECT_EQ(dumpCampaignConfig(shipped), dumpCampaignConfig(CampaignConfig{}));
}

TEST(Config, ProtocolDefaults) {
  const CampaignConfig c;
  EXPECT_DOUBLE_EQ(c.episode.sensor.maxRange, 20.0);
  EXPECT_NEAR(c.episode.sensor.fov * 180 / M_PI, 110.0, 1e-12);
  EXPECT_DOUBLE_EQ(c.episode.graph.maxGraphRange, 15.0);
  EXPECT_DOUBLE_EQ(c.episode.replanRate, 1.0);
  EXPECT_DOUBLE_EQ(c.episode.sensor.detectionRate, 2.0);
  EXPECT_DOUBLE_EQ(c.episode.speed.vMin, 1.0);
  EXPECT_DOUBLE_EQ(c.episode.speed.vMax, 5.0);
  EXPECT_EQ(c.planners.size(), 9u);
}

TEST(Config, RoundTrip) {
  CampaignConfig c;
  c.episode.sensor.kR = 0.0031;
  c.episode.start = Pose2(1, 2, 0.3);
  c.densities = {0.15, 0.25};
  c.planners = {{PlannerKind::MultiHypothesis, 3, 0.999}};
  c.workers = 3;
  const std::string text = dumpCampaignConfig(c);
  const CampaignConfig back = parseCampaignConfig(text, "dump");
  EXPECT_EQ(dumpCampaignConfig(back), text);
  EXPECT_EQ(back.planners, c.planners);
  EXPECT_DOUBLE_EQ(back.episode.sensor.kR, 0.0031);
  EXPECT_NEAR(back.episode.start.theta, 0.3, 1e-15);
}

TEST(Config, UnknownKeyNamesLine) {
  try {
    parseCampaignConfig("num_forests: 3\nsensor:\n  max_range_m: 20\n  fov_degrees: 90\n", "cfg.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cfg.yaml:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sensor.fov_degrees"), std::string::npos) << msg;
  }
}

TEST(Config, BadValuesNameKeyAndLine) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"robot:\n  v_max: fast\n", "cfg.yaml:2: key 'robot.v_max'"},
      {"planner:\n  replan_hz: 0\n", "cfg.yaml:2: key 'planner.replan_hz'"},
      {"distributions: [uniform, forest]\n", "key 'distributions'"},
      {"planners:\n  - {type: mh, n_hyp: 0}\n", "cfg.yaml:2: key 'planners[].n_hyp'"},
      {"robot:\n  v_min: 4\n  v_max: 2\n", "cfg.yaml:3: key 'robot.v_max'"},
      {"schema_version: 2\n", "key 'schema_version'"},
      {"world: [1, 2]\n", "key 'world'"},
  };
  for (const auto& [text, expected] : cases) {
    try {
      parseCampaignConfig(text, "cfg.yaml");
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(expected), std::string::npos) << e.what();
    }
  }
}

TEST(Config, SyntaxErrorHasLine) {
  try {
    parseCampaignConfig("a: [1, 2\nb: 3\n", "cfg.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.yaml:"), std::string::npos);
  }
}

TEST(Seeds, PairedAndDistinct) {
  std::set<std::uint64_t> seen;
  for (double d : {0.1, 0.2, 0.3}) {
    for (auto dist : {ForestDistribution::Uniform, ForestDistribution::Clusters}) {
      for (int f = 0; f < 20; ++f) seen.insert(episodeSeed(1, d, dist, f));
    }
  }
  EXPECT_EQ(seen.size(), 120u);
  EXPECT_EQ(episodeSeed(1, 0.3, ForestDistribution::Clusters, 4),
            episodeSeed(1, 0.3, ForestDistribution::Clusters, 4));
  EXPECT_NE(episodeSeed(1, 0.3, ForestDistribution::Clusters, 4),
            episodeSeed(2, 0.3, ForestDistribution::Clusters, 4));
}

TEST(Tasks, CanonicalOrderAndPairing) {
  const CampaignConfig c;
  const auto tasks = expandTasks(c);
  ASSERT_EQ(tasks.size(), 2u * 3u * 9u * 20u);
  EXPECT_EQ(tasks.front().distribution, ForestDistribution::Uniform);
  EXPECT_EQ(tasks.back().distribution, ForestDistribution::Clusters);
  std::set<std::string> keys;
  for (const auto& t : tasks) {
    keys.insert(t.key());
    EXPECT_EQ(t.seed, episodeSeed(c.baseSeed, t.density, t.distribution, t.forest));
  }
  EXPECT_EQ(keys.size(), tasks.size());
  EXPECT_EQ(tasks[0].seed, tasks[20].seed);  // same forest, next planner
}

TEST(Campaign, ResumeAndDeterminism) {
  const fs::path dir = freshDir("resume");
  CampaignConfig c = smallCampaign(dir);
  // Eleven forests so that key order ("/10" < "/2") differs from run order.
  c.numForests = 11;
  std::ostringstream log;
  const auto first = runCampaign(c, log);
  EXPECT_EQ(first.executed, 22u);
  const std::string records = readFile(dir / "records.jsonl");
  const auto ls = lines(dir / "records.jsonl");
  ASSERT_EQ(ls.size(), 22u);

  const auto again = runCampaign(c, log);
  EXPECT_EQ(again.executed, 0u);
  EXPECT_EQ(again.skipped, 22u);
  EXPECT_EQ(readFile(dir / "records.jsonl"), records);

  // A truncated tail is dropped and the missing episode re-run.
  {
    std::ofstream out(dir / "records.jsonl", std::ios::trunc);
    for (std::size_t i = 0; i < 21; ++i) out << ls[i] << '\n';
    out << ls[21].substr(0, ls[21].size() / 2);
  }
  const auto resumed = runCampaign(c, log);
  EXPECT_EQ(resumed.executed, 1u);
  EXPECT_EQ(readFile(dir / "records.jsonl"), records);

  const fs::path dir2 = freshDir("parallel");
  CampaignConfig par = c;
  par.outputDir = dir2.string();
  par.workers = 3;
  runCampaign(par, log);
  EXPECT_EQ(readFile(dir2 / "records.jsonl"), records);

  const auto summary = lines(dir / "summary.csv");
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[0].rfind("distribution,density,planner", 0), 0u);
  EXPECT_EQ(lines(dir / "timings.jsonl").size(), 23u);
  EXPECT_TRUE(fs::exists(dir / "config.yaml"));
  for (const auto& l : lines(dir / "records.jsonl")) {
    const auto j = nlohmann::json::parse(l);
    EXPECT_EQ(j["schema_version"], kSchemaVersion);
    EXPECT_FALSE(j.contains("wall_time_s"));
  }
}

TEST(PlotData, MissingCellsReported) {
  const fs::path dir = freshDir("plot_missing");
  std::ostringstream log;
  runCampaign(smallCampaign(dir), log);
  std::ostringstream err;
  EXPECT_EQ(emitPlotData(dir, err), 1);
  EXPECT_NE(err.str().find("missing cell"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "fig6_uniform.csv"));
}

TEST(PlotData, CompleteTables) {
  const fs::path dir = freshDir("plot_complete");
  CampaignConfig c = smallCampaign(dir);
  c.numForests = 1;
  c.distributions = {ForestDistribution::Uniform, ForestDistribution::Clusters};
  c.planners = defaultPlannerVariants();
  c.episode.clusters.treesPerCluster = 5;
  std::ostringstream log;
  runCampaign(c, log);
  std::ostringstream err;
  EXPECT_EQ(emitPlotData(dir, err), 0) << err.str();
  for (const char* f : {"fig6_uniform.csv", "fig7_clusters.csv"}) {
    const auto rows = lines(dir / f);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0], "density,n_hyp,p_target,distribution,success,stopped,crash,timeout");
  }
}

TEST(Trajectory, FileLayout) {
  EpisodeConfig c;
  c.density = 0.05;
  c.seed = 3;
  ForestWorld w;
  const auto r = runEpisode(c, &w);
  const fs::path p = freshDir("traj").string() + ".jsonl";
  writeTrajectory(p, c, r, w);
  const auto ls = lines(p);
  ASSERT_EQ(ls.size(), r.trajectory.size() + 2);
  EXPECT_EQ(nlohmann::json::parse(ls.front())["type"], "world");
  EXPECT_EQ(nlohmann::json::parse(ls[1])["type"], "pose");
  EXPECT_EQ(nlohmann::json::parse(ls.back())["outcome"], toString(r.outcome));
}
