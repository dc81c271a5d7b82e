#include "mhplan/campaign.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace mhplan {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

/// Shortest text that parses back to the same double.
std::string exactNumber(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string formatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string PlannerVariant::label() const {
  if (kind == PlannerKind::Baseline) return "baseline";
  return "mh-n" + std::to_string(nHyp) + "-p" + formatNumber(pTarget);
}

std::vector<PlannerVariant> defaultPlannerVariants() {
  std::vector<PlannerVariant> out{{PlannerKind::Baseline, 0, 0.0}};
  for (double p : {0.95, 0.999}) {
    for (std::size_t n : {1, 2, 3, 5}) out.push_back({PlannerKind::MultiHypothesis, n, p});
  }
  return out;
}

CampaignConfig::CampaignConfig() : planners(defaultPlannerVariants()) {}

namespace {

enum class Check { Any, Positive, NonNegative, Unit, UnitOpen, AtLeastOne };

const char* describe(Check c) {
  switch (c) {
    case Check::Positive: return "must be > 0";
    case Check::NonNegative: return "must be >= 0";
    case Check::Unit: return "must lie in [0, 1]";
    case Check::UnitOpen: return "must lie in [0, 1)";
    case Check::AtLeastOne: return "must be >= 1";
    case Check::Any: break;
  }
  return "";
}

bool passes(Check c, double v) {
  switch (c) {
    case Check::Positive: return v > 0.0;
    case Check::NonNegative: return v >= 0.0;
    case Check::Unit: return v >= 0.0 && v <= 1.0;
    case Check::UnitOpen: return v >= 0.0 && v < 1.0;
    case Check::AtLeastOne: return v >= 1.0;
    case Check::Any: break;
  }
  return std::isfinite(v);
}

/// Value stored in radians, written in degrees.
struct Degrees {
  double& radians;
};

/// Every tunable episode field with its section, key and range check.
template <class V>
void visitEpisodeFields(EpisodeConfig& e, V&& v) {
  v("world", "width_m", e.forest.width, Check::Positive);
  v("world", "height_m", e.forest.height, Check::Positive);
  v("world", "diameter_min_m", e.forest.diameterMin, Check::Positive);
  v("world", "diameter_max_m", e.forest.diameterMax, Check::Positive);
  v("world", "keep_clear_radius_m", e.forest.keepClearRadius, Check::NonNegative);
  v("world", "max_attempts_per_tree", e.forest.maxAttemptsPerTree, Check::AtLeastOne);
  v("world", "start_x_m", e.start.x, Check::Any);
  v("world", "start_y_m", e.start.y, Check::Any);
  v("world", "start_heading_deg", Degrees{e.start.theta}, Check::Any);
  v("world", "goal_x_m", e.goal.x, Check::Any);
  v("world", "goal_y_m", e.goal.y, Check::Any);
  v("world", "goal_tolerance_m", e.goalTolerance, Check::Positive);

  v("clusters", "count", e.clusters.count, Check::NonNegative);
  v("clusters", "trees_per_cluster", e.clusters.treesPerCluster, Check::NonNegative);
  v("clusters", "stddev_m", e.clusters.stddev, Check::NonNegative);
  v("clusters", "corridor_half_height_m", e.clusters.corridorHalfHeight, Check::NonNegative);

  v("barrier", "diameter_m", e.barrier.diameter, Check::Positive);
  v("barrier", "gap_m", e.barrier.gap, Check::NonNegative);
  v("barrier", "side_offset_m", e.barrier.sideOffset, Check::NonNegative);
  v("barrier", "end_offset_m", e.barrier.endOffset, Check::NonNegative);

  v("robot", "width_m", e.robotWidth, Check::Positive);
  v("robot", "planning_margin_m", e.planningMargin, Check::NonNegative);
  v("robot", "v_min", e.speed.vMin, Check::Positive);
  v("robot", "v_max", e.speed.vMax, Check::Positive);
  v("robot", "slow_clearance_m", e.speed.slowClearance, Check::NonNegative);
  v("robot", "fast_clearance_m", e.speed.fastClearance, Check::NonNegative);
  v("robot", "lookahead_m", e.tracking.lookahead, Check::Positive);
  v("robot", "max_turn_rate_radps", e.tracking.maxTurnRate, Check::Positive);
  v("robot", "rotate_in_place_above_rad", e.tracking.rotateInPlaceAbove, Check::Positive);
  v("robot", "collision_guard", e.collisionGuard, Check::Any);

  v("sensor", "max_range_m", e.sensor.maxRange, Check::Positive);
  v("sensor", "fov_deg", Degrees{e.sensor.fov}, Check::Positive);
  v("sensor", "sigma_r0_m", e.sensor.sigmaR0, Check::NonNegative);
  v("sensor", "k_r_per_m", e.sensor.kR, Check::NonNegative);
  v("sensor", "sigma_phi_rad", e.sensor.sigmaPhi, Check::NonNegative);
  v("sensor", "sigma_d0_m", e.sensor.sigmaD0, Check::NonNegative);
  v("sensor", "k_d", e.sensor.kD, Check::NonNegative);
  v("sensor", "detect_hz", e.sensor.detectionRate, Check::Positive);

  v("planner", "replan_hz", e.replanRate, Check::Positive);
  v("planner", "graph_range_m", e.graph.maxGraphRange, Check::Positive);
  v("planner", "r_short_m", e.graph.rShort, Check::NonNegative);
  v("planner", "p_min", e.mh.pMin, Check::UnitOpen);
  v("planner", "alpha_dist", e.mh.alphaDist, Check::NonNegative);
  v("planner", "alpha_safe", e.mh.alphaSafe, Check::NonNegative);
  v("planner", "d_local_m", e.mh.dLocal, Check::Positive);
  v("planner", "max_iterations", e.mh.maxIterations, Check::AtLeastOne);
  v("planner", "wide_face_p", e.graph.wideFaceP, Check::Unit);
  v("planner", "wide_face_gap_factor", e.graph.wideFaceGapFactor, Check::AtLeastOne);
  v("planner", "max_face_vertices", e.graph.maxFaceVertices, Check::AtLeastOne);
  v("planner", "min_updates", e.graph.minUpdates, Check::NonNegative);

  v("local_planner", "resolution_m", e.local.resolution, Check::Positive);
  v("local_planner", "heading_bins", e.local.headingBins, Check::AtLeastOne);
  v("local_planner", "max_curvature_per_m", e.local.maxCurvature, Check::NonNegative);
  v("local_planner", "allow_in_place_rotation", e.local.allowInPlaceRotation, Check::Any);
  v("local_planner", "rotation_step_deg", Degrees{e.local.rotationStep}, Check::Positive);
  v("local_planner", "rotation_cost", e.local.rotationCost, Check::NonNegative);
  v("local_planner", "turn_penalty", e.local.turnPenalty, Check::NonNegative);
  v("local_planner", "goal_tolerance_m", e.local.goalTolerance, Check::Positive);
  v("local_planner", "max_expansions", e.local.maxExpansions, Check::AtLeastOne);
  v("local_planner", "collision_step_m", e.local.collisionStep, Check::Positive);

  v("smoother", "smooth_weight", e.smoother.smoothWeight, Check::NonNegative);
  v("smoother", "obstacle_weight", e.smoother.obstacleWeight, Check::NonNegative);
  v("smoother", "step_size", e.smoother.stepSize, Check::Positive);
  v("smoother", "max_iterations", e.smoother.maxIterations, Check::NonNegative);

  v("baseline", "resolution_m", e.baselineResolution, Check::Positive);

  v("simulation", "dt_s", e.dt, Check::Positive);
  v("simulation", "max_time_s", e.maxSimTime, Check::Positive);
  v("simulation", "max_consecutive_failures", e.maxConsecutiveFailures, Check::AtLeastOne);
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& key,
                         const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (node.IsDefined() && node.Mark().line >= 0) os << ":" << node.Mark().line + 1;
    os << ": key '" << key << "': " << msg;
    throw ConfigError(os.str());
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& key, const char* typeName) const {
    if (!node.IsScalar()) fail(node, key, std::string("expected ") + typeName);
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, key, std::string("expected ") + typeName + ", got '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& key, Check check) const {
    const auto v = scalar<double>(node, key, "a number");
    if (!std::isfinite(v) || !passes(check, v)) {
      fail(node, key, std::string(describe(check)) + " (got " + node.Scalar() + ")");
    }
    return v;
  }

  void read(const YAML::Node& node, const std::string& key, double& out, Check check) const {
    out = number(node, key, check);
  }
  void read(const YAML::Node& node, const std::string& key, Degrees out, Check check) const {
    out.radians = number(node, key, check) * kDeg;
  }
  void read(const YAML::Node& node, const std::string& key, int& out, Check check) const {
    const auto v = scalar<long long>(node, key, "an integer");
    if (!passes(check, static_cast<double>(v))) fail(node, key, describe(check));
    out = static_cast<int>(v);
  }
  void read(const YAML::Node& node, const std::string& key, std::size_t& out, Check check) const {
    const auto v = scalar<long long>(node, key, "an integer");
    if (v < 0 || !passes(check, static_cast<double>(v))) fail(node, key, describe(check));
    out = static_cast<std::size_t>(v);
  }
  void read(const YAML::Node& node, const std::string& key, bool& out, Check) const {
    out = scalar<bool>(node, key, "true or false");
  }

  /// Rejects keys of a mapping that are not in the allowed set.
  void checkKeys(const YAML::Node& map, const std::string& prefix,
                 const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, prefix, "expected a mapping");
    for (const auto& kv : map) {
      const auto k = kv.first.as<std::string>();
      if (!allowed.count(k)) {
        fail(kv.first, prefix.empty() ? k : prefix + "." + k, "unknown key");
      }
    }
  }

 private:
  std::string source_;
};

ForestDistribution parseDistribution(const Reader& r, const YAML::Node& node, const std::string& key) {
  const auto s = r.scalar<std::string>(node, key, "a distribution name");
  if (s == "uniform") return ForestDistribution::Uniform;
  if (s == "clusters") return ForestDistribution::Clusters;
  r.fail(node, key, "expected 'uniform' or 'clusters', got '" + s + "'");
}

}  // namespace

CampaignConfig parseCampaignConfig(const std::string& yamlText, const std::string& sourceName) {
  YAML::Node root;
  try {
    root = YAML::Load(yamlText);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(sourceName + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  CampaignConfig cfg;
  if (!root.IsDefined() || root.IsNull()) return cfg;
  const Reader r(sourceName);

  std::map<std::string, std::set<std::string>> sectionKeys;
  visitEpisodeFields(cfg.episode, [&](const char* sec, const char* key, auto&&, Check) {
    sectionKeys[sec].insert(key);
  });
  std::set<std::string> topKeys{"schema_version", "base_seed", "num_forests", "workers",
                                "output_dir", "record_trajectories", "densities_per_m2",
                                "distributions", "planners"};
  for (const auto& [sec, keys] : sectionKeys) topKeys.insert(sec);
  r.checkKeys(root, "", topKeys);
  for (const auto& [sec, keys] : sectionKeys) {
    if (root[sec]) r.checkKeys(root[sec], sec, keys);
  }

  if (const auto n = root["schema_version"]) {
    int v = 0;
    r.read(n, "schema_version", v, Check::AtLeastOne);
    if (v != kSchemaVersion) r.fail(n, "schema_version", "unsupported version " + std::to_string(v));
  }
  if (const auto n = root["base_seed"]) cfg.baseSeed = r.scalar<std::uint64_t>(n, "base_seed", "an unsigned integer");
  if (const auto n = root["num_forests"]) r.read(n, "num_forests", cfg.numForests, Check::AtLeastOne);
  if (const auto n = root["workers"]) r.read(n, "workers", cfg.workers, Check::AtLeastOne);
  if (const auto n = root["output_dir"]) cfg.outputDir = r.scalar<std::string>(n, "output_dir", "a path");
  if (const auto n = root["record_trajectories"]) r.read(n, "record_trajectories", cfg.recordTrajectories, Check::Any);

  if (const auto n = root["densities_per_m2"]) {
    if (!n.IsSequence() || n.size() == 0) r.fail(n, "densities_per_m2", "expected a non-empty list");
    cfg.densities.clear();
    for (const auto& item : n) cfg.densities.push_back(r.number(item, "densities_per_m2", Check::Positive));
  }
  if (const auto n = root["distributions"]) {
    if (!n.IsSequence() || n.size() == 0) r.fail(n, "distributions", "expected a non-empty list");
    cfg.distributions.clear();
    for (const auto& item : n) cfg.distributions.push_back(parseDistribution(r, item, "distributions"));
  }

  visitEpisodeFields(cfg.episode, [&](const char* sec, const char* key, auto&& field, Check check) {
    const YAML::Node section = root[sec];
    if (!section) return;
    const YAML::Node node = section[key];
    if (node) r.read(node, std::string(sec) + "." + key, field, check);
  });
  cfg.episode.start = Pose2(cfg.episode.start.x, cfg.episode.start.y, cfg.episode.start.theta);

  if (const auto robot = root["robot"]) {
    if (cfg.episode.speed.vMax < cfg.episode.speed.vMin) {
      r.fail(robot["v_max"] ? robot["v_max"] : robot, "robot.v_max", "must be >= robot.v_min");
    }
  }
  if (const auto world = root["world"]) {
    if (cfg.episode.forest.diameterMax < cfg.episode.forest.diameterMin) {
      r.fail(world["diameter_max_m"] ? world["diameter_max_m"] : world, "world.diameter_max_m",
             "must be >= world.diameter_min_m");
    }
  }
  if (const auto planner = root["planner"]) {
    if (cfg.episode.graph.rShort > cfg.episode.graph.maxGraphRange) {
      r.fail(planner["r_short_m"] ? planner["r_short_m"] : planner, "planner.r_short_m",
             "must not exceed planner.graph_range_m");
    }
  }

  if (const auto n = root["planners"]) {
    if (!n.IsSequence() || n.size() == 0) r.fail(n, "planners", "expected a non-empty list");
    cfg.planners.clear();
    for (const auto& item : n) {
      r.checkKeys(item, "planners[]", {"type", "n_hyp", "p_target"});
      const auto type = item["type"] ? r.scalar<std::string>(item["type"], "planners[].type", "a planner type")
                                     : std::string();
      PlannerVariant v;
      if (type == "baseline") {
        v = {PlannerKind::Baseline, 0, 0.0};
      } else if (type == "mh") {
        v.kind = PlannerKind::MultiHypothesis;
        if (item["n_hyp"]) r.read(item["n_hyp"], "planners[].n_hyp", v.nHyp, Check::AtLeastOne);
        if (item["p_target"]) r.read(item["p_target"], "planners[].p_target", v.pTarget, Check::UnitOpen);
        if (v.pTarget <= cfg.episode.mh.pMin) {
          r.fail(item, "planners[].p_target", "must exceed planner.p_min");
        }
      } else {
        r.fail(item["type"] ? item["type"] : item, "planners[].type", "expected 'baseline' or 'mh'");
      }
      cfg.planners.push_back(v);
    }
  }

  try {
    validate(cfg.episode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(sourceName + ": " + e.what());
  }
  return cfg;
}

CampaignConfig loadCampaignConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parseCampaignConfig(ss.str(), path.string());
}

std::string dumpCampaignConfig(const CampaignConfig& config) {
  EpisodeConfig e = config.episode;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << kSchemaVersion;
  out << YAML::Key << "base_seed" << YAML::Value << config.baseSeed;
  out << YAML::Key << "num_forests" << YAML::Value << config.numForests;
  out << YAML::Key << "workers" << YAML::Value << config.workers;
  out << YAML::Key << "output_dir" << YAML::Value << config.outputDir;
  out << YAML::Key << "record_trajectories" << YAML::Value << config.recordTrajectories;
  out << YAML::Key << "densities_per_m2" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double d : config.densities) out << exactNumber(d);
  out << YAML::EndSeq;
  out << YAML::Key << "distributions" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto d : config.distributions) out << toString(d);
  out << YAML::EndSeq;
  out << YAML::Key << "planners" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : config.planners) {
    out << YAML::Flow << YAML::BeginMap;
    if (p.kind == PlannerKind::Baseline) {
      out << YAML::Key << "type" << YAML::Value << "baseline";
    } else {
      out << YAML::Key << "type" << YAML::Value << "mh";
      out << YAML::Key << "n_hyp" << YAML::Value << p.nHyp;
      out << YAML::Key << "p_target" << YAML::Value << exactNumber(p.pTarget);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  std::string current;
  auto open = [&](const char* sec) {
    if (current == sec) return;
    if (!current.empty()) out << YAML::EndMap;
    current = sec;
    out << YAML::Key << sec << YAML::Value << YAML::BeginMap;
  };
  auto emit = [&](const char* sec, const char* key, auto&& field, Check) {
    open(sec);
    out << YAML::Key << key << YAML::Value;
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<T, Degrees>) {
      out << exactNumber(field.radians / kDeg);
    } else if constexpr (std::is_same_v<T, double>) {
      out << exactNumber(field);
    } else {
      out << field;
    }
  };
  visitEpisodeFields(e, emit);
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t episodeSeed(std::uint64_t baseSeed, double density, ForestDistribution distribution,
                          int forestIndex) {
  std::uint64_t h = splitmix64(baseSeed);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(density));
  h = splitmix64(h ^ static_cast<std::uint64_t>(distribution == ForestDistribution::Uniform ? 1 : 2));
  h = splitmix64(h ^ static_cast<std::uint64_t>(forestIndex));
  return h;
}

std::string EpisodeTask::key() const {
  return toString(distribution) + "/" + formatNumber(density) + "/" + planner.label() + "/" +
         std::to_string(forest);
}

std::vector<EpisodeTask> expandTasks(const CampaignConfig& config) {
  std::vector<EpisodeTask> tasks;
  for (auto dist : config.distributions) {
    for (double density : config.densities) {
      for (const auto& planner : config.planners) {
        for (int f = 0; f < config.numForests; ++f) {
          tasks.push_back({density, dist, planner, f, episodeSeed(config.baseSeed, density, dist, f)});
        }
      }
    }
  }
  return tasks;
}

EpisodeConfig makeEpisodeConfig(const CampaignConfig& config, const EpisodeTask& task) {
  EpisodeConfig e = config.episode;
  e.density = task.density;
  e.distribution = task.distribution;
  e.planner = task.planner.kind;
  if (task.planner.kind == PlannerKind::MultiHypothesis) {
    e.mh.nHyp = task.planner.nHyp;
    e.mh.pTarget = task.planner.pTarget;
  }
  e.seed = task.seed;
  return e;
}

namespace {

json taskJson(const EpisodeTask& task) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["key"] = task.key();
  j["distribution"] = toString(task.distribution);
  j["density"] = task.density;
  j["planner"] = toString(task.planner.kind);
  j["n_hyp"] = task.planner.kind == PlannerKind::Baseline ? 0 : task.planner.nHyp;
  j["p_target"] = task.planner.kind == PlannerKind::Baseline ? json(nullptr) : json(task.planner.pTarget);
  j["forest"] = task.forest;
  j["seed"] = task.seed;
  return j;
}

}  // namespace

std::string serializeRecord(const EpisodeTask& task, const EpisodeRecord& record,
                            bool includeTrajectory) {
  json j = taskJson(task);
  j["outcome"] = toString(record.outcome);
  j["sim_time_s"] = record.simTime;
  j["path_length_m"] = record.pathLength;
  j["num_trees"] = record.numTrees;
  std::size_t globalFailures = 0, localFailures = 0, hyps = 0, maxVertices = 0, maxEdges = 0;
  for (const auto& c : record.cycles) {
    if (!c.globalOk) ++globalFailures;
    if (c.globalOk && !c.localOk) ++localFailures;
    hyps += c.hypotheses;
    maxVertices = std::max(maxVertices, c.graphVertices);
    maxEdges = std::max(maxEdges, c.graphEdges);
  }
  j["cycles"] = record.cycles.size();
  j["global_failures"] = globalFailures;
  j["local_failures"] = localFailures;
  j["mean_hypotheses"] = record.cycles.empty() ? 0.0 : static_cast<double>(hyps) / static_cast<double>(record.cycles.size());
  j["max_graph_vertices"] = maxVertices;
  j["max_graph_edges"] = maxEdges;
  if (includeTrajectory) {
    json traj = json::array();
    for (const auto& s : record.trajectory) traj.push_back({s.t, s.pose.x, s.pose.y, s.pose.theta});
    j["trajectory"] = std::move(traj);
    json cycles = json::array();
    for (const auto& c : record.cycles) {
      cycles.push_back({c.t, c.landmarks, c.graphVertices, c.graphEdges, c.hypotheses, c.globalOk, c.localOk});
    }
    j["cycle_stats"] = std::move(cycles);
  }
  return j.dump();
}

namespace {

struct StoredRecord {
  json data;
  std::string line;
};

/// Parsed records keyed by task key; truncated or malformed lines are dropped.
std::map<std::string, StoredRecord> readRecords(const std::filesystem::path& file,
                                                bool* hadBadLines = nullptr,
                                                std::vector<std::string>* validLines = nullptr) {
  std::map<std::string, StoredRecord> out;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("key")) {
      if (hadBadLines) *hadBadLines = true;
      continue;
    }
    const std::string key = j["key"].get<std::string>();
    if (validLines && !out.count(key)) validLines->push_back(line);
    out[key] = {std::move(j), line};
  }
  return out;
}

std::map<std::string, double> readTimings(const std::filesystem::path& file) {
  std::map<std::string, double> out;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key") || !j.contains("wall_time_s")) continue;
    out[j["key"].get<std::string>()] = j["wall_time_s"].get<double>();
  }
  return out;
}

void writeSummary(const CampaignConfig& config, const std::filesystem::path& dir) {
  const auto records = readRecords(dir / "records.jsonl");
  const auto timings = readTimings(dir / "timings.jsonl");
  std::ofstream out(dir / "summary.csv");
  out << "distribution,density,planner,n_hyp,p_target,episodes,success,stopped,crash,timeout,"
         "wall_time_mean_s,wall_time_std_s\n";
  for (auto dist : config.distributions) {
    for (double density : config.densities) {
      for (const auto& planner : config.planners) {
        CellCounts counts;
        std::vector<double> walls;
        for (int f = 0; f < config.numForests; ++f) {
          const EpisodeTask task{density, dist, planner, f, 0};
          const auto it = records.find(task.key());
          if (it == records.end()) continue;
          const auto outcome = it->second.data["outcome"].get<std::string>();
          if (outcome == "success") ++counts.success;
          if (outcome == "stopped") ++counts.stopped;
          if (outcome == "crash") ++counts.crash;
          if (outcome == "timeout") ++counts.timeout;
          if (auto t = timings.find(task.key()); t != timings.end()) walls.push_back(t->second);
        }
        double mean = 0.0, var = 0.0;
        for (double w : walls) mean += w;
        if (!walls.empty()) mean /= static_cast<double>(walls.size());
        for (double w : walls) var += (w - mean) * (w - mean);
        if (walls.size() > 1) var /= static_cast<double>(walls.size() - 1);
        out << toString(dist) << ',' << formatNumber(density) << ',' << toString(planner.kind) << ','
            << (planner.kind == PlannerKind::Baseline ? 0 : planner.nHyp) << ','
            << (planner.kind == PlannerKind::Baseline ? std::string() : formatNumber(planner.pTarget))
            << ',' << counts.total() << ',' << counts.success << ',' << counts.stopped << ','
            << counts.crash << ',' << counts.timeout << ',' << formatNumber(mean) << ','
            << formatNumber(std::sqrt(var)) << '\n';
      }
    }
  }
}

}  // namespace

CampaignStats runCampaign(const CampaignConfig& config, std::ostream& log) {
  namespace fs = std::filesystem;
  const fs::path dir(config.outputDir);
  fs::create_directories(dir);
  {
    std::ofstream snap(dir / "config.yaml");
    snap << dumpCampaignConfig(config);
  }
  const fs::path recordsFile = dir / "records.jsonl";
  bool bad = false;
  std::vector<std::string> valid;
  const auto existing = readRecords(recordsFile, &bad, &valid);
  if (bad) {
    // Drop a partially written tail before appending.
    std::ofstream rewrite(recordsFile, std::ios::trunc);
    for (const auto& line : valid) rewrite << line << '\n';
  }

  std::vector<EpisodeTask> pending;
  CampaignStats stats;
  for (const auto& task : expandTasks(config)) {
    if (existing.count(task.key())) {
      ++stats.skipped;
    } else {
      pending.push_back(task);
    }
  }
  log << "campaign: " << pending.size() << " episodes to run, " << stats.skipped
      << " already recorded\n";

  std::ofstream records(recordsFile, std::ios::app);
  std::ofstream timings(dir / "timings.jsonl", std::ios::app);
  std::vector<std::optional<std::pair<std::string, std::string>>> results(pending.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      std::pair<std::string, std::string> out;
      try {
        const EpisodeRecord rec = runEpisode(makeEpisodeConfig(config, pending[i]));
        out.first = serializeRecord(pending[i], rec, config.recordTrajectories);
        json t{{"key", pending[i].key()}, {"wall_time_s", rec.wallTime}};
        out.second = t.dump();
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        next = pending.size();
      }
      {
        std::lock_guard lock(mutex);
        results[i] = std::move(out);
      }
      ready.notify_one();
    }
  };

  const int nWorkers = std::max(1, std::min<int>(config.workers, static_cast<int>(pending.size())));
  std::vector<std::thread> threads;
  for (int w = 0; w < nWorkers && !pending.empty(); ++w) threads.emplace_back(worker);

  // Single appender: flush results in canonical order as they complete.
  for (std::size_t written = 0; written < pending.size();) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return results[written].has_value() || failure; });
    if (failure) break;
    while (written < pending.size() && results[written]) {
      records << results[written]->first << '\n';
      timings << results[written]->second << '\n';
      results[written].reset();
      ++written;
      ++stats.executed;
    }
    records.flush();
    timings.flush();
    lock.unlock();
    if (stats.executed % 20 == 0 || written == pending.size()) {
      log << "campaign: " << written << "/" << pending.size() << " done\n";
    }
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  records.close();
  timings.close();
  writeSummary(config, dir);
  return stats;
}

int emitPlotData(const std::filesystem::path& resultsDir, std::ostream& err) {
  CampaignConfig snapshot;
  if (std::filesystem::exists(resultsDir / "config.yaml")) {
    snapshot = loadCampaignConfig(resultsDir / "config.yaml");
  }
  const auto records = readRecords(resultsDir / "records.jsonl");
  std::map<std::string, CellCounts> cells;
  for (const auto& [key, rec] : records) {
    const auto cut = key.rfind('/');
    CellCounts& c = cells[key.substr(0, cut)];
    const auto outcome = rec.data["outcome"].get<std::string>();
    if (outcome == "success") ++c.success;
    if (outcome == "stopped") ++c.stopped;
    if (outcome == "crash") ++c.crash;
    if (outcome == "timeout") ++c.timeout;
  }

  int missing = 0;
  const std::array<std::pair<ForestDistribution, const char*>, 2> figures{
      {{ForestDistribution::Uniform, "fig6_uniform.csv"},
       {ForestDistribution::Clusters, "fig7_clusters.csv"}}};
  for (const auto& [dist, fileName] : figures) {
    std::ofstream out(resultsDir / fileName);
    out << "density,n_hyp,p_target,distribution,success,stopped,crash,timeout\n";
    for (double p : {0.95, 0.999}) {
      for (double density : snapshot.densities) {
        for (std::size_t n : {0, 1, 2, 3, 5}) {
          const PlannerVariant v = n == 0 ? PlannerVariant{PlannerKind::Baseline, 0, 0.0}
                                          : PlannerVariant{PlannerKind::MultiHypothesis, n, p};
          const std::string cell = toString(dist) + "/" + formatNumber(density) + "/" + v.label();
          const auto it = cells.find(cell);
          const int have = it == cells.end() ? 0 : it->second.total();
          if (have < snapshot.numForests) {
            err << "missing cell: distribution=" << toString(dist) << " density=" << formatNumber(density)
                << " planner=" << v.label() << " (" << have << "/" << snapshot.numForests
                << " episodes)\n";
            ++missing;
            continue;
          }
          const CellCounts& c = it->second;
          out << formatNumber(density) << ',' << n << ',' << formatNumber(p) << ',' << toString(dist)
              << ',' << c.success << ',' << c.stopped << ',' << c.crash << ',' << c.timeout << '\n';
        }
      }
    }
  }
  return missing == 0 ? 0 : 1;
}

void writeTrajectory(const std::filesystem::path& path, const EpisodeConfig& config,
                     const EpisodeRecord& record, const ForestWorld& world) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  json header;
  header["type"] = "world";
  header["schema_version"] = kSchemaVersion;
  header["seed"] = record.seed;
  header["width_m"] = world.width;
  header["height_m"] = world.height;
  header["distribution"] = toString(config.distribution);
  header["density"] = config.density;
  header["planner"] = toString(config.planner);
  header["n_hyp"] = config.planner == PlannerKind::Baseline ? 0 : config.mh.nHyp;
  header["p_target"] = config.planner == PlannerKind::Baseline ? json(nullptr) : json(config.mh.pTarget);
  header["start"] = {config.start.x, config.start.y, config.start.theta};
  header["goal"] = {config.goal.x, config.goal.y};
  json trees = json::array();
  for (const auto& t : world.obstacles) trees.push_back({t.center.x, t.center.y, t.diameter});
  header["obstacles"] = std::move(trees);
  json barrier = json::array();
  for (const auto& t : world.barrier) barrier.push_back({t.center.x, t.center.y, t.diameter});
  header["barrier"] = std::move(barrier);
  out << header.dump() << '\n';
  for (const auto& s : record.trajectory) {
    out << json{{"type", "pose"}, {"t", s.t}, {"x", s.pose.x}, {"y", s.pose.y}, {"theta", s.pose.theta}}.dump()
        << '\n';
  }
  json outcome{{"type", "outcome"},
               {"outcome", toString(record.outcome)},
               {"sim_time_s", record.simTime},
               {"path_length_m", record.pathLength},
               {"wall_time_s", record.wallTime}};
  out << outcome.dump() << '\n';
}

}  // namespace mhplan
