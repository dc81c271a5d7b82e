#include "mhplan/simworld.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mhplan {

std::string toString(ForestDistribution d) {
  return d == ForestDistribution::Uniform ? "uniform" : "clusters";
}

std::string toString(PlannerKind k) {
  return k == PlannerKind::Baseline ? "baseline" : "mh";
}

std::string toString(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Crash: return "crash";
    case Outcome::Stopped: return "stopped";
    case Outcome::Timeout: return "timeout";
  }
  return "unknown";
}

namespace {

bool overlapsAny(const std::vector<Tree>& trees, const Point2& c, double r) {
  return std::any_of(trees.begin(), trees.end(), [&](const Tree& t) {
    return distance(t.center, c) < t.radius() + r;
  });
}

bool admissible(const std::vector<Tree>& trees, const Point2& c, double r, const ForestSpec& spec) {
  if (c.x < 0.0 || c.y < 0.0 || c.x > spec.width || c.y > spec.height) return false;
  if (distance(c, spec.start) < spec.keepClearRadius + r) return false;
  if (distance(c, spec.goal) < spec.keepClearRadius + r) return false;
  return !overlapsAny(trees, c, r);
}

void addUniformTrees(std::vector<Tree>& trees, double density, const ForestSpec& spec,
                     std::mt19937_64& rng) {
  std::poisson_distribution<long> count(density * spec.width * spec.height);
  std::uniform_real_distribution<double> ux(0.0, spec.width);
  std::uniform_real_distribution<double> uy(0.0, spec.height);
  std::uniform_real_distribution<double> ud(spec.diameterMin, spec.diameterMax);
  const long n = density > 0.0 ? count(rng) : 0;
  for (long i = 0; i < n; ++i) {
    const double d = ud(rng);
    for (int attempt = 0; attempt < spec.maxAttemptsPerTree; ++attempt) {
      const Point2 c{ux(rng), uy(rng)};
      if (admissible(trees, c, 0.5 * d, spec)) {
        trees.push_back({c, d});
        break;
      }
    }
  }
}

void checkForestArgs(double density, const ForestSpec& spec) {
  if (!(density >= 0.0)) throw std::invalid_argument("density must be >= 0");
  if (!(spec.width > 0.0 && spec.height > 0.0)) throw std::invalid_argument("bounds must be positive");
  if (!(spec.diameterMin > 0.0 && spec.diameterMax >= spec.diameterMin)) {
    throw std::invalid_argument("diameter range must satisfy 0 < min <= max");
  }
}

}  // namespace

ForestWorld generateUniformForest(double density, const ForestSpec& spec, std::mt19937_64& rng) {
  checkForestArgs(density, spec);
  ForestWorld world;
  world.width = spec.width;
  world.height = spec.height;
  addUniformTrees(world.obstacles, density, spec, rng);
  return world;
}

ForestWorld generateClusterForest(double density, const ForestSpec& spec,
                                  const ClusterParams& clusters, std::mt19937_64& rng) {
  checkForestArgs(density, spec);
  ForestWorld world;
  world.width = spec.width;
  world.height = spec.height;
  std::uniform_real_distribution<double> jitter(-clusters.corridorHalfHeight,
                                                clusters.corridorHalfHeight);
  std::normal_distribution<double> scatter(0.0, clusters.stddev);
  std::uniform_real_distribution<double> ud(spec.diameterMin, spec.diameterMax);
  for (int k = 0; k < clusters.count; ++k) {
    const double f = static_cast<double>(k + 1) / static_cast<double>(clusters.count + 1);
    Point2 centroid = spec.start + (spec.goal - spec.start) * f;
    centroid.y += jitter(rng);
    for (int i = 0; i < clusters.treesPerCluster; ++i) {
      const double d = ud(rng);
      for (int attempt = 0; attempt < spec.maxAttemptsPerTree; ++attempt) {
        const double dx = scatter(rng);
        const double dy = scatter(rng);
        const Point2 c{centroid.x + dx, centroid.y + dy};
        if (admissible(world.obstacles, c, 0.5 * d, spec)) {
          world.obstacles.push_back({c, d});
          break;
        }
      }
    }
  }
  addUniformTrees(world.obstacles, density, spec, rng);
  return world;
}

std::vector<Tree> makeBarrier(double width, double height, const BarrierParams& params) {
  const double x0 = -params.endOffset;
  const double x1 = width + params.endOffset;
  const double y0 = -params.sideOffset;
  const double y1 = height + params.sideOffset;
  const std::array<Point2, 5> corners{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}};
  const double spacing = params.diameter + params.gap;
  std::vector<Tree> out;
  for (std::size_t e = 0; e < 4; ++e) {
    const Point2 a = corners[e];
    const Point2 b = corners[e + 1];
    const auto n = static_cast<long>(std::ceil(distance(a, b) / spacing));
    for (long i = 0; i < n; ++i) {
      out.push_back({a + (b - a) * (static_cast<double>(i) / static_cast<double>(n)), params.diameter});
    }
  }
  return out;
}

double speedForClearance(const SpeedLimits& limits, double clearance) {
  const double span = limits.fastClearance - limits.slowClearance;
  if (span <= 0.0) return clearance >= limits.fastClearance ? limits.vMax : limits.vMin;
  const double t = std::clamp((clearance - limits.slowClearance) / span, 0.0, 1.0);
  return limits.vMin + t * (limits.vMax - limits.vMin);
}

Pose2 stepRobot(const Pose2& pose, std::span<const Point2> waypoints, const SpeedLimits& limits,
                double nearestObstacleDistance, double dt, const TrackingParams& tracking) {
  if (waypoints.empty() || !(dt > 0.0)) return pose;
  const Point2 pos = pose.position();
  std::vector<Point2> path(waypoints.begin(), waypoints.end());
  if (path.size() == 1) path.insert(path.begin(), pos);

  double sClosest = 0.0;
  double bestDist = std::numeric_limits<double>::infinity();
  double walked = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Point2 a = path[i - 1];
    const Point2 ab = path[i] - a;
    const double len = ab.norm();
    double t = 0.0;
    if (len > 0.0) t = std::clamp(dot(pos - a, ab) / (len * len), 0.0, 1.0);
    const double d = distance(pos, a + ab * t);
    if (d < bestDist) {
      bestDist = d;
      sClosest = walked + t * len;
    }
    walked += len;
  }
  const double total = walked;
  const Point2 end = path.back();
  const double toEnd = std::max(distance(pos, end), total - sClosest);
  if (toEnd < 1e-3) return pose;

  Point2 target = pointAlongPolyline(path, std::min(total, sClosest + tracking.lookahead));
  double lookDist = distance(pos, target);
  if (lookDist < 1e-6) {
    target = end;
    lookDist = distance(pos, target);
  }
  const double alpha =
      normalizeAngle(std::atan2(target.y - pos.y, target.x - pos.x) - pose.theta);
  if (std::abs(alpha) > tracking.rotateInPlaceAbove) {
    const double maxTurn = tracking.maxTurnRate * dt;
    return {pose.x, pose.y, pose.theta + std::clamp(alpha, -maxTurn, maxTurn)};
  }

  double v = std::min(speedForClearance(limits, nearestObstacleDistance), toEnd / dt);
  const double kappa = 2.0 * std::sin(alpha) / lookDist;
  if (std::abs(v * kappa) > tracking.maxTurnRate) v = tracking.maxTurnRate / std::abs(kappa);
  const double s = v * dt;
  if (std::abs(kappa) < 1e-9) {
    return {pose.x + s * std::cos(pose.theta), pose.y + s * std::sin(pose.theta), pose.theta};
  }
  const double theta1 = pose.theta + kappa * s;
  return {pose.x + (std::sin(theta1) - std::sin(pose.theta)) / kappa,
          pose.y - (std::cos(theta1) - std::cos(pose.theta)) / kappa, theta1};
}

void validate(const EpisodeConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(c.density >= 0.0, "density must be >= 0");
  require(c.replanRate > 0.0, "replan rate must be > 0");
  require(c.sensor.detectionRate > 0.0, "detection rate must be > 0");
  require(c.dt > 0.0, "dt must be > 0");
  require(c.maxSimTime > 0.0, "max sim time must be > 0");
  require(c.robotWidth > 0.0, "robot width must be > 0");
  require(c.speed.vMin > 0.0 && c.speed.vMax >= c.speed.vMin, "speed range must satisfy 0 < v_min <= v_max");
  require(c.goalTolerance > 0.0, "goal tolerance must be > 0");
  require(c.maxConsecutiveFailures >= 1, "max consecutive failures must be >= 1");
  require(c.mh.nHyp >= 1, "n_hyp must be >= 1");
  require(c.mh.pTarget >= 0.0 && c.mh.pTarget < 1.0, "p_target must lie in [0, 1)");
  require(c.mh.pMin >= 0.0 && c.mh.pMin < c.mh.pTarget, "p_min must lie in [0, p_target)");
  require(c.mh.alphaDist >= 0.0 && c.mh.alphaSafe >= 0.0, "alpha weights must be >= 0");
  require(c.mh.dLocal > 0.0, "d_local must be > 0");
  require(c.graph.rShort <= c.graph.maxGraphRange, "r_short must not exceed the graph range");
  require(c.sensor.maxRange > 0.0, "max range must be > 0");
  require(c.sensor.fov > 0.0 && c.sensor.fov <= 2.0 * 3.14159265358979323846, "fov must lie in (0, 2 pi]");
  require(c.baselineResolution > 0.0, "baseline resolution must be > 0");
  require(c.local.resolution > 0.0, "local planner resolution must be > 0");
}

ForestWorld generateWorld(const EpisodeConfig& config, std::mt19937_64& rng) {
  ForestSpec spec = config.forest;
  spec.start = config.start.position();
  spec.goal = config.goal;
  ForestWorld world = config.distribution == ForestDistribution::Uniform
                          ? generateUniformForest(config.density, spec, rng)
                          : generateClusterForest(config.density, spec, config.clusters, rng);
  world.barrier = makeBarrier(spec.width, spec.height, config.barrier);
  return world;
}

namespace {

constexpr double kBarrierVariance = 1e-6;

struct Planner {
  const EpisodeConfig& config;
  std::vector<LandmarkEstimate> barrierEstimates;
  std::vector<Disc> barrierDiscs;
  GraphParams graph;
  LocalPlannerParams local;
  SmootherParams smoother;

  explicit Planner(const EpisodeConfig& c, const ForestWorld& world)
      : config(c), graph(c.graph), local(c.local), smoother(c.smoother) {
    const double width = c.robotWidth + 2.0 * c.planningMargin;
    graph.robotWidth = width;
    graph.pTarget = c.mh.pTarget;
    local.robotWidth = width;
    local.windowHalfSize = c.mh.dLocal + 5.0;
    smoother.clearanceThreshold = width;
    long id = -2;
    for (const auto& t : world.barrier) {
      LandmarkEstimate e;
      e.id = id--;
      e.positionMean = t.center;
      e.positionCov = Eigen::Matrix2d::Identity() * kBarrierVariance;
      e.diameterMean = t.diameter;
      e.diameterVar = kBarrierVariance;
      e.numUpdates = std::numeric_limits<int>::max();
      barrierEstimates.push_back(e);
      barrierDiscs.push_back({t.center, t.radius()});
    }
  }

  std::vector<Disc> mappedDiscs(std::span<const LandmarkEstimate> estimates, const Point2& near,
                                double range) const {
    std::vector<Disc> out;
    for (const auto& e : estimates) {
      if (e.numUpdates < 1) continue;
      if (distance(e.positionMean, near) > range) continue;
      out.push_back({e.positionMean, 0.5 * e.diameterMean});
    }
    for (const auto& d : barrierDiscs) {
      if (distance(d.center, near) <= range) out.push_back(d);
    }
    return out;
  }

  std::optional<std::vector<Point2>> globalPath(std::span<const LandmarkEstimate> estimates,
                                                const Point2& robot, CycleStats& stats) const {
    if (config.planner == PlannerKind::MultiHypothesis) {
      std::vector<LandmarkEstimate> lms = selectGraphLandmarks(estimates, robot, graph);
      for (const auto& b : barrierEstimates) {
        if (distance(b.positionMean, robot) <= graph.maxGraphRange) lms.push_back(b);
      }
      const NavGraph g = buildNavigationGraph(lms, robot, config.goal, graph);
      stats.graphVertices = g.vertices.size();
      stats.graphEdges = g.edges.size();
      const PlanResult res = planMultipleHypothesis(g, config.mh, robot);
      stats.hypotheses = res.candidates.size();
      if (!res.found()) return std::nullopt;
      std::vector<Point2> path{robot};
      const auto& best = res.candidates[*res.bestIndex];
      for (std::size_t k = 1; k < best.vertices.size(); ++k) {
        path.push_back(g.vertices[best.vertices[k]].position);
      }
      return path;
    }
    const std::vector<Disc> discs =
        mappedDiscs(estimates, robot, std::numeric_limits<double>::infinity());
    const GridBounds bounds{{std::min(0.0, robot.x) - 1.0, 0.0},
                            {std::max(config.forest.width, robot.x) + 1.0, config.forest.height}};
    auto grid = baselineGlobalAStar(robot, config.goal, discs, local.robotWidth, bounds,
                                    config.baselineResolution);
    if (!grid) return std::nullopt;
    return grid->polyline;
  }

  /// Local waypoints, or nothing when the local planner fails.
  std::optional<std::vector<Point2>> localPath(std::span<const LandmarkEstimate> estimates,
                                               const Pose2& pose,
                                               const std::vector<Point2>& global) const {
    const double reach = local.windowHalfSize * std::numbers::sqrt2 + 1.0;
    const std::vector<Disc> discs = mappedDiscs(estimates, pose.position(), reach);
    const ObstacleField field(discs, 0.5 * local.robotWidth);
    std::optional<Point2> goal;
    for (double d = config.mh.dLocal; d > 0.0; d -= 0.25) {
      const Point2 p = pointAlongPolyline(global, d);
      if (field.pointFree(p)) {
        goal = p;
        break;
      }
    }
    if (!goal) return std::nullopt;
    auto raw = hybridAStar(pose, *goal, discs, local);
    if (!raw) return std::nullopt;
    return smoothPath(raw->waypoints, discs, local.robotWidth, smoother).path;
  }
};

double nearestClearance(std::span<const LandmarkEstimate> estimates,
                        std::span<const Disc> barrier, const Point2& p, double robotRadius) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : estimates) {
    best = std::min(best, distance(e.positionMean, p) - 0.5 * e.diameterMean);
  }
  for (const auto& d : barrier) best = std::min(best, distance(d.center, p) - d.radius);
  return best - robotRadius;
}

bool stepTouchesMap(std::span<const LandmarkEstimate> estimates, const Point2& from,
                    const Point2& to, double robotRadius) {
  for (const auto& e : estimates) {
    const double r = 0.5 * e.diameterMean + robotRadius;
    const double along = pointSegmentDistance(e.positionMean, from, to) - r;
    if (along < 0.0 && along < distance(e.positionMean, from) - r - 1e-9) return true;
  }
  return false;
}

}  // namespace

EpisodeRecord runEpisode(const EpisodeConfig& config, ForestWorld* worldOut) {
  const auto wallStart = std::chrono::steady_clock::now();
  validate(config);
  std::mt19937_64 rng(config.seed);
  ForestWorld world = generateWorld(config, rng);
  const Planner planner(config, world);
  const double robotRadius = 0.5 * config.robotWidth;

  EpisodeRecord rec;
  rec.seed = config.seed;
  rec.numTrees = world.obstacles.size();

  const long detectEvery = std::max(1L, std::lround(1.0 / (config.sensor.detectionRate * config.dt)));
  const long replanEvery = std::max(1L, std::lround(1.0 / (config.replanRate * config.dt)));
  const long maxTicks = std::lround(config.maxSimTime / config.dt);

  std::vector<LandmarkEstimate> estimates;
  std::vector<Point2> waypoints;
  Pose2 pose = config.start;
  int failures = 0;
  rec.trajectory.push_back({0.0, pose});

  long tick = 0;
  for (;; ++tick) {
    const double t = static_cast<double>(tick) * config.dt;
    rec.simTime = t;
    if (distance(pose.position(), config.goal) <= config.goalTolerance) {
      rec.outcome = Outcome::Success;
      break;
    }
    if (tick >= maxTicks) {
      rec.outcome = Outcome::Timeout;
      break;
    }
    if (tick % detectEvery == 0) {
      const auto labeled = simulateDetections(world.obstacles, pose, config.sensor, rng);
      std::vector<Detection> detections;
      detections.reserve(labeled.size());
      for (const auto& l : labeled) detections.push_back(l.detection);
      const Association assoc = associate(detections, estimates, pose, config.sensor);
      estimates = updateLandmarks(estimates, assoc, detections, pose, config.sensor);
    }
    if (tick % replanEvery == 0) {
      CycleStats stats;
      stats.t = t;
      stats.landmarks = estimates.size();
      auto global = planner.globalPath(estimates, pose.position(), stats);
      stats.globalOk = global.has_value();
      std::optional<std::vector<Point2>> path;
      if (global) path = planner.localPath(estimates, pose, *global);
      stats.localOk = path.has_value();
      rec.cycles.push_back(stats);
      if (path) {
        failures = 0;
        waypoints = std::move(*path);
      } else {
        waypoints.clear();
        if (++failures >= config.maxConsecutiveFailures) {
          rec.outcome = Outcome::Stopped;
          break;
        }
      }
    }

    const double clearance =
        nearestClearance(estimates, planner.barrierDiscs, pose.position(), robotRadius);
    Pose2 next = stepRobot(pose, waypoints, config.speed, clearance, config.dt, config.tracking);
    if (config.collisionGuard &&
        stepTouchesMap(estimates, pose.position(), next.position(), robotRadius)) {
      next = pose;
    }
    bool crashed = false;
    for (const auto& tree : world.obstacles) {
      if (pointSegmentDistance(tree.center, pose.position(), next.position()) <
          tree.radius() + robotRadius) {
        crashed = true;
        break;
      }
    }
    rec.pathLength += distance(pose.position(), next.position());
    pose = next;
    rec.trajectory.push_back({t + config.dt, pose});
    if (crashed) {
      rec.simTime = t + config.dt;
      rec.outcome = Outcome::Crash;
      break;
    }
  }
  rec.wallTime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wallStart).count();
  if (worldOut) *worldOut = std::move(world);
  return rec;
}

}  // namespace mhplan
