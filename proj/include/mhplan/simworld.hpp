#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mhplan/estimation.hpp"
#include "mhplan/geometry.hpp"
#include "mhplan/localplanner.hpp"
#include "mhplan/mhplanner.hpp"
#include "mhplan/navgraph.hpp"

namespace mhplan {

enum class ForestDistribution { Uniform, Clusters };
enum class PlannerKind { Baseline, MultiHypothesis };
enum class Outcome { Success, Crash, Stopped, Timeout };

std::string toString(ForestDistribution d);
std::string toString(PlannerKind k);
std::string toString(Outcome o);

struct ForestWorld {
  double width = 40.0;
  double height = 10.0;
  std::vector<Tree> obstacles;
  /// Artificial obstacles ringing the bounds; known to the planners, never sensed.
  std::vector<Tree> barrier;
};

struct ForestSpec {
  double width = 40.0;
  double height = 10.0;
  double diameterMin = 0.2;
  double diameterMax = 0.5;
  Point2 start{0.0, 5.0};
  Point2 goal{40.0, 5.0};
  /// Radius around start and goal that no trunk may touch.
  double keepClearRadius = 1.0;
  int maxAttemptsPerTree = 100;
};

struct ClusterParams {
  int count = 3;
  int treesPerCluster = 40;
  double stddev = 1.5;
  /// Centroid y is drawn uniformly within this distance of the start-goal line.
  double corridorHalfHeight = 2.0;
};

struct BarrierParams {
  double diameter = 0.5;
  /// Free space between neighbouring barrier trunks.
  double gap = 0.4;
  /// Offset of the barrier line outside the top and bottom bounds.
  double sideOffset = 0.5;
  /// Offset of the barrier line behind the start and beyond the goal edge.
  double endOffset = 3.0;
};

/// Poisson number of trunks with uniform centres and diameters, rejection
/// sampled so that no two trunks overlap.
ForestWorld generateUniformForest(double density, const ForestSpec& spec, std::mt19937_64& rng);

/// Gaussian clusters centred on the start-goal corridor followed by a uniform
/// background at the given density.
ForestWorld generateClusterForest(double density, const ForestSpec& spec,
                                  const ClusterParams& clusters, std::mt19937_64& rng);

std::vector<Tree> makeBarrier(double width, double height, const BarrierParams& params);

struct SpeedLimits {
  double vMin = 1.0;
  double vMax = 5.0;
  /// Clearances at which the speed reaches vMin and vMax.
  double slowClearance = 1.0;
  double fastClearance = 5.0;
};

/// Linear speed schedule over clearance, clamped to [vMin, vMax].
double speedForClearance(const SpeedLimits& limits, double clearance);

struct TrackingParams {
  double lookahead = 0.2;
  double maxTurnRate = 3.0;
  /// Heading error above which the robot turns on the spot.
  double rotateInPlaceAbove = 1.0;
};

/// One pure-pursuit control step along the waypoint polyline.
Pose2 stepRobot(const Pose2& pose, std::span<const Point2> waypoints, const SpeedLimits& limits,
                double nearestObstacleDistance, double dt,
                const TrackingParams& tracking = TrackingParams{});

struct EpisodeConfig {
  double density = 0.3;
  ForestDistribution distribution = ForestDistribution::Uniform;
  ForestSpec forest;
  ClusterParams clusters;
  BarrierParams barrier;
  Pose2 start{0.0, 5.0, 0.0};
  Point2 goal{40.0, 5.0};
  double goalTolerance = 1.0;
  /// Physical robot width; crash detection uses a disc of this diameter.
  double robotWidth = 0.5;
  /// Clearance added on each side of the robot by every planner.
  double planningMargin = 0.05;
  double replanRate = 1.0;
  SpeedLimits speed;
  TrackingParams tracking;
  double dt = 0.1;
  double maxSimTime = 120.0;
  int maxConsecutiveFailures = 3;
  /// Hold position instead of executing a step that would bring the robot
  /// into contact with a mapped obstacle.
  bool collisionGuard = true;
  PlannerKind planner = PlannerKind::MultiHypothesis;
  PlannerParams mh{.nHyp = 5, .pTarget = 0.95, .pMin = 0.01};
  GraphParams graph;
  LocalPlannerParams local;
  SmootherParams smoother;
  double baselineResolution = 0.2;
  SensorParams sensor;
  std::uint64_t seed = 1;
};

/// Throws std::invalid_argument naming the first invalid field.
void validate(const EpisodeConfig& config);

struct TrajectorySample {
  double t = 0.0;
  Pose2 pose;
};

struct CycleStats {
  double t = 0.0;
  std::size_t landmarks = 0;
  std::size_t graphVertices = 0;
  std::size_t graphEdges = 0;
  std::size_t hypotheses = 0;
  bool globalOk = false;
  bool localOk = false;
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  double simTime = 0.0;
  double pathLength = 0.0;
  double wallTime = 0.0;
  std::size_t numTrees = 0;
  std::vector<TrajectorySample> trajectory;
  std::vector<CycleStats> cycles;
};

ForestWorld generateWorld(const EpisodeConfig& config, std::mt19937_64& rng);

/// Closed-loop run in a forest drawn from the config seed.
EpisodeRecord runEpisode(const EpisodeConfig& config, ForestWorld* worldOut = nullptr);

}  // namespace mhplan
