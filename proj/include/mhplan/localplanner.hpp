#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mhplan/geometry.hpp"

namespace mhplan {

struct MotionPrimitive {
  /// Signed curvature (1/m); ignored for in-place rotations.
  double curvature = 0.0;
  /// Arc length (m); zero for in-place rotations.
  double length = 0.0;
  /// Heading change of an in-place rotation (rad).
  double rotation = 0.0;
  double costMultiplier = 1.0;

  bool isRotation() const { return length == 0.0; }
};

struct LocalPlannerParams {
  double robotWidth = 0.5;
  double resolution = 0.2;
  int headingBins = 72;
  double maxCurvature = 1.0;
  bool allowInPlaceRotation = true;
  double rotationStep = 3.14159265358979323846 / 6.0;
  /// Path-length equivalent cost of one in-place rotation step.
  double rotationCost = 0.3;
  /// Extra cost per unit |curvature| / maxCurvature on curved arcs.
  double turnPenalty = 0.2;
  double goalTolerance = 0.3;
  /// Half side length of the square search window around the start.
  double windowHalfSize = 10.0;
  std::size_t maxExpansions = 40000;
  double collisionStep = 0.05;

  double primitiveLength() const { return 1.5 * resolution; }
};

/// Arcs at curvatures {-k, -k/2, 0, k/2, k} plus optional in-place rotations.
std::vector<MotionPrimitive> makePrimitiveSet(const LocalPlannerParams& params);

/// Endpoint of a primitive applied to a pose.
Pose2 applyPrimitive(const Pose2& pose, const MotionPrimitive& primitive);

/// Obstacle discs inflated by half the robot width, bucketed for fast lookup.
class ObstacleField {
 public:
  ObstacleField(std::span<const Disc> obstacles, double inflation, double bucketSize = 1.0);

  bool pointFree(const Point2& p) const;
  bool segmentFree(const Point2& a, const Point2& b) const;
  /// Signed distance to the nearest inflated boundary (infinity when empty).
  double clearance(const Point2& p) const;
  /// Minimum clearance over a polyline, measured exactly per segment.
  double polylineClearance(std::span<const Point2> path) const;
  const std::vector<Disc>& discs() const { return discs_; }

 private:
  void candidates(const Point2& lo, const Point2& hi, std::vector<std::size_t>& out) const;

  std::vector<Disc> discs_;
  double bucket_;
  long minBx_ = 0, minBy_ = 0, nbx_ = 0, nby_ = 0;
  std::vector<std::vector<std::size_t>> buckets_;
  mutable std::vector<std::size_t> scratch_;
};

struct LocalPath {
  /// Positions ending exactly at the goal.
  std::vector<Point2> waypoints;
  std::vector<Pose2> poses;
  std::vector<MotionPrimitive> primitives;
  std::size_t expansions = 0;
};

/// Hybrid A* from start to goal among obstacle discs (un-inflated radii).
/// Discs that already contain the start are shrunk so the robot can leave them.
std::optional<LocalPath> hybridAStar(const Pose2& start, const Point2& goal,
                                     std::span<const Disc> obstacles,
                                     const LocalPlannerParams& params);

struct SmootherParams {
  double smoothWeight = 1.0;
  double obstacleWeight = 2.0;
  /// Clearance below which the obstacle penalty is active; defaults to the robot width.
  double clearanceThreshold = 0.5;
  double stepSize = 0.05;
  int maxIterations = 100;
};

struct SmoothResult {
  std::vector<Point2> path;
  /// Objective after each accepted iteration, starting with the input's.
  std::vector<double> costHistory;
};

double smoothnessCost(std::span<const Point2> path);

/// Gradient descent on smoothness plus a clearance penalty, endpoints fixed.
/// A step is accepted only if it lowers the objective, stays collision free and
/// does not reduce the path's minimum clearance.
SmoothResult smoothPath(std::span<const Point2> path, std::span<const Disc> obstacles,
                        double robotWidth, const SmootherParams& params);

struct GridPath {
  std::vector<Point2> polyline;
  double cost = 0.0;
};

struct GridBounds {
  Point2 min;
  Point2 max;
};

/// 8-connected A* with octile heuristic over cells that do not touch any
/// inflated obstacle disc. The start cell is always free.
std::optional<GridPath> baselineGlobalAStar(const Point2& start, const Point2& goal,
                                            std::span<const Disc> obstacles, double robotWidth,
                                            const GridBounds& bounds, double resolution);

/// Point at arc length d along a polyline (its last point if shorter).
Point2 pointAlongPolyline(std::span<const Point2> polyline, double d);

double polylineLength(std::span<const Point2> polyline);

}  // namespace mhplan
