#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "mhplan/geometry.hpp"
#include "mhplan/safety.hpp"

namespace mhplan {

/// Ground-truth tree trunk.
struct Tree {
  Point2 center;
  double diameter = 0.0;

  double radius() const { return 0.5 * diameter; }
};

/// Range (m), bearing in the robot frame (rad) and diameter (m) of one tree.
struct Detection {
  double range = 0.0;
  double bearing = 0.0;
  double diameter = 0.0;
};

struct SensorParams {
  double maxRange = 20.0;
  double fov = 110.0 * 3.14159265358979323846 / 180.0;
  double sigmaR0 = 0.02;
  /// Quadratic range-noise coefficient (1/m).
  double kR = 0.0025;
  double sigmaPhi = 0.005;
  double sigmaD0 = 0.02;
  double kD = 0.3;
  double detectionRate = 2.0;

  double sigmaRange(double range) const { return sigmaR0 + kR * range * range; }
  double sigmaDiameter(double range, double diameter) const {
    return sigmaD0 + kD * diameter * (range / maxRange);
  }
};

struct LabeledDetection {
  Detection detection;
  /// Index into the ground-truth world; for evaluation only.
  std::size_t truthId = 0;
};

/// Every tree whose centre is in range and field of view and whose sight line
/// from the robot is not blocked by another trunk, with additive Gaussian noise.
std::vector<LabeledDetection> simulateDetections(std::span<const Tree> world, const Pose2& pose,
                                                 const SensorParams& params,
                                                 std::mt19937_64& rng);

struct LandmarkEstimate {
  long id = 0;
  Point2 positionMean;
  Eigen::Matrix2d positionCov = Eigen::Matrix2d::Identity();
  double diameterMean = 0.0;
  double diameterVar = 0.0;
  int numUpdates = 0;

  ObstacleBelief2D belief() const;
};

inline constexpr long kNewLandmark = -1;
/// Chi-square 0.99 quantile with two degrees of freedom.
inline constexpr double kDefaultAssociationGate = 9.210340371976184;
inline constexpr double kMinDiameter = 0.01;

/// Predicted (range, bearing) of a landmark position seen from pose.
Eigen::Vector2d predictMeasurement(const Point2& landmark, const Pose2& pose);

/// Squared Mahalanobis distance of a detection from a landmark, in range-bearing space.
double mahalanobisSquared(const Detection& detection, const LandmarkEstimate& landmark,
                          const Pose2& pose, const SensorParams& params);

struct Association {
  /// Matched landmark id per detection, or kNewLandmark.
  std::vector<long> landmarkId;
  /// Squared Mahalanobis distance of each match (0 for new landmarks).
  std::vector<double> distanceSquared;
};

/// Greedy one-to-one association in increasing Mahalanobis distance; matches
/// above the gate are rejected.
Association associate(std::span<const Detection> detections,
                      std::span<const LandmarkEstimate> estimates, const Pose2& pose,
                      const SensorParams& params, double gate = kDefaultAssociationGate);

/// EKF position update and scalar diameter filter for matched landmarks;
/// unmatched detections start new landmarks with ids above the current maximum.
std::vector<LandmarkEstimate> updateLandmarks(std::span<const LandmarkEstimate> estimates,
                                              const Association& assignment,
                                              std::span<const Detection> detections,
                                              const Pose2& pose, const SensorParams& params);

/// Landmark initialised from a single detection.
LandmarkEstimate initializeLandmark(long id, const Detection& detection, const Pose2& pose,
                                    const SensorParams& params);

}  // namespace mhplan
