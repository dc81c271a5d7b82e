#include "mhplan/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace mhplan {

namespace {

constexpr double kMinSigma = 1e-6;

Eigen::Matrix2d measurementNoise(double range, const SensorParams& params) {
  const double sr = std::max(params.sigmaRange(range), kMinSigma);
  const double sp = std::max(params.sigmaPhi, kMinSigma);
  return Eigen::Vector2d(sr * sr, sp * sp).asDiagonal();
}

Eigen::Matrix2d measurementJacobian(const Point2& landmark, const Pose2& pose) {
  const double dx = landmark.x - pose.x;
  const double dy = landmark.y - pose.y;
  const double q = std::max(dx * dx + dy * dy, 1e-12);
  const double r = std::sqrt(q);
  Eigen::Matrix2d h;
  h << dx / r, dy / r, -dy / q, dx / q;
  return h;
}

Eigen::Vector2d innovation(const Detection& detection, const Eigen::Vector2d& predicted) {
  return {detection.range - predicted(0), normalizeAngle(detection.bearing - predicted(1))};
}

}  // namespace

ObstacleBelief2D LandmarkEstimate::belief() const {
  ObstacleBelief2D b;
  b.mean = positionMean;
  b.diameter = diameterMean;
  b.covXX = positionCov(0, 0);
  b.covXY = 0.5 * (positionCov(0, 1) + positionCov(1, 0));
  b.covYY = positionCov(1, 1);
  b.varDiameter = diameterVar;
  return b;
}

std::vector<LabeledDetection> simulateDetections(std::span<const Tree> world, const Pose2& pose,
                                                 const SensorParams& params,
                                                 std::mt19937_64& rng) {
  const Point2 origin = pose.position();
  struct Visible {
    std::size_t id;
    double range;
    double bearing;
  };
  std::vector<Visible> candidates;
  std::vector<std::size_t> nearby;
  for (std::size_t i = 0; i < world.size(); ++i) {
    const Point2 d = world[i].center - origin;
    const double range = d.norm();
    if (range <= params.maxRange + world[i].radius()) nearby.push_back(i);
    if (range > params.maxRange || range <= 0.0) continue;
    const double bearing = normalizeAngle(std::atan2(d.y, d.x) - pose.theta);
    if (std::abs(bearing) > 0.5 * params.fov) continue;
    candidates.push_back({i, range, bearing});
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<LabeledDetection> out;
  for (const auto& c : candidates) {
    const Point2& target = world[c.id].center;
    bool occluded = false;
    for (std::size_t k : nearby) {
      if (k == c.id) continue;
      const Tree& blocker = world[k];
      // A trunk the robot is already inside cannot be seen past, but is not
      // meaningful as an occluder either.
      if (distance(blocker.center, origin) < blocker.radius()) continue;
      if (segmentIntersectsCircle(origin, target, blocker.center, blocker.radius())) {
        occluded = true;
        break;
      }
    }
    if (occluded) continue;

    const double trueDiameter = world[c.id].diameter;
    const double nr = gauss(rng);
    const double np = gauss(rng);
    const double nd = gauss(rng);
    Detection det;
    det.range = std::max(c.range + params.sigmaRange(c.range) * nr, 1e-3);
    det.bearing = std::clamp(normalizeAngle(c.bearing + params.sigmaPhi * np), -0.5 * params.fov,
                             0.5 * params.fov);
    det.diameter =
        std::max(trueDiameter + params.sigmaDiameter(c.range, trueDiameter) * nd, kMinDiameter);
    out.push_back({det, c.id});
  }
  return out;
}

Eigen::Vector2d predictMeasurement(const Point2& landmark, const Pose2& pose) {
  const Point2 d = landmark - pose.position();
  return {d.norm(), normalizeAngle(std::atan2(d.y, d.x) - pose.theta)};
}

double mahalanobisSquared(const Detection& detection, const LandmarkEstimate& landmark,
                          const Pose2& pose, const SensorParams& params) {
  const Eigen::Vector2d predicted = predictMeasurement(landmark.positionMean, pose);
  const Eigen::Matrix2d h = measurementJacobian(landmark.positionMean, pose);
  const Eigen::Matrix2d s =
      h * landmark.positionCov * h.transpose() + measurementNoise(predicted(0), params);
  const Eigen::Vector2d nu = innovation(detection, predicted);
  return nu.dot(s.ldlt().solve(nu));
}

Association associate(std::span<const Detection> detections,
                      std::span<const LandmarkEstimate> estimates, const Pose2& pose,
                      const SensorParams& params, double gate) {
  struct Pair {
    double d2;
    std::size_t det;
    std::size_t est;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    const double a = pose.theta + det.bearing;
    const Point2 measured = pose.position() + Point2{std::cos(a), std::sin(a)} * det.range;
    for (std::size_t j = 0; j < estimates.size(); ++j) {
      const LandmarkEstimate& est = estimates[j];
      // Cheap Euclidean pre-gate: anything this far off is many sigma away.
      const double spread = 3.0 * std::sqrt(est.positionCov.trace()) +
                            3.0 * params.sigmaRange(det.range) +
                            3.0 * params.sigmaPhi * det.range + 1.0;
      if (distance(measured, est.positionMean) > 4.0 * spread) continue;
      const double d2 = mahalanobisSquared(det, est, pose, params);
      if (d2 <= gate) pairs.push_back({d2, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.d2, a.det, a.est) < std::tie(b.d2, b.det, b.est);
  });

  Association out;
  out.landmarkId.assign(detections.size(), kNewLandmark);
  out.distanceSquared.assign(detections.size(), 0.0);
  std::vector<char> estimateUsed(estimates.size(), 0);
  for (const auto& p : pairs) {
    if (out.landmarkId[p.det] != kNewLandmark || estimateUsed[p.est]) continue;
    out.landmarkId[p.det] = estimates[p.est].id;
    out.distanceSquared[p.det] = p.d2;
    estimateUsed[p.est] = 1;
  }
  return out;
}

LandmarkEstimate initializeLandmark(long id, const Detection& detection, const Pose2& pose,
                                    const SensorParams& params) {
  const double a = pose.theta + detection.bearing;
  const double c = std::cos(a);
  const double s = std::sin(a);
  LandmarkEstimate est;
  est.id = id;
  est.positionMean = pose.position() + Point2{c, s} * detection.range;
  Eigen::Matrix2d j;
  j << c, -detection.range * s, s, detection.range * c;
  est.positionCov = j * measurementNoise(detection.range, params) * j.transpose();
  est.positionCov = 0.5 * (est.positionCov + est.positionCov.transpose());
  est.diameterMean = std::max(detection.diameter, kMinDiameter);
  const double sd =
      std::max(params.sigmaDiameter(detection.range, detection.diameter), kMinSigma);
  est.diameterVar = sd * sd;
  est.numUpdates = 1;
  return est;
}

std::vector<LandmarkEstimate> updateLandmarks(std::span<const LandmarkEstimate> estimates,
                                              const Association& assignment,
                                              std::span<const Detection> detections,
                                              const Pose2& pose, const SensorParams& params) {
  std::vector<LandmarkEstimate> out(estimates.begin(), estimates.end());
  long nextId = 0;
  for (const auto& e : out) nextId = std::max(nextId, e.id + 1);

  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    const long target = assignment.landmarkId[i];
    if (target == kNewLandmark) {
      out.push_back(initializeLandmark(nextId++, det, pose, params));
      continue;
    }
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const LandmarkEstimate& e) { return e.id == target; });
    if (it == out.end()) continue;
    LandmarkEstimate& est = *it;

    const Eigen::Vector2d predicted = predictMeasurement(est.positionMean, pose);
    const Eigen::Matrix2d h = measurementJacobian(est.positionMean, pose);
    const Eigen::Matrix2d r = measurementNoise(predicted(0), params);
    const Eigen::Matrix2d s = h * est.positionCov * h.transpose() + r;
    const Eigen::Matrix2d k = est.positionCov * h.transpose() * s.inverse();
    const Eigen::Vector2d nu = innovation(det, predicted);
    const Eigen::Vector2d dm = k * nu;
    est.positionMean = est.positionMean + Point2{dm(0), dm(1)};
    const Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity() - k * h;
    // Joseph form keeps the covariance symmetric positive definite.
    est.positionCov = ikh * est.positionCov * ikh.transpose() + k * r * k.transpose();
    est.positionCov = 0.5 * (est.positionCov + est.positionCov.transpose());

    const double sd =
        std::max(params.sigmaDiameter(det.range, est.diameterMean), kMinSigma);
    const double gain = est.diameterVar / (est.diameterVar + sd * sd);
    est.diameterMean = std::max(est.diameterMean + gain * (det.diameter - est.diameterMean),
                                kMinDiameter);
    est.diameterVar = (1.0 - gain) * est.diameterVar;
    ++est.numUpdates;
  }
  return out;
}

}  // namespace mhplan
