#include "mhplan/safety.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace mhplan {

double normalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

FreeSpaceBelief freeSpace1D(const Obstacle1D& a, const Obstacle1D& b) {
  const Obstacle1D& left = a.position.mean <= b.position.mean ? a : b;
  const Obstacle1D& right = a.position.mean <= b.position.mean ? b : a;
  FreeSpaceBelief s;
  s.muS = (right.position.mean - right.radius.mean) - (left.position.mean + left.radius.mean);
  s.varS = left.position.variance + left.radius.variance + right.position.variance +
           right.radius.variance;
  return s;
}

double safePassageProbability1D(const FreeSpaceBelief& s, double robotWidth) {
  if (s.varS <= 0.0) {
    if (s.muS > robotWidth) return 1.0;
    if (s.muS == robotWidth) return 0.5;
    return 0.0;
  }
  // 1 - Phi((w - mu) / sigma), evaluated through erfc to keep tail precision.
  const double z = (robotWidth - s.muS) / std::sqrt(s.varS);
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

FreeSpaceBelief freeSpace2D(const ObstacleBelief2D& a, const ObstacleBelief2D& b) {
  const Point2 delta = b.mean - a.mean;
  if (delta.norm() <= 1e-9) {
    throw CoincidentObstaclesError("safe passage: coincident obstacle means");
  }
  const double theta = std::atan2(delta.y, delta.x);
  const double c = std::cos(theta);
  const double s = std::sin(theta);

  // Rotation by -theta; only the first row is needed after marginalising y'.
  auto project = [&](const ObstacleBelief2D& o) {
    Obstacle1D out;
    out.position.mean = c * o.mean.x + s * o.mean.y;
    out.position.variance =
        std::max(0.0, c * c * o.covXX + 2.0 * c * s * o.covXY + s * s * o.covYY);
    out.radius = o.radius();
    return out;
  };
  return freeSpace1D(project(a), project(b));
}

double safePassageProbability2D(const ObstacleBelief2D& a, const ObstacleBelief2D& b,
                                double robotWidth) {
  return safePassageProbability1D(freeSpace2D(a, b), robotWidth);
}

}  // namespace mhplan
