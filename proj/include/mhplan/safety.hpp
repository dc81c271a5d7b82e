#pragma once

#include <stdexcept>

#include "mhplan/geometry.hpp"

namespace mhplan {

struct GaussianScalar {
  double mean = 0.0;
  double variance = 0.0;
};

/// 1D obstacle: Gaussian centre position and Gaussian radius.
struct Obstacle1D {
  GaussianScalar position;
  GaussianScalar radius;
};

/// Gaussian belief over an obstacle's planar position and diameter.
/// Position and diameter are uncorrelated.
struct ObstacleBelief2D {
  Point2 mean;
  double diameter = 0.0;
  double covXX = 0.0;
  double covXY = 0.0;
  double covYY = 0.0;
  double varDiameter = 0.0;

  GaussianScalar radius() const { return {0.5 * diameter, 0.25 * varDiameter}; }
};

/// Width of the free space between two obstacles, S ~ N(muS, varS).
struct FreeSpaceBelief {
  double muS = 0.0;
  double varS = 0.0;
};

class CoincidentObstaclesError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Standard normal CDF.
double normalCdf(double z);

/// Gap between the facing edges of two 1D obstacles. Argument order does not
/// matter: the obstacle with the smaller mean position is taken as the left one.
FreeSpaceBelief freeSpace1D(const Obstacle1D& a, const Obstacle1D& b);

/// P(S > robotWidth). A zero-variance gap gives the step function, 0.5 at equality.
double safePassageProbability1D(const FreeSpaceBelief& s, double robotWidth);

/// Projects both beliefs onto the line through their mean centres and returns the
/// free-space belief along it.
FreeSpaceBelief freeSpace2D(const ObstacleBelief2D& a, const ObstacleBelief2D& b);

/// Probability that a robot of the given width fits between the two obstacles.
/// Throws CoincidentObstaclesError when the means are within 1e-9 m.
double safePassageProbability2D(const ObstacleBelief2D& a, const ObstacleBelief2D& b,
                                double robotWidth);

}  // namespace mhplan
