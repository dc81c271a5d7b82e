#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mhplan {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2() = default;
  Point2(double x_, double y_) : x(x_), y(y_) {}

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  Point2 operator/(double s) const { return {x / s, y / s}; }
  bool operator==(const Point2&) const = default;

  double norm() const { return std::hypot(x, y); }
  double squaredNorm() const { return x * x + y * y; }
  bool isFinite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Point2 operator*(double s, const Point2& p) { return p * s; }
inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

/// Wraps an angle into (-pi, pi].
double normalizeAngle(double theta);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalizeAngle(theta_)) {}

  Point2 position() const { return {x, y}; }
  bool operator==(const Pose2&) const = default;
};

struct Disc {
  Point2 center;
  double radius = 0.0;
};

enum class GeometryErrc { Collinear, TooFewSites, AllCollinear };

class GeometryError : public std::runtime_error {
 public:
  GeometryError(GeometryErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  GeometryErrc code() const { return code_; }

 private:
  GeometryErrc code_;
};

/// Triangles below this absolute signed area (m^2) are treated as collinear.
inline constexpr double kDegenerateArea = 1e-12;
/// Sites closer than this are merged before triangulation.
inline constexpr double kDuplicateSiteTolerance = 1e-9;

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
double orient2d(const Point2& a, const Point2& b, const Point2& c);

/// Positive when d lies strictly inside the circumcircle of the
/// counter-clockwise triangle (a, b, c).
double inCircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

struct Circle {
  Point2 center;
  double radius = 0.0;
};

/// Throws GeometryError(Collinear) when |signed area| < kDegenerateArea.
Circle circumcircle(const Point2& a, const Point2& b, const Point2& c);

bool segmentIntersectsSegment(const Point2& p1, const Point2& p2, const Point2& q1,
                              const Point2& q2);

/// True when the two segments cross at a single point interior to both.
/// Touching at an endpoint, or collinear overlap, does not count.
bool segmentsCrossStrictly(const Point2& p1, const Point2& p2, const Point2& q1,
                           const Point2& q2);

double pointSegmentDistance(const Point2& p, const Point2& a, const Point2& b);

/// True iff the minimum distance from segment p1-p2 to center is < radius.
bool segmentIntersectsCircle(const Point2& p1, const Point2& p2, const Point2& center,
                             double radius);

/// Closed point-in-triangle test, orientation independent.
bool pointInTriangle(const Point2& p, const Point2& a, const Point2& b, const Point2& c);

struct Triangulation {
  /// Deduplicated sites, in first-occurrence input order.
  std::vector<Point2> sites;
  /// sourceIndex[k] is the index in the caller's input of sites[k].
  std::vector<std::size_t> sourceIndex;
  /// Counter-clockwise index triplets into sites.
  std::vector<std::array<std::size_t, 3>> triangles;
  /// Site index pairs (first < second), sorted lexicographically.
  std::vector<std::pair<std::size_t, std::size_t>> faces;
  /// For each face, the one (hull) or two (interior) adjacent triangle indices.
  std::vector<std::vector<std::size_t>> faceTriangles;
  /// For each triangle, its three face indices: (v0,v1), (v1,v2), (v2,v0).
  std::vector<std::array<std::size_t, 3>> triangleFaces;

  /// Index of the face joining two sites, or -1.
  long findFace(std::size_t a, std::size_t b) const;
  /// Index of a triangle containing p (closed test), or -1.
  long locate(const Point2& p) const;
  bool isHullFace(std::size_t face) const { return faceTriangles[face].size() == 1; }
};

/// Incremental Bowyer-Watson triangulation. Sites are inserted in input order;
/// a site lying exactly on a circumcircle does not invalidate that triangle.
/// Throws GeometryError(TooFewSites) for fewer than three distinct sites and
/// GeometryError(AllCollinear) when no non-degenerate triangle exists.
Triangulation delaunayTriangulate(std::span<const Point2> sites);

}  // namespace mhplan
