#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "mhplan/geometry.hpp"

using namespace mhplan;

namespace {

// Circumcentre solved from the perpendicular-bisector linear system.
Point2 bisectorCentre(const Point2& a, const Point2& b, const Point2& c) {
  const double a11 = 2 * (b.x - a.x), a12 = 2 * (b.y - a.y);
  const double a21 = 2 * (c.x - a.x), a22 = 2 * (c.y - a.y);
  const double r1 = b.squaredNorm() - a.squaredNorm();
  const double r2 = c.squaredNorm() - a.squaredNorm();
  const double det = a11 * a22 - a12 * a21;
  return {(r1 * a22 - a12 * r2) / det, (a11 * r2 - r1 * a21) / det};
}

void expectEmptyCircumcircles(const Triangulation& t) {
  for (const auto& tri : t.triangles) {
    const Point2& a = t.sites[tri[0]];
    const Point2& b = t.sites[tri[1]];
    const Point2& c = t.sites[tri[2]];
    const Point2 o = bisectorCentre(a, b, c);
    const double r = distance(o, a);
    for (std::size_t k = 0; k < t.sites.size(); ++k) {
      if (k == tri[0] || k == tri[1] || k == tri[2]) continue;
      EXPECT_GE(distance(o, t.sites[k]), r * (1.0 - 1e-9)) << "site " << k << " inside";
    }
  }
}

void expectConsistent(const Triangulation& t) {
  std::map<std::pair<std::size_t, std::size_t>, int> edgeUse;
  for (std::size_t i = 0; i < t.triangles.size(); ++i) {
    const auto& tri = t.triangles[i];
    EXPECT_GT(orient2d(t.sites[tri[0]], t.sites[tri[1]], t.sites[tri[2]]), 0.0);
    for (int k = 0; k < 3; ++k) {
      const std::size_t u = tri[k], v = tri[(k + 1) % 3];
      const auto key = std::minmax(u, v);
      ++edgeUse[{key.first, key.second}];
      const long f = t.findFace(u, v);
      ASSERT_GE(f, 0);
      EXPECT_EQ(t.triangleFaces[i][k], static_cast<std::size_t>(f));
    }
  }
  ASSERT_EQ(edgeUse.size(), t.faces.size());
  for (std::size_t f = 0; f < t.faces.size(); ++f) {
    const int uses = edgeUse.at(t.faces[f]);
    EXPECT_TRUE(uses == 1 || uses == 2);
    EXPECT_EQ(t.faceTriangles[f].size(), static_cast<std::size_t>(uses));
  }
  // Euler: V - E + F = 2 with the outer face.
  EXPECT_EQ(static_cast<long>(t.sites.size()) - static_cast<long>(t.faces.size()) +
                static_cast<long>(t.triangles.size()),
            1);
}

}  // namespace

TEST(Circumcircle, RightTriangle) {
  const Circle c = circumcircle({0, 0}, {1, 0}, {0, 1});
  EXPECT_NEAR(c.center.x, 0.5, 1e-12);
  EXPECT_NEAR(c.center.y, 0.5, 1e-12);
  EXPECT_NEAR(c.radius, std::sqrt(2.0) / 2, 1e-12);
}

TEST(Circumcircle, Equilateral) {
  const Circle c = circumcircle({0, 0}, {2, 0}, {1, std::sqrt(3.0)});
  EXPECT_NEAR(c.center.x, 1.0, 1e-12);
  EXPECT_NEAR(c.center.y, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(c.radius, 2.0 / std::sqrt(3.0), 1e-12);
}

TEST(Circumcircle, CollinearThrows) {
  try {
    circumcircle({0, 0}, {1, 0}, {2, 0});
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.code(), GeometryErrc::Collinear);
  }
}

TEST(Circumcircle, MatchesBisectorSolution) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    if (std::abs(orient2d(a, b, c)) < 1e-3) continue;
    const Circle circ = circumcircle(a, b, c);
    const Point2 o = bisectorCentre(a, b, c);
    EXPECT_NEAR(circ.center.x, o.x, 1e-8);
    EXPECT_NEAR(circ.center.y, o.y, 1e-8);
  }
}

TEST(Segments, Examples) {
  EXPECT_TRUE(segmentIntersectsSegment({0, 0}, {2, 0}, {1, -1}, {1, 1}));
  EXPECT_FALSE(segmentIntersectsSegment({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  EXPECT_TRUE(segmentIntersectsSegment({0, 0}, {2, 0}, {1, 0}, {3, 0}));
  EXPECT_FALSE(segmentsCrossStrictly({0, 0}, {2, 0}, {1, 0}, {3, 0}));
  EXPECT_FALSE(segmentsCrossStrictly({0, 0}, {2, 0}, {2, 0}, {3, 1}));
  EXPECT_TRUE(segmentsCrossStrictly({0, 0}, {2, 0}, {1, -1}, {1, 1}));
}

TEST(Segments, CircleExamples) {
  EXPECT_TRUE(segmentIntersectsCircle({-2, 0}, {2, 0}, {0, 0}, 1));
  EXPECT_FALSE(segmentIntersectsCircle({-2, 2}, {2, 2}, {0, 0}, 1));
  EXPECT_FALSE(segmentIntersectsCircle({5, 5}, {6, 6}, {0, 0}, 1));
}

TEST(Segments, CircleMatchesDenseSampling) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 500; ++i) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    const double r = 0.2 + std::abs(u(rng)) / 2;
    double minD = 1e9;
    for (int k = 0; k <= 20000; ++k) minD = std::min(minD, distance(a + (b - a) * (k / 20000.0), c));
    if (std::abs(minD - r) < 1e-3) continue;
    EXPECT_EQ(segmentIntersectsCircle(a, b, c, r), minD < r);
  }
}

TEST(PointInTriangle, ClosedAndOrientationFree) {
  EXPECT_TRUE(pointInTriangle({0.2, 0.2}, {0, 0}, {1, 0}, {0, 1}));
  EXPECT_TRUE(pointInTriangle({0.2, 0.2}, {0, 0}, {0, 1}, {1, 0}));
  EXPECT_TRUE(pointInTriangle({0.5, 0}, {0, 0}, {1, 0}, {0, 1}));
  EXPECT_FALSE(pointInTriangle({0.6, 0.6}, {0, 0}, {1, 0}, {0, 1}));
}

TEST(Delaunay, SingleTriangle) {
  const std::vector<Point2> s{{0, 0}, {1, 0}, {0, 1}};
  const auto t = delaunayTriangulate(s);
  EXPECT_EQ(t.triangles.size(), 1u);
  EXPECT_EQ(t.faces.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) EXPECT_TRUE(t.isHullFace(f));
}

TEST(Delaunay, UnitSquare) {
  const std::vector<Point2> s{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto t = delaunayTriangulate(s);
  EXPECT_EQ(t.triangles.size(), 2u);
  EXPECT_EQ(t.faces.size(), 5u);
  // Cocircular tie: the diagonal is decided by insertion order and is stable.
  const auto again = delaunayTriangulate(s);
  EXPECT_EQ(t.faces, again.faces);
  const bool diag02 = t.findFace(0, 2) >= 0;
  const bool diag13 = t.findFace(1, 3) >= 0;
  EXPECT_NE(diag02, diag13);
}

TEST(Delaunay, Errors) {
  const std::vector<Point2> two{{0, 0}, {1, 0}};
  EXPECT_THROW(delaunayTriangulate(two), GeometryError);
  const std::vector<Point2> dup{{0, 0}, {1, 0}, {0, 0}};
  try {
    delaunayTriangulate(dup);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.code(), GeometryErrc::TooFewSites);
  }
  const std::vector<Point2> line{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  try {
    delaunayTriangulate(line);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.code(), GeometryErrc::AllCollinear);
  }
}

TEST(Delaunay, DuplicatesMergedKeepingFirstIndex) {
  const std::vector<Point2> s{{0, 0}, {2, 0}, {0, 0}, {0, 2}, {2, 2}};
  const auto t = delaunayTriangulate(s);
  ASSERT_EQ(t.sites.size(), 4u);
  EXPECT_EQ(t.sourceIndex, (std::vector<std::size_t>{0, 1, 3, 4}));
}

TEST(Delaunay, RandomSitesEmptyCircumcircle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Point2> s(50);
    for (auto& p : s) p = {u(rng), u(rng)};
    const auto t = delaunayTriangulate(s);
    expectEmptyCircumcircles(t);
    expectConsistent(t);
  }
}

TEST(Delaunay, LocateFindsContainingTriangle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<Point2> s(30);
  for (auto& p : s) p = {u(rng), u(rng)};
  const auto t = delaunayTriangulate(s);
  for (int i = 0; i < 200; ++i) {
    const Point2 q{u(rng), u(rng)};
    const long k = t.locate(q);
    if (k < 0) continue;
    const auto& tri = t.triangles[static_cast<std::size_t>(k)];
    EXPECT_TRUE(pointInTriangle(q, t.sites[tri[0]], t.sites[tri[1]], t.sites[tri[2]]));
  }
}

TEST(Angles, Normalize) {
  EXPECT_NEAR(normalizeAngle(3 * M_PI), M_PI, 1e-12);
  EXPECT_NEAR(normalizeAngle(-M_PI), M_PI, 1e-12);
  EXPECT_NEAR(normalizeAngle(0.5), 0.5, 1e-15);
}
