#include "mhplan/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace mhplan {

double normalizeAngle(double theta) {
  if (!std::isfinite(theta)) return theta;
  double wrapped = std::remainder(theta, 2.0 * std::numbers::pi);
  if (wrapped <= -std::numbers::pi) wrapped += 2.0 * std::numbers::pi;
  return wrapped;
}

double orient2d(const Point2& a, const Point2& b, const Point2& c) {
  const long double abx = static_cast<long double>(b.x) - a.x;
  const long double aby = static_cast<long double>(b.y) - a.y;
  const long double acx = static_cast<long double>(c.x) - a.x;
  const long double acy = static_cast<long double>(c.y) - a.y;
  return static_cast<double>(abx * acy - aby * acx);
}

double inCircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                          ad * (bdx * cdy - bdy * cdx);
  return static_cast<double>(det);
}

Circle circumcircle(const Point2& a, const Point2& b, const Point2& c) {
  const double twiceArea = orient2d(a, b, c);
  if (std::abs(0.5 * twiceArea) < kDegenerateArea) {
    throw GeometryError(GeometryErrc::Collinear, "circumcircle: collinear points");
  }
  // Solve relative to a to limit cancellation.
  const Point2 ab = b - a;
  const Point2 ac = c - a;
  const double abSq = ab.squaredNorm();
  const double acSq = ac.squaredNorm();
  const double denom = 2.0 * cross(ab, ac);
  const Point2 offset{(ac.y * abSq - ab.y * acSq) / denom, (ab.x * acSq - ac.x * abSq) / denom};
  return {a + offset, offset.norm()};
}

bool segmentIntersectsSegment(const Point2& p1, const Point2& p2, const Point2& q1,
                              const Point2& q2) {
  const double d1 = orient2d(q1, q2, p1);
  const double d2 = orient2d(q1, q2, p2);
  const double d3 = orient2d(p1, p2, q1);
  const double d4 = orient2d(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto onSegment = [](const Point2& a, const Point2& b, const Point2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  if (d1 == 0 && onSegment(q1, q2, p1)) return true;
  if (d2 == 0 && onSegment(q1, q2, p2)) return true;
  if (d3 == 0 && onSegment(p1, p2, q1)) return true;
  if (d4 == 0 && onSegment(p1, p2, q2)) return true;
  return false;
}

bool segmentsCrossStrictly(const Point2& p1, const Point2& p2, const Point2& q1,
                           const Point2& q2) {
  const double d1 = orient2d(q1, q2, p1);
  const double d2 = orient2d(q1, q2, p2);
  const double d3 = orient2d(p1, p2, q1);
  const double d4 = orient2d(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double pointSegmentDistance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double lenSq = ab.squaredNorm();
  if (lenSq == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / lenSq, 0.0, 1.0);
  return distance(p, a + ab * t);
}

bool segmentIntersectsCircle(const Point2& p1, const Point2& p2, const Point2& center,
                             double radius) {
  return pointSegmentDistance(center, p1, p2) < radius;
}

bool pointInTriangle(const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
  const double d1 = orient2d(a, b, p);
  const double d2 = orient2d(b, c, p);
  const double d3 = orient2d(c, a, p);
  const bool hasNeg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool hasPos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(hasNeg && hasPos);
}

long Triangulation::findFace(std::size_t a, std::size_t b) const {
  const auto key = std::minmax(a, b);
  const std::pair<std::size_t, std::size_t> k{key.first, key.second};
  const auto it = std::lower_bound(faces.begin(), faces.end(), k);
  if (it == faces.end() || *it != k) return -1;
  return static_cast<long>(it - faces.begin());
}

long Triangulation::locate(const Point2& p) const {
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    if (pointInTriangle(p, sites[tri[0]], sites[tri[1]], sites[tri[2]])) {
      return static_cast<long>(t);
    }
  }
  return -1;
}

namespace {

struct Edge {
  std::size_t from;
  std::size_t to;
};

}  // namespace

Triangulation delaunayTriangulate(std::span<const Point2> input) {
  Triangulation out;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const Point2& p = input[i];
    if (!p.isFinite()) {
      throw std::invalid_argument("delaunayTriangulate: non-finite site");
    }
    const bool duplicate = std::any_of(out.sites.begin(), out.sites.end(), [&](const Point2& q) {
      return distance(p, q) <= kDuplicateSiteTolerance;
    });
    if (!duplicate) {
      out.sites.push_back(p);
      out.sourceIndex.push_back(i);
    }
  }
  const std::size_t n = out.sites.size();
  if (n < 3) {
    throw GeometryError(GeometryErrc::TooFewSites, "delaunayTriangulate: fewer than 3 sites");
  }

  double minX = out.sites[0].x, maxX = minX, minY = out.sites[0].y, maxY = minY;
  for (const auto& p : out.sites) {
    minX = std::min(minX, p.x);
    maxX = std::max(maxX, p.x);
    minY = std::min(minY, p.y);
    maxY = std::max(maxY, p.y);
  }
  const double extent = std::max({maxX - minX, maxY - minY, 1.0});
  const Point2 mid{0.5 * (minX + maxX), 0.5 * (minY + maxY)};
  const double big = 1e4 * extent;

  // Working vertex list: real sites followed by the three super-triangle corners.
  std::vector<Point2> verts = out.sites;
  verts.push_back({mid.x - 2.0 * big, mid.y - big});
  verts.push_back({mid.x + 2.0 * big, mid.y - big});
  verts.push_back({mid.x, mid.y + 2.0 * big});

  std::vector<std::array<std::size_t, 3>> tris{{n, n + 1, n + 2}};
  std::vector<std::array<std::size_t, 3>> kept;
  std::vector<Edge> cavityEdges;

  for (std::size_t s = 0; s < n; ++s) {
    const Point2& p = verts[s];
    kept.clear();
    cavityEdges.clear();
    for (const auto& t : tris) {
      if (inCircle(verts[t[0]], verts[t[1]], verts[t[2]], p) > 0.0) {
        cavityEdges.push_back({t[0], t[1]});
        cavityEdges.push_back({t[1], t[2]});
        cavityEdges.push_back({t[2], t[0]});
      } else {
        kept.push_back(t);
      }
    }
    // Interior cavity edges appear once in each direction; keep the rest.
    for (std::size_t i = 0; i < cavityEdges.size(); ++i) {
      const Edge& e = cavityEdges[i];
      const bool shared = std::any_of(cavityEdges.begin(), cavityEdges.end(), [&](const Edge& o) {
        return o.from == e.to && o.to == e.from;
      });
      if (shared) continue;
      if (orient2d(verts[e.from], verts[e.to], p) > 0.0) {
        kept.push_back({e.from, e.to, s});
      }
    }
    tris.swap(kept);
  }

  for (const auto& t : tris) {
    if (t[0] >= n || t[1] >= n || t[2] >= n) continue;
    if (std::abs(0.5 * orient2d(out.sites[t[0]], out.sites[t[1]], out.sites[t[2]])) <
        kDegenerateArea) {
      continue;
    }
    out.triangles.push_back(t);
  }
  if (out.triangles.empty()) {
    throw GeometryError(GeometryErrc::AllCollinear, "delaunayTriangulate: all sites collinear");
  }

  struct FaceRef {
    std::pair<std::size_t, std::size_t> key;
    std::size_t tri;
    int slot;
  };
  std::vector<FaceRef> refs;
  refs.reserve(out.triangles.size() * 3);
  for (std::size_t t = 0; t < out.triangles.size(); ++t) {
    const auto& tri = out.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const auto key = std::minmax(tri[k], tri[(k + 1) % 3]);
      refs.push_back({{key.first, key.second}, t, k});
    }
  }
  std::sort(refs.begin(), refs.end(), [](const FaceRef& a, const FaceRef& b) {
    return a.key != b.key ? a.key < b.key : a.tri < b.tri;
  });
  out.triangleFaces.assign(out.triangles.size(), {0, 0, 0});
  for (const auto& r : refs) {
    if (out.faces.empty() || out.faces.back() != r.key) {
      out.faces.push_back(r.key);
      out.faceTriangles.emplace_back();
    }
    out.faceTriangles.back().push_back(r.tri);
    out.triangleFaces[r.tri][static_cast<std::size_t>(r.slot)] = out.faces.size() - 1;
  }
  return out;
}

}  // namespace mhplan
