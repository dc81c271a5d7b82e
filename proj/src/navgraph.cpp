#include "mhplan/navgraph.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mhplan/safety.hpp"

namespace mhplan {

std::size_t NavGraph::addVertex(NavVertex v) {
  v.id = vertices.size();
  vertices.push_back(v);
  adjacency.emplace_back();
  return v.id;
}

void NavGraph::addEdge(std::size_t u, std::size_t v) {
  const std::size_t e = edges.size();
  edges.push_back({u, v, distance(vertices[u].position, vertices[v].position)});
  adjacency[u].push_back(e);
  adjacency[v].push_back(e);
}

bool NavGraph::hasEdge(std::size_t u, std::size_t v) const {
  return std::any_of(adjacency[u].begin(), adjacency[u].end(), [&](std::size_t e) {
    return (edges[e].u == u && edges[e].v == v) || (edges[e].u == v && edges[e].v == u);
  });
}

RangeZone classifyZone(const LandmarkEstimate& estimate, const Point2& robot, double rShort) {
  return distance(estimate.positionMean, robot) <= rShort ? RangeZone::Short : RangeZone::Long;
}

std::vector<LandmarkEstimate> selectGraphLandmarks(std::span<const LandmarkEstimate> estimates,
                                                   const Point2& robot,
                                                   const GraphParams& params) {
  std::vector<LandmarkEstimate> out;
  for (const auto& e : estimates) {
    if (e.numUpdates < params.minUpdates) continue;
    if (distance(e.positionMean, robot) > params.maxGraphRange) continue;
    out.push_back(e);
  }
  return out;
}

std::vector<Point2> placeFaceVertices(const LandmarkEstimate& a, const LandmarkEstimate& b,
                                      double pSafe, const GraphParams& params) {
  const Point2 delta = b.positionMean - a.positionMean;
  const double centreDist = delta.norm();
  const Point2 u = delta / centreDist;
  const double ra = 0.5 * a.diameterMean;
  const double rb = 0.5 * b.diameterMean;
  const double gap = centreDist - ra - rb;
  const double w = params.robotWidth;

  if (pSafe >= params.wideFaceP && gap > params.wideFaceGapFactor * w &&
      params.maxFaceVertices > 1) {
    const Point2 first = a.positionMean + u * (ra + 0.5 * w);
    const Point2 last = b.positionMean - u * (rb + 0.5 * w);
    const double span = distance(first, last);
    const auto wanted = static_cast<std::size_t>(std::ceil(span / w)) + 1;
    const std::size_t count = std::clamp<std::size_t>(wanted, 2, params.maxFaceVertices);
    std::vector<Point2> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(count - 1);
      out.push_back(first + (last - first) * t);
    }
    return out;
  }
  return {a.positionMean + u * (ra + 0.5 * gap)};
}

namespace {

void connectToCell(NavGraph& g, std::size_t vertex, std::size_t triangle,
                   const std::vector<std::vector<std::size_t>>& faceVertices) {
  for (std::size_t f : g.triangulation.triangleFaces[triangle]) {
    for (std::size_t v : faceVertices[f]) g.addEdge(vertex, v);
  }
}

void connectToVisibleHull(NavGraph& g, std::size_t vertex,
                          const std::vector<std::vector<std::size_t>>& faceVertices) {
  const Triangulation& dt = g.triangulation;
  const Point2 from = g.vertices[vertex].position;
  for (std::size_t f = 0; f < dt.faces.size(); ++f) {
    if (!dt.isHullFace(f)) continue;
    for (std::size_t v : faceVertices[f]) {
      const Point2 to = g.vertices[v].position;
      bool blocked = false;
      for (std::size_t other = 0; other < dt.faces.size() && !blocked; ++other) {
        if (other == f) continue;
        const auto [i, j] = dt.faces[other];
        blocked = segmentsCrossStrictly(from, to, dt.sites[i], dt.sites[j]);
      }
      if (!blocked) g.addEdge(vertex, v);
    }
  }
}

bool crossesAnyFace(const Triangulation& dt, const Point2& a, const Point2& b) {
  for (const auto& [i, j] : dt.faces) {
    if (segmentsCrossStrictly(a, b, dt.sites[i], dt.sites[j])) return true;
  }
  return false;
}

}  // namespace

NavGraph buildNavigationGraph(std::span<const LandmarkEstimate> estimates, const Point2& start,
                              const Point2& goal, const GraphParams& params) {
  NavGraph g;
  g.startId = g.addVertex({0, start, 1.0, 0.0, RangeZone::Short, kStartFace});
  g.goalId = g.addVertex({0, goal, 1.0, 0.0, RangeZone::Short, kGoalFace});

  auto degenerate = [&]() {
    g.degenerate = true;
    g.addEdge(g.startId, g.goalId);
    return g;
  };
  if (estimates.size() < 3) return degenerate();

  std::vector<Point2> sites;
  sites.reserve(estimates.size());
  for (const auto& e : estimates) sites.push_back(e.positionMean);
  try {
    g.triangulation = delaunayTriangulate(sites);
  } catch (const GeometryError&) {
    return degenerate();
  }
  const Triangulation& dt = g.triangulation;
  g.siteEstimate = dt.sourceIndex;

  std::vector<std::vector<std::size_t>> faceVertices(dt.faces.size());
  for (std::size_t f = 0; f < dt.faces.size(); ++f) {
    const LandmarkEstimate& a = estimates[dt.sourceIndex[dt.faces[f].first]];
    const LandmarkEstimate& b = estimates[dt.sourceIndex[dt.faces[f].second]];
    const bool isLong = classifyZone(a, start, params.rShort) == RangeZone::Long ||
                        classifyZone(b, start, params.rShort) == RangeZone::Long;
    const RangeZone zone = isLong ? RangeZone::Long : RangeZone::Short;

    double p = 0.0;
    try {
      p = safePassageProbability2D(a.belief(), b.belief(), params.robotWidth);
    } catch (const CoincidentObstaclesError&) {
      p = 0.0;
    }
    // A zero-probability vertex would carry infinite safety cost.
    if (!(p > 0.0)) continue;

    std::vector<Point2> positions;
    if (p < params.pTarget) {
      if (zone == RangeZone::Short) continue;
      positions.push_back((a.positionMean + b.positionMean) * 0.5);
    } else {
      positions = placeFaceVertices(a, b, p, params);
    }
    for (const Point2& pos : positions) {
      faceVertices[f].push_back(
          g.addVertex({0, pos, p, -std::log(p), zone, static_cast<long>(f)}));
    }
  }

  for (const auto& faces : dt.triangleFaces) {
    for (int k = 0; k < 3; ++k) {
      const auto& fa = faceVertices[faces[static_cast<std::size_t>(k)]];
      const auto& fb = faceVertices[faces[static_cast<std::size_t>((k + 1) % 3)]];
      for (std::size_t u : fa) {
        for (std::size_t v : fb) g.addEdge(u, v);
      }
    }
  }

  const long startCell = dt.locate(start);
  const long goalCell = dt.locate(goal);
  const std::array<std::pair<std::size_t, long>, 2> endpoints{
      {{g.startId, startCell}, {g.goalId, goalCell}}};
  for (const auto& [vertex, cell] : endpoints) {
    if (cell >= 0) {
      connectToCell(g, vertex, static_cast<std::size_t>(cell), faceVertices);
    } else {
      connectToVisibleHull(g, vertex, faceVertices);
    }
  }
  const bool sameCell = startCell >= 0 && startCell == goalCell;
  const bool bothOutside = startCell < 0 && goalCell < 0;
  if (sameCell || (bothOutside && !crossesAnyFace(dt, start, goal))) {
    g.addEdge(g.startId, g.goalId);
  }
  return g;
}

}  // namespace mhplan
