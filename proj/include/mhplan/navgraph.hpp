#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mhplan/estimation.hpp"
#include "mhplan/geometry.hpp"

namespace mhplan {

enum class RangeZone { Short, Long };

/// Face marker for the start and goal vertices.
inline constexpr long kStartFace = -1;
inline constexpr long kGoalFace = -2;

struct NavVertex {
  std::size_t id = 0;
  Point2 position;
  double pSafe = 1.0;
  /// -ln(pSafe).
  double cSafe = 0.0;
  RangeZone zone = RangeZone::Short;
  /// Delaunay face index, or kStartFace / kGoalFace.
  long face = kStartFace;
};

struct NavEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double cDist = 0.0;
};

struct NavGraph {
  std::vector<NavVertex> vertices;
  std::vector<NavEdge> edges;
  /// adjacency[v] lists edge indices incident to v.
  std::vector<std::vector<std::size_t>> adjacency;
  std::size_t startId = 0;
  std::size_t goalId = 1;
  /// True when fewer than three usable obstacles (or only collinear ones) were
  /// available and start and goal were joined directly.
  bool degenerate = false;
  /// The triangulation the vertices refer to (empty when degenerate).
  Triangulation triangulation;
  /// triangulation site k came from input estimate siteEstimate[k].
  std::vector<std::size_t> siteEstimate;

  std::size_t addVertex(NavVertex v);
  void addEdge(std::size_t u, std::size_t v);
  bool hasEdge(std::size_t u, std::size_t v) const;
};

struct GraphParams {
  double pTarget = 0.95;
  double rShort = 7.5;
  double robotWidth = 0.5;
  double maxGraphRange = 15.0;
  double wideFaceP = 0.999;
  double wideFaceGapFactor = 3.0;
  std::size_t maxFaceVertices = 5;
  /// Landmarks with fewer updates are left out of the graph.
  int minUpdates = 2;
};

/// Short iff the estimate mean is within rShort of the robot (boundary inclusive).
RangeZone classifyZone(const LandmarkEstimate& estimate, const Point2& robot, double rShort);

/// Landmarks usable for graph construction: enough updates and within range.
std::vector<LandmarkEstimate> selectGraphLandmarks(std::span<const LandmarkEstimate> estimates,
                                                   const Point2& robot,
                                                   const GraphParams& params);

/// Vertex positions for a safe face between obstacles a and b.
std::vector<Point2> placeFaceVertices(const LandmarkEstimate& a, const LandmarkEstimate& b,
                                      double pSafe, const GraphParams& params);

/// Builds the navigation graph over the Delaunay faces of the estimate means.
/// Zones are measured from start.
NavGraph buildNavigationGraph(std::span<const LandmarkEstimate> estimates, const Point2& start,
                              const Point2& goal, const GraphParams& params);

}  // namespace mhplan
