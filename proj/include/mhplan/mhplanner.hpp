#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "mhplan/navgraph.hpp"

namespace mhplan {

/// An assumed world: the listed vertices are treated as impassable.
struct Hypothesis {
  std::set<std::size_t> blocked;

  bool isBlocked(std::size_t v) const { return blocked.count(v) != 0; }
};

struct CandidatePath {
  std::vector<std::size_t> vertices;
  double cDistRaw = 0.0;
  double cSafeRaw = 0.0;
  double pPath = 1.0;

  bool operator==(const CandidatePath& o) const { return vertices == o.vertices; }
};

struct PlannerParams {
  std::size_t nHyp = 5;
  double pTarget = 0.95;
  double pMin = 0.0;
  double alphaDist = 1.0;
  double alphaSafe = 1.0;
  double dLocal = 5.0;
  /// Upper bound on hypotheses popped from the queue in one planning call.
  std::size_t maxIterations = 200;
};

/// Fills distance and safety costs for a vertex sequence.
CandidatePath makeCandidatePath(const NavGraph& graph, std::vector<std::size_t> vertices);

/// Dijkstra from start to goal skipping blocked vertices. Equal-cost ties are
/// resolved towards lower vertex ids.
std::optional<CandidatePath> shortestPath(const NavGraph& graph, const Hypothesis& hypothesis);

/// Safety product of the path's Short-zone vertices.
double shortRangeSafety(const NavGraph& graph, const CandidatePath& path);

/// Candidate paths, each the shortest path under a different hypothesis, ordered
/// by discovery.
std::vector<CandidatePath> generateCandidates(const NavGraph& graph, const PlannerParams& params);

/// Minimum normalised weighted cost; ties by raw distance then vertex ids.
/// Requires a non-empty set.
const CandidatePath& evaluateCandidates(std::span<const CandidatePath> paths, double alphaDist,
                                        double alphaSafe);

/// Point at arc length dLocal along the path polyline, or the last vertex.
Point2 localGoal(const CandidatePath& best, const NavGraph& graph, const Point2& robot,
                 double dLocal);

struct CollisionBounds {
  double independent = 0.0;
  double worstCaseLower = 0.0;
};

CollisionBounds collisionBounds(const NavGraph& graph, const CandidatePath& path);

struct PlanResult {
  std::vector<CandidatePath> candidates;
  std::optional<std::size_t> bestIndex;
  Point2 localGoal;

  bool found() const { return bestIndex.has_value(); }
};

/// Generate, evaluate and extract the local goal in one call.
PlanResult planMultipleHypothesis(const NavGraph& graph, const PlannerParams& params,
                                  const Point2& robot);

}  // namespace mhplan
