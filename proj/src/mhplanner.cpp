#include "mhplan/mhplanner.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace mhplan {

CandidatePath makeCandidatePath(const NavGraph& graph, std::vector<std::size_t> vertices) {
  CandidatePath path;
  path.vertices = std::move(vertices);
  for (std::size_t k = 0; k < path.vertices.size(); ++k) {
    const NavVertex& v = graph.vertices[path.vertices[k]];
    path.cSafeRaw += v.cSafe;
    path.pPath *= v.pSafe;
    if (k > 0) {
      path.cDistRaw += distance(graph.vertices[path.vertices[k - 1]].position, v.position);
    }
  }
  return path;
}

std::optional<CandidatePath> shortestPath(const NavGraph& graph, const Hypothesis& hypothesis) {
  const std::size_t n = graph.vertices.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<double> dist(n, inf);
  std::vector<std::size_t> parent(n, none);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;

  if (hypothesis.isBlocked(graph.startId) || hypothesis.isBlocked(graph.goalId)) {
    return std::nullopt;
  }
  dist[graph.startId] = 0.0;
  open.push({0.0, graph.startId});
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == graph.goalId) break;
    for (std::size_t e : graph.adjacency[u]) {
      const NavEdge& edge = graph.edges[e];
      const std::size_t v = edge.u == u ? edge.v : edge.u;
      if (done[v] || hypothesis.isBlocked(v)) continue;
      const double nd = d + edge.cDist;
      if (nd < dist[v]) {
        dist[v] = nd;
        parent[v] = u;
        open.push({nd, v});
      }
    }
  }
  if (!done[graph.goalId]) return std::nullopt;

  std::vector<std::size_t> seq;
  for (std::size_t v = graph.goalId; v != none; v = parent[v]) seq.push_back(v);
  std::reverse(seq.begin(), seq.end());
  return makeCandidatePath(graph, std::move(seq));
}

double shortRangeSafety(const NavGraph& graph, const CandidatePath& path) {
  double p = 1.0;
  for (std::size_t v : path.vertices) {
    if (graph.vertices[v].zone == RangeZone::Short) p *= graph.vertices[v].pSafe;
  }
  return p;
}

std::vector<CandidatePath> generateCandidates(const NavGraph& graph, const PlannerParams& params) {
  if (params.nHyp == 0) throw std::invalid_argument("generateCandidates: nHyp must be >= 1");

  auto initial = std::make_shared<Hypothesis>();
  for (const auto& v : graph.vertices) {
    if (v.id == graph.startId || v.id == graph.goalId) continue;
    if (v.pSafe < params.pMin) initial->blocked.insert(v.id);
  }
  std::optional<CandidatePath> first = shortestPath(graph, *initial);
  if (!first) return {};

  struct Entry {
    double priority;
    std::uint64_t seq;
    std::size_t vertex;
    std::shared_ptr<const Hypothesis> hypothesis;
  };
  // Most likely unsafe first; FIFO among equal priorities.
  auto lower = [](const Entry& a, const Entry& b) {
    return a.priority != b.priority ? a.priority < b.priority : a.seq > b.seq;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> queue(lower);
  std::uint64_t seq = 0;
  auto enqueuePath = [&](const CandidatePath& path, double parentPriority,
                         const std::shared_ptr<const Hypothesis>& hyp) {
    for (std::size_t v : path.vertices) {
      const double pUnsafe = 1.0 - graph.vertices[v].pSafe;
      if (pUnsafe <= 0.0) continue;
      queue.push({pUnsafe * parentPriority, seq++, v, hyp});
    }
  };

  std::vector<CandidatePath> candidates;
  if (shortRangeSafety(graph, *first) >= params.pTarget) {
    candidates.push_back(*first);
    if (first->pPath >= params.pTarget) return candidates;
  }
  enqueuePath(*first, 1.0, initial);

  std::set<std::set<std::size_t>> explored{initial->blocked};
  std::size_t iterations = 0;
  while (candidates.size() < params.nHyp && !queue.empty() &&
         iterations < params.maxIterations) {
    const Entry top = queue.top();
    queue.pop();
    auto child = std::make_shared<Hypothesis>(*top.hypothesis);
    child->blocked.insert(top.vertex);
    if (!explored.insert(child->blocked).second) continue;
    ++iterations;

    std::optional<CandidatePath> path = shortestPath(graph, *child);
    if (!path) continue;
    if (shortRangeSafety(graph, *path) < params.pTarget) continue;
    if (std::find(candidates.begin(), candidates.end(), *path) != candidates.end()) continue;
    candidates.push_back(*path);
    if (path->pPath >= params.pTarget) break;
    enqueuePath(*path, top.priority, child);
  }
  return candidates;
}

const CandidatePath& evaluateCandidates(std::span<const CandidatePath> paths, double alphaDist,
                                        double alphaSafe) {
  if (paths.empty()) throw std::invalid_argument("evaluateCandidates: empty candidate set");
  double maxDist = 0.0;
  double maxSafe = 0.0;
  for (const auto& p : paths) {
    maxDist = std::max(maxDist, p.cDistRaw);
    maxSafe = std::max(maxSafe, p.cSafeRaw);
  }
  if (maxDist <= 0.0) maxDist = 1.0;
  if (maxSafe <= 0.0) maxSafe = 1.0;

  std::size_t best = 0;
  double bestCost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double cost =
        alphaDist * paths[i].cDistRaw / maxDist + alphaSafe * paths[i].cSafeRaw / maxSafe;
    const auto& b = paths[best];
    const bool better =
        cost < bestCost ||
        (cost == bestCost && std::tie(paths[i].cDistRaw, paths[i].vertices) <
                                 std::tie(b.cDistRaw, b.vertices));
    if (better) {
      best = i;
      bestCost = cost;
    }
  }
  return paths[best];
}

Point2 localGoal(const CandidatePath& best, const NavGraph& graph, const Point2& robot,
                 double dLocal) {
  if (best.vertices.empty()) throw std::invalid_argument("localGoal: empty path");
  Point2 prev = robot;
  double remaining = dLocal;
  for (std::size_t k = 1; k < best.vertices.size(); ++k) {
    const Point2 next = graph.vertices[best.vertices[k]].position;
    const double len = distance(prev, next);
    if (len >= remaining && len > 0.0) {
      return prev + (next - prev) * (remaining / len);
    }
    remaining -= len;
    prev = next;
  }
  return graph.vertices[best.vertices.back()].position;
}

CollisionBounds collisionBounds(const NavGraph& graph, const CandidatePath& path) {
  double product = 1.0;
  double minP = 1.0;
  for (std::size_t v : path.vertices) {
    product *= graph.vertices[v].pSafe;
    minP = std::min(minP, graph.vertices[v].pSafe);
  }
  return {1.0 - product, 1.0 - minP};
}

PlanResult planMultipleHypothesis(const NavGraph& graph, const PlannerParams& params,
                                  const Point2& robot) {
  PlanResult result;
  result.candidates = generateCandidates(graph, params);
  if (result.candidates.empty()) return result;
  const CandidatePath& best =
      evaluateCandidates(result.candidates, params.alphaDist, params.alphaSafe);
  result.bestIndex = static_cast<std::size_t>(&best - result.candidates.data());
  result.localGoal = localGoal(best, graph, robot, params.dLocal);
  return result;
}

}  // namespace mhplan
