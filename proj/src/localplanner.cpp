#include "mhplan/localplanner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

namespace mhplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CellGrid {
  Point2 origin;
  double res = 1.0;
  long nx = 0;
  long ny = 0;

  bool contains(long ix, long iy) const { return ix >= 0 && iy >= 0 && ix < nx && iy < ny; }
  long index(long ix, long iy) const { return iy * nx + ix; }
  std::pair<long, long> cellOf(const Point2& p) const {
    return {static_cast<long>(std::floor((p.x - origin.x) / res)),
            static_cast<long>(std::floor((p.y - origin.y) / res))};
  }
  Point2 centre(long ix, long iy) const {
    return {origin.x + (static_cast<double>(ix) + 0.5) * res,
            origin.y + (static_cast<double>(iy) + 0.5) * res};
  }
};

constexpr std::array<std::pair<int, int>, 8> kNeighbours{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

/// Dijkstra over free cells from one source; distances in metres.
std::vector<double> gridDistanceField(const CellGrid& grid, const std::vector<char>& blocked,
                                      long sx, long sy) {
  std::vector<double> dist(static_cast<std::size_t>(grid.nx * grid.ny), kInf);
  if (!grid.contains(sx, sy)) return dist;
  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[static_cast<std::size_t>(grid.index(sx, sy))] = 0.0;
  open.push({0.0, grid.index(sx, sy)});
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist[static_cast<std::size_t>(idx)]) continue;
    const long ix = idx % grid.nx;
    const long iy = idx / grid.nx;
    for (const auto& [dx, dy] : kNeighbours) {
      const long jx = ix + dx;
      const long jy = iy + dy;
      if (!grid.contains(jx, jy)) continue;
      const long j = grid.index(jx, jy);
      if (blocked[static_cast<std::size_t>(j)]) continue;
      const double nd = d + grid.res * ((dx != 0 && dy != 0) ? std::numbers::sqrt2 : 1.0);
      if (nd < dist[static_cast<std::size_t>(j)]) {
        dist[static_cast<std::size_t>(j)] = nd;
        open.push({nd, j});
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<MotionPrimitive> makePrimitiveSet(const LocalPlannerParams& params) {
  std::vector<MotionPrimitive> prims;
  const double len = params.primitiveLength();
  for (double frac : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    MotionPrimitive p;
    p.curvature = frac * params.maxCurvature;
    p.length = len;
    p.costMultiplier = 1.0 + params.turnPenalty * std::abs(frac);
    prims.push_back(p);
  }
  if (params.allowInPlaceRotation) {
    for (double sign : {-1.0, 1.0}) {
      MotionPrimitive p;
      p.rotation = sign * params.rotationStep;
      prims.push_back(p);
    }
  }
  return prims;
}

Pose2 applyPrimitive(const Pose2& pose, const MotionPrimitive& primitive) {
  if (primitive.isRotation()) return {pose.x, pose.y, pose.theta + primitive.rotation};
  const double k = primitive.curvature;
  const double s = primitive.length;
  if (std::abs(k) < 1e-9) {
    return {pose.x + s * std::cos(pose.theta), pose.y + s * std::sin(pose.theta), pose.theta};
  }
  const double theta1 = pose.theta + k * s;
  return {pose.x + (std::sin(theta1) - std::sin(pose.theta)) / k,
          pose.y - (std::cos(theta1) - std::cos(pose.theta)) / k, theta1};
}

ObstacleField::ObstacleField(std::span<const Disc> obstacles, double inflation, double bucketSize)
    : bucket_(bucketSize) {
  discs_.reserve(obstacles.size());
  for (const auto& d : obstacles) discs_.push_back({d.center, d.radius + inflation});
  if (discs_.empty()) return;
  double lox = kInf, loy = kInf, hix = -kInf, hiy = -kInf;
  for (const auto& d : discs_) {
    lox = std::min(lox, d.center.x - d.radius);
    loy = std::min(loy, d.center.y - d.radius);
    hix = std::max(hix, d.center.x + d.radius);
    hiy = std::max(hiy, d.center.y + d.radius);
  }
  minBx_ = static_cast<long>(std::floor(lox / bucket_));
  minBy_ = static_cast<long>(std::floor(loy / bucket_));
  nbx_ = static_cast<long>(std::floor(hix / bucket_)) - minBx_ + 1;
  nby_ = static_cast<long>(std::floor(hiy / bucket_)) - minBy_ + 1;
  buckets_.resize(static_cast<std::size_t>(nbx_ * nby_));
  for (std::size_t i = 0; i < discs_.size(); ++i) {
    const auto& d = discs_[i];
    const long bx0 = static_cast<long>(std::floor((d.center.x - d.radius) / bucket_)) - minBx_;
    const long bx1 = static_cast<long>(std::floor((d.center.x + d.radius) / bucket_)) - minBx_;
    const long by0 = static_cast<long>(std::floor((d.center.y - d.radius) / bucket_)) - minBy_;
    const long by1 = static_cast<long>(std::floor((d.center.y + d.radius) / bucket_)) - minBy_;
    for (long by = by0; by <= by1; ++by) {
      for (long bx = bx0; bx <= bx1; ++bx) {
        buckets_[static_cast<std::size_t>(by * nbx_ + bx)].push_back(i);
      }
    }
  }
}

void ObstacleField::candidates(const Point2& lo, const Point2& hi,
                               std::vector<std::size_t>& out) const {
  out.clear();
  if (discs_.empty()) return;
  const long bx0 = std::max(0L, static_cast<long>(std::floor(lo.x / bucket_)) - minBx_);
  const long by0 = std::max(0L, static_cast<long>(std::floor(lo.y / bucket_)) - minBy_);
  const long bx1 = std::min(nbx_ - 1, static_cast<long>(std::floor(hi.x / bucket_)) - minBx_);
  const long by1 = std::min(nby_ - 1, static_cast<long>(std::floor(hi.y / bucket_)) - minBy_);
  for (long by = by0; by <= by1; ++by) {
    for (long bx = bx0; bx <= bx1; ++bx) {
      const auto& b = buckets_[static_cast<std::size_t>(by * nbx_ + bx)];
      out.insert(out.end(), b.begin(), b.end());
    }
  }
  if (bx1 > bx0 || by1 > by0) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
}

bool ObstacleField::pointFree(const Point2& p) const {
  candidates(p, p, scratch_);
  for (std::size_t i : scratch_) {
    if (distance(p, discs_[i].center) < discs_[i].radius) return false;
  }
  return true;
}

bool ObstacleField::segmentFree(const Point2& a, const Point2& b) const {
  candidates({std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)},
             scratch_);
  for (std::size_t i : scratch_) {
    if (segmentIntersectsCircle(a, b, discs_[i].center, discs_[i].radius)) return false;
  }
  return true;
}

double ObstacleField::clearance(const Point2& p) const {
  double best = kInf;
  for (const auto& d : discs_) best = std::min(best, distance(p, d.center) - d.radius);
  return best;
}

double ObstacleField::polylineClearance(std::span<const Point2> path) const {
  double best = kInf;
  if (path.size() == 1) return clearance(path[0]);
  for (std::size_t k = 1; k < path.size(); ++k) {
    for (const auto& d : discs_) {
      best = std::min(best, pointSegmentDistance(d.center, path[k - 1], path[k]) - d.radius);
    }
  }
  return best;
}

std::optional<LocalPath> hybridAStar(const Pose2& start, const Point2& goal,
                                     std::span<const Disc> obstacles,
                                     const LocalPlannerParams& params) {
  const double inflation = 0.5 * params.robotWidth;
  const Point2 s0 = start.position();
  std::vector<Disc> inflated;
  inflated.reserve(obstacles.size());
  const double half = params.windowHalfSize;
  for (const auto& d : obstacles) {
    double r = d.radius + inflation;
    if (std::abs(d.center.x - s0.x) > half + r || std::abs(d.center.y - s0.y) > half + r) continue;
    const double ds = distance(d.center, s0);
    if (ds < r) r = 0.999 * ds;
    inflated.push_back({d.center, r});
  }
  const ObstacleField field(inflated, 0.0);

  CellGrid grid;
  grid.res = params.resolution;
  grid.origin = s0 - Point2{half, half};
  grid.nx = static_cast<long>(std::ceil(2.0 * half / grid.res));
  grid.ny = grid.nx;
  const auto [gx, gy] = grid.cellOf(goal);
  if (!grid.contains(gx, gy) || !field.pointFree(goal)) return std::nullopt;

  std::vector<char> blocked(static_cast<std::size_t>(grid.nx * grid.ny), 0);
  for (long iy = 0; iy < grid.ny; ++iy) {
    for (long ix = 0; ix < grid.nx; ++ix) {
      blocked[static_cast<std::size_t>(grid.index(ix, iy))] = !field.pointFree(grid.centre(ix, iy));
    }
  }
  blocked[static_cast<std::size_t>(grid.index(gx, gy))] = 0;
  const std::vector<double> h2d = gridDistanceField(grid, blocked, gx, gy);
  auto heuristic = [&](const Point2& p) {
    const double euclid = distance(p, goal);
    const auto [ix, iy] = grid.cellOf(p);
    if (!grid.contains(ix, iy)) return euclid;
    const double g = h2d[static_cast<std::size_t>(grid.index(ix, iy))];
    if (!std::isfinite(g)) return euclid;
    return std::max(euclid, g - grid.res * std::numbers::sqrt2);
  };

  const int bins = params.headingBins;
  auto stateIndex = [&](const Pose2& p) -> long {
    const auto [ix, iy] = grid.cellOf(p.position());
    if (!grid.contains(ix, iy)) return -1;
    const double t = (p.theta + std::numbers::pi) / (2.0 * std::numbers::pi);
    long ib = static_cast<long>(std::floor(t * bins + 0.5)) % bins;
    if (ib < 0) ib += bins;
    return grid.index(ix, iy) * bins + ib;
  };

  struct Node {
    Pose2 pose;
    double g;
    long parent;
    int primitive;
  };
  std::vector<Node> nodes;
  const std::size_t stateCount = static_cast<std::size_t>(grid.nx * grid.ny * bins);
  std::vector<char> closed(stateCount, 0);
  std::vector<double> bestG(stateCount, kInf);
  using Item = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  std::uint64_t seq = 0;

  const long startState = stateIndex(start);
  if (startState < 0) return std::nullopt;
  nodes.push_back({start, 0.0, -1, -1});
  bestG[static_cast<std::size_t>(startState)] = 0.0;
  open.push({heuristic(s0), seq++, 0});

  const std::vector<MotionPrimitive> prims = makePrimitiveSet(params);
  std::size_t expansions = 0;
  while (!open.empty()) {
    const auto [f, unusedSeq, nodeIdx] = open.top();
    open.pop();
    const Node node = nodes[nodeIdx];
    const long state = stateIndex(node.pose);
    if (closed[static_cast<std::size_t>(state)]) continue;
    closed[static_cast<std::size_t>(state)] = 1;
    if (++expansions > params.maxExpansions) return std::nullopt;

    const Point2 here = node.pose.position();
    if (distance(here, goal) <= params.goalTolerance && field.segmentFree(here, goal)) {
      LocalPath out;
      out.expansions = expansions;
      for (long k = static_cast<long>(nodeIdx); k >= 0; k = nodes[static_cast<std::size_t>(k)].parent) {
        const Node& n = nodes[static_cast<std::size_t>(k)];
        out.poses.push_back(n.pose);
        if (n.primitive >= 0) out.primitives.push_back(prims[static_cast<std::size_t>(n.primitive)]);
      }
      std::reverse(out.poses.begin(), out.poses.end());
      std::reverse(out.primitives.begin(), out.primitives.end());
      for (const auto& p : out.poses) {
        const Point2 q = p.position();
        if (out.waypoints.empty() || distance(out.waypoints.back(), q) > 1e-9) {
          out.waypoints.push_back(q);
        }
      }
      if (distance(out.waypoints.back(), goal) > 1e-9) out.waypoints.push_back(goal);
      return out;
    }

    for (std::size_t pi = 0; pi < prims.size(); ++pi) {
      const MotionPrimitive& prim = prims[pi];
      const Pose2 next = applyPrimitive(node.pose, prim);
      const long nextState = stateIndex(next);
      if (nextState < 0 || closed[static_cast<std::size_t>(nextState)]) continue;
      double cost = params.rotationCost;
      if (!prim.isRotation()) {
        bool free = field.segmentFree(here, next.position());
        const int samples = static_cast<int>(std::ceil(prim.length / params.collisionStep));
        for (int k = 1; k < samples && free; ++k) {
          MotionPrimitive partial = prim;
          partial.length = prim.length * k / samples;
          free = field.pointFree(applyPrimitive(node.pose, partial).position());
        }
        if (!free) continue;
        cost = prim.length * prim.costMultiplier;
      }
      const double g = node.g + cost;
      if (g >= bestG[static_cast<std::size_t>(nextState)]) continue;
      bestG[static_cast<std::size_t>(nextState)] = g;
      nodes.push_back({next, g, static_cast<long>(nodeIdx), static_cast<int>(pi)});
      open.push({g + heuristic(next.position()), seq++, nodes.size() - 1});
    }
  }
  return std::nullopt;
}

double smoothnessCost(std::span<const Point2> path) {
  double c = 0.0;
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    c += (path[i - 1] - path[i] * 2.0 + path[i + 1]).squaredNorm();
  }
  return c;
}

namespace {

double maxSpacing(std::span<const Point2> path) {
  double m = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) m = std::max(m, distance(path[i - 1], path[i]));
  return m;
}

}  // namespace

SmoothResult smoothPath(std::span<const Point2> path, std::span<const Disc> obstacles,
                        double robotWidth, const SmootherParams& params) {
  SmoothResult result;
  result.path.assign(path.begin(), path.end());
  const ObstacleField field(obstacles, 0.5 * robotWidth);
  const double threshold = params.clearanceThreshold;

  auto objective = [&](const std::vector<Point2>& x) {
    double c = params.smoothWeight * smoothnessCost(x);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      const double clr = field.clearance(x[i]);
      if (clr < threshold) c += params.obstacleWeight * (threshold - clr) * (threshold - clr);
    }
    return c;
  };

  std::vector<Point2>& x = result.path;
  double cost = objective(x);
  result.costHistory.push_back(cost);
  if (x.size() < 3) return result;

  const double minClearance = field.polylineClearance(x);
  const double spacingLimit = maxSpacing(x);
  double step = params.stepSize;
  std::vector<Point2> grad(x.size());
  std::vector<Point2> trial(x.size());
  for (int it = 0; it < params.maxIterations; ++it) {
    std::fill(grad.begin(), grad.end(), Point2{});
    const std::size_t n = x.size();
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const Point2 d2 = (x[j - 1] - x[j] * 2.0 + x[j + 1]) * (2.0 * params.smoothWeight);
      if (j - 1 >= 1) grad[j - 1] = grad[j - 1] + d2;
      grad[j] = grad[j] - d2 * 2.0;
      if (j + 1 <= n - 2) grad[j + 1] = grad[j + 1] + d2;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (const auto& d : field.discs()) {
        const Point2 away = x[i] - d.center;
        const double dist = away.norm();
        const double clr = dist - d.radius;
        if (clr >= threshold || dist <= 0.0) continue;
        grad[i] = grad[i] - away * (2.0 * params.obstacleWeight * (threshold - clr) / dist);
      }
    }
    double gradNorm = 0.0;
    for (const auto& g : grad) gradNorm += g.squaredNorm();
    if (gradNorm < 1e-24) break;

    bool accepted = false;
    while (!accepted && step > 1e-6) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = (i == 0 || i + 1 == n) ? x[i] : x[i] - grad[i] * step;
      const double trialCost = objective(trial);
      if (trialCost < cost && field.polylineClearance(trial) >= minClearance) {
        x.swap(trial);
        cost = trialCost;
        result.costHistory.push_back(cost);
        accepted = true;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
  }
  // Restore the input's waypoint spacing by subdividing long segments.
  std::vector<Point2> dense{x.front()};
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double len = distance(x[i - 1], x[i]);
    const auto pieces = std::max<long>(1, static_cast<long>(std::ceil(len / spacingLimit - 1e-9)));
    for (long k = 1; k <= pieces; ++k) {
      dense.push_back(x[i - 1] + (x[i] - x[i - 1]) * (static_cast<double>(k) / static_cast<double>(pieces)));
    }
  }
  x.swap(dense);
  return result;
}

std::optional<GridPath> baselineGlobalAStar(const Point2& start, const Point2& goal,
                                            std::span<const Disc> obstacles, double robotWidth,
                                            const GridBounds& bounds, double resolution) {
  CellGrid grid;
  grid.res = resolution;
  grid.origin = bounds.min;
  grid.nx = static_cast<long>(std::ceil((bounds.max.x - bounds.min.x) / resolution));
  grid.ny = static_cast<long>(std::ceil((bounds.max.y - bounds.min.y) / resolution));
  auto clampCell = [&](const Point2& p) {
    auto [ix, iy] = grid.cellOf(p);
    return std::pair{std::clamp(ix, 0L, grid.nx - 1), std::clamp(iy, 0L, grid.ny - 1)};
  };
  const auto [sx, sy] = clampCell(start);
  const auto [gx, gy] = clampCell(goal);

  std::vector<char> blocked(static_cast<std::size_t>(grid.nx * grid.ny), 0);
  const double inflation = 0.5 * robotWidth;
  for (const auto& d : obstacles) {
    const double r = d.radius + inflation;
    const long x0 = std::max(0L, static_cast<long>(std::floor((d.center.x - r - grid.origin.x) / resolution)));
    const long x1 = std::min(grid.nx - 1, static_cast<long>(std::floor((d.center.x + r - grid.origin.x) / resolution)));
    const long y0 = std::max(0L, static_cast<long>(std::floor((d.center.y - r - grid.origin.y) / resolution)));
    const long y1 = std::min(grid.ny - 1, static_cast<long>(std::floor((d.center.y + r - grid.origin.y) / resolution)));
    for (long iy = y0; iy <= y1; ++iy) {
      for (long ix = x0; ix <= x1; ++ix) {
        const double cx0 = grid.origin.x + ix * resolution;
        const double cy0 = grid.origin.y + iy * resolution;
        const double dx = std::max({cx0 - d.center.x, 0.0, d.center.x - (cx0 + resolution)});
        const double dy = std::max({cy0 - d.center.y, 0.0, d.center.y - (cy0 + resolution)});
        if (std::hypot(dx, dy) < r) blocked[static_cast<std::size_t>(grid.index(ix, iy))] = 1;
      }
    }
  }
  blocked[static_cast<std::size_t>(grid.index(sx, sy))] = 0;
  if (blocked[static_cast<std::size_t>(grid.index(gx, gy))]) return std::nullopt;

  auto octile = [&](long ix, long iy) {
    const double dx = std::abs(static_cast<double>(ix - gx));
    const double dy = std::abs(static_cast<double>(iy - gy));
    return resolution * (std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy));
  };
  const std::size_t cells = static_cast<std::size_t>(grid.nx * grid.ny);
  std::vector<double> g(cells, kInf);
  std::vector<long> parent(cells, -1);
  std::vector<char> closed(cells, 0);
  using Item = std::tuple<double, double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const long s = grid.index(sx, sy);
  const long t = grid.index(gx, gy);
  g[static_cast<std::size_t>(s)] = 0.0;
  open.push({octile(sx, sy), octile(sx, sy), s});
  while (!open.empty()) {
    const auto [f, h, idx] = open.top();
    open.pop();
    if (closed[static_cast<std::size_t>(idx)]) continue;
    closed[static_cast<std::size_t>(idx)] = 1;
    if (idx == t) break;
    const long ix = idx % grid.nx;
    const long iy = idx / grid.nx;
    for (const auto& [dx, dy] : kNeighbours) {
      const long jx = ix + dx;
      const long jy = iy + dy;
      if (!grid.contains(jx, jy)) continue;
      const long j = grid.index(jx, jy);
      if (blocked[static_cast<std::size_t>(j)] || closed[static_cast<std::size_t>(j)]) continue;
      const double ng = g[static_cast<std::size_t>(idx)] +
                        resolution * ((dx != 0 && dy != 0) ? std::numbers::sqrt2 : 1.0);
      if (ng < g[static_cast<std::size_t>(j)]) {
        g[static_cast<std::size_t>(j)] = ng;
        parent[static_cast<std::size_t>(j)] = idx;
        const double hj = octile(jx, jy);
        open.push({ng + hj, hj, j});
      }
    }
  }
  if (!closed[static_cast<std::size_t>(t)]) return std::nullopt;

  GridPath out;
  out.cost = g[static_cast<std::size_t>(t)];
  std::vector<long> chain;
  for (long k = t; k >= 0; k = parent[static_cast<std::size_t>(k)]) chain.push_back(k);
  std::reverse(chain.begin(), chain.end());
  out.polyline.push_back(start);
  for (std::size_t k = 1; k + 1 < chain.size(); ++k) {
    out.polyline.push_back(grid.centre(chain[k] % grid.nx, chain[k] / grid.nx));
  }
  out.polyline.push_back(goal);
  return out;
}

double polylineLength(std::span<const Point2> polyline) {
  double len = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) len += distance(polyline[i - 1], polyline[i]);
  return len;
}

Point2 pointAlongPolyline(std::span<const Point2> polyline, double d) {
  if (polyline.empty()) return {};
  double remaining = d;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const double len = distance(polyline[i - 1], polyline[i]);
    if (len >= remaining && len > 0.0) {
      return polyline[i - 1] + (polyline[i] - polyline[i - 1]) * (remaining / len);
    }
    remaining -= len;
  }
  return polyline.back();
}

}  // namespace mhplan
