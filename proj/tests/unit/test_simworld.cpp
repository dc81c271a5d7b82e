#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mhplan/campaign.hpp"
#include "mhplan/simworld.hpp"

using namespace mhplan;

namespace {

void expectValidForest(const ForestWorld& w, const ForestSpec& spec) {
  for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
    const Tree& t = w.obstacles[i];
    EXPECT_GE(t.diameter, spec.diameterMin);
    EXPECT_LE(t.diameter, spec.diameterMax);
    EXPECT_GE(t.center.x, 0.0);
    EXPECT_LE(t.center.x, spec.width);
    EXPECT_GE(t.center.y, 0.0);
    EXPECT_LE(t.center.y, spec.height);
    EXPECT_GE(distance(t.center, spec.start), spec.keepClearRadius + t.radius());
    EXPECT_GE(distance(t.center, spec.goal), spec.keepClearRadius + t.radius());
    for (std::size_t j = i + 1; j < w.obstacles.size(); ++j) {
      EXPECT_GE(distance(t.center, w.obstacles[j].center), t.radius() + w.obstacles[j].radius());
    }
  }
}

}  // namespace

TEST(Forest, UniformIsValid) {
  const ForestSpec spec;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 rng(s);
    expectValidForest(generateUniformForest(0.3, spec, rng), spec);
  }
}

TEST(Forest, ClustersAreValid) {
  const ForestSpec spec;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 rng(s);
    const auto w = generateClusterForest(0.1, spec, ClusterParams{}, rng);
    expectValidForest(w, spec);
    EXPECT_GT(w.obstacles.size(), 40u);
  }
}

TEST(Forest, UniformDensityAndSpread) {
  ForestSpec spec;
  spec.diameterMin = spec.diameterMax = 0.01;
  spec.keepClearRadius = 0.0;
  const double rho = 0.2;
  const int forests = 300;
  double total = 0;
  std::array<double, 4> quadrant{};
  for (int s = 0; s < forests; ++s) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(s) + 1000);
    const auto w = generateUniformForest(rho, spec, rng);
    total += static_cast<double>(w.obstacles.size());
    for (const auto& t : w.obstacles) {
      quadrant[static_cast<std::size_t>((t.center.x > 20) + 2 * (t.center.y > 5))] += 1;
    }
  }
  const double lambda = rho * spec.width * spec.height;
  EXPECT_NEAR(total / forests, lambda, 3 * std::sqrt(lambda / forests));
  double chi2 = 0;
  for (double q : quadrant) chi2 += (q - total / 4) * (q - total / 4) / (total / 4);
  EXPECT_LT(chi2, 16.27);  // chi2(3) 0.999
}

TEST(Forest, SameSeedSameForest) {
  std::mt19937_64 a(7), b(7);
  const auto wa = generateUniformForest(0.3, ForestSpec{}, a);
  const auto wb = generateUniformForest(0.3, ForestSpec{}, b);
  ASSERT_EQ(wa.obstacles.size(), wb.obstacles.size());
  for (std::size_t i = 0; i < wa.obstacles.size(); ++i) EXPECT_EQ(wa.obstacles[i].center, wb.obstacles[i].center);
}

TEST(Forest, InvalidArguments) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(generateUniformForest(-0.1, ForestSpec{}, rng), std::invalid_argument);
  ForestSpec bad;
  bad.diameterMin = 0.6;
  EXPECT_THROW(generateUniformForest(0.1, bad, rng), std::invalid_argument);
}

TEST(Barrier, RingsTheBounds) {
  const BarrierParams p;
  const auto ring = makeBarrier(40, 10, p);
  ASSERT_FALSE(ring.empty());
  for (const auto& t : ring) {
    const bool outside = t.center.x <= -p.endOffset + 1e-9 || t.center.x >= 40 + p.endOffset - 1e-9 ||
                         t.center.y <= -p.sideOffset + 1e-9 || t.center.y >= 10 + p.sideOffset - 1e-9;
    EXPECT_TRUE(outside);
  }
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const double gap = distance(ring[i].center, ring[(i + 1) % ring.size()].center) - p.diameter;
    EXPECT_LE(gap, p.gap + 1e-9);
    EXPECT_GT(gap, 0.0);
  }
}

TEST(Speed, Schedule) {
  const SpeedLimits s;
  EXPECT_DOUBLE_EQ(speedForClearance(s, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(speedForClearance(s, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(speedForClearance(s, 9.0), 5.0);
}

TEST(Tracking, StraightLine) {
  const std::vector<Point2> path{{0, 0}, {10, 0}};
  const Pose2 next = stepRobot(Pose2(0, 0, 0), path, SpeedLimits{}, 10.0, 0.1);
  EXPECT_NEAR(next.x, 0.5, 1e-12);
  EXPECT_NEAR(next.y, 0.0, 1e-12);
}

TEST(Tracking, StopsAtPathEnd) {
  const std::vector<Point2> path{{0, 0}, {0.2, 0}};
  const Pose2 next = stepRobot(Pose2(0, 0, 0), path, SpeedLimits{}, 10.0, 0.1);
  EXPECT_LE(next.x, 0.2 + 1e-12);
}

TEST(Tracking, TurnsTowardsPath) {
  const std::vector<Point2> path{{0, 0}, {0, 10}};
  const Pose2 next = stepRobot(Pose2(0, 0, 0), path, SpeedLimits{}, 10.0, 0.1);
  EXPECT_GT(next.theta, 0.0);
}

TEST(Validate, RejectsBadFields) {
  EpisodeConfig c;
  EXPECT_NO_THROW(validate(c));
  c.dt = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = EpisodeConfig{};
  c.mh.pMin = 0.99;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = EpisodeConfig{};
  c.speed.vMax = 0.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Episode, EmptyForestSucceeds) {
  for (auto kind : {PlannerKind::Baseline, PlannerKind::MultiHypothesis}) {
    EpisodeConfig c;
    c.density = 0.0;
    c.planner = kind;
    const auto r = runEpisode(c);
    EXPECT_EQ(r.outcome, Outcome::Success) << toString(kind);
    EXPECT_NEAR(r.pathLength, 39.0, 1.0);
    EXPECT_EQ(r.numTrees, 0u);
  }
}

TEST(Episode, DeterministicRecord) {
  EpisodeConfig c;
  c.density = 0.2;
  c.distribution = ForestDistribution::Clusters;
  c.seed = 99;
  const EpisodeTask task{0.2, ForestDistribution::Clusters, {PlannerKind::MultiHypothesis, 5, 0.95}, 0, 99};
  const auto a = runEpisode(c);
  const auto b = runEpisode(c);
  EXPECT_EQ(serializeRecord(task, a, true), serializeRecord(task, b, true));
  EXPECT_FALSE(a.trajectory.empty());
  EXPECT_FALSE(a.cycles.empty());
}

TEST(Episode, TimeoutRespected) {
  EpisodeConfig c;
  c.density = 0.0;
  c.maxSimTime = 2.0;
  const auto r = runEpisode(c);
  EXPECT_EQ(r.outcome, Outcome::Timeout);
  EXPECT_LE(r.simTime, 2.0 + 1e-9);
}

TEST(Episode, ReturnsWorld) {
  EpisodeConfig c;
  c.density = 0.1;
  c.seed = 5;
  ForestWorld w;
  const auto r = runEpisode(c, &w);
  EXPECT_EQ(r.numTrees, w.obstacles.size());
  EXPECT_FALSE(w.barrier.empty());
}
