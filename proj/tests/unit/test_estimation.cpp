#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mhplan/estimation.hpp"

using namespace mhplan;

namespace {

SensorParams noiseless() {
  SensorParams p;
  p.sigmaR0 = 0;
  p.kR = 0;
  p.sigmaPhi = 0;
  p.sigmaD0 = 0;
  p.kD = 0;
  return p;
}

Detection exactDetection(const Point2& target, const Pose2& pose, double diameter) {
  const Point2 d = target - pose.position();
  return {d.norm(), normalizeAngle(std::atan2(d.y, d.x) - pose.theta), diameter};
}

}  // namespace

TEST(Detections, NoiselessDeadAhead) {
  const std::vector<Tree> world{{{10, 0}, 0.4}};
  std::mt19937_64 rng(1);
  const auto d = simulateDetections(world, Pose2(0, 0, 0), noiseless(), rng);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].detection.range, 10.0);
  EXPECT_DOUBLE_EQ(d[0].detection.bearing, 0.0);
  EXPECT_DOUBLE_EQ(d[0].detection.diameter, 0.4);
}

TEST(Detections, OutOfRangeAndFov) {
  const std::vector<Tree> world{{{25, 0}, 0.4}, {{-5, 0}, 0.4}, {{0, 5}, 0.4}};
  std::mt19937_64 rng(1);
  EXPECT_TRUE(simulateDetections(world, Pose2(0, 0, 0), SensorParams{}, rng).empty());
}

TEST(Detections, Occlusion) {
  const std::vector<Tree> world{{{5, 0}, 0.4}, {{10, 0}, 0.4}};
  std::mt19937_64 rng(1);
  const auto d = simulateDetections(world, Pose2(0, 0, 0), noiseless(), rng);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].truthId, 0u);
}

TEST(Detections, NoiseStatistics) {
  const std::vector<Tree> world{{{10, 0}, 0.4}};
  SensorParams p;
  std::mt19937_64 rng(5);
  double sum = 0, sumSq = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double r = simulateDetections(world, Pose2(0, 0, 0), p, rng).at(0).detection.range;
    sum += r;
    sumSq += r * r;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sumSq / n - mean * mean);
  EXPECT_NEAR(mean, 10.0, 0.01);
  EXPECT_NEAR(sd, p.sigmaRange(10.0), 0.01 * p.sigmaRange(10.0) + 0.005);
}

TEST(Landmarks, InitFromDetection) {
  const auto lm = initializeLandmark(0, {10, 0, 0.3}, Pose2(0, 0, 0), SensorParams{});
  EXPECT_NEAR(lm.positionMean.x, 10.0, 1e-12);
  EXPECT_NEAR(lm.positionMean.y, 0.0, 1e-12);
  EXPECT_EQ(lm.numUpdates, 1);
  EXPECT_GT(lm.positionCov.determinant(), 0.0);
}

TEST(Association, ExactMatchAndGate) {
  const SensorParams p;
  const Pose2 pose(0, 0, 0);
  const auto lm = initializeLandmark(0, {8, 0.1, 0.3}, pose, p);
  const std::vector<LandmarkEstimate> est{lm};
  const std::vector<Detection> dets{{8, 0.1, 0.3}, {8, 1.2, 0.3}};
  const auto a = associate(dets, est, pose, p);
  EXPECT_EQ(a.landmarkId[0], 0);
  EXPECT_NEAR(a.distanceSquared[0], 0.0, 1e-12);
  EXPECT_EQ(a.landmarkId[1], kNewLandmark);
}

TEST(Association, OneToOne) {
  const SensorParams p;
  const Pose2 pose(0, 0, 0);
  const std::vector<LandmarkEstimate> est{initializeLandmark(0, {8, 0.0, 0.3}, pose, p)};
  const std::vector<Detection> dets{{8.3, 0.0, 0.3}, {8.05, 0.0, 0.3}};
  const auto a = associate(dets, est, pose, p);
  EXPECT_EQ(a.landmarkId[1], 0);
  EXPECT_EQ(a.landmarkId[0], kNewLandmark);
}

TEST(Landmarks, NewIdsAboveMaximum) {
  const SensorParams p;
  const Pose2 pose(0, 0, 0);
  std::vector<LandmarkEstimate> est{initializeLandmark(7, {8, 0.0, 0.3}, pose, p)};
  const std::vector<Detection> dets{{5, 0.5, 0.3}};
  Association a{{kNewLandmark}, {0.0}};
  const auto out = updateLandmarks(est, a, dets, pose, p);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].id, 8);
}

TEST(Landmarks, NoiselessConvergenceAndShrinkingCovariance) {
  SensorParams p;
  const Point2 truth{6, 3};
  std::vector<LandmarkEstimate> est{
      initializeLandmark(0, exactDetection(truth + Point2{0.3, -0.2}, Pose2(0, 0, 0), 0.3), Pose2(0, 0, 0), p)};
  double prevTrace = est[0].positionCov.trace();
  for (int k = 0; k < 40; ++k) {
    const Pose2 pose(0.1 * k, 0.05 * k, 0.2);
    const std::vector<Detection> dets{exactDetection(truth, pose, 0.3)};
    est = updateLandmarks(est, Association{{0}, {0.0}}, dets, pose, p);
    const double tr = est[0].positionCov.trace();
    EXPECT_LT(tr, prevTrace);
    prevTrace = tr;
  }
  EXPECT_NEAR(est[0].positionMean.x, truth.x, 0.05);
  EXPECT_NEAR(est[0].positionMean.y, truth.y, 0.05);
  EXPECT_EQ(est[0].numUpdates, 41);
}

// Batch Gauss-Newton over all range-bearing measurements with known poses.
TEST(Landmarks, AgreesWithBatchLeastSquares) {
  const SensorParams p;
  const Point2 truth{12, 4};
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<Pose2> poses;
  std::vector<Detection> meas;
  for (int k = 0; k < 50; ++k) {
    const Pose2 pose(0.15 * k, 3.0 + 0.02 * k, 0.1);
    Detection d = exactDetection(truth, pose, 0.3);
    d.range += p.sigmaRange(d.range) * g(rng);
    d.bearing += p.sigmaPhi * g(rng);
    poses.push_back(pose);
    meas.push_back(d);
  }

  std::vector<LandmarkEstimate> est{initializeLandmark(0, meas[0], poses[0], p)};
  for (std::size_t k = 1; k < meas.size(); ++k) {
    est = updateLandmarks(est, Association{{0}, {0.0}}, std::span(&meas[k], 1), poses[k], p);
  }

  Eigen::Vector2d x(est[0].positionMean.x, est[0].positionMean.y);
  Eigen::Matrix2d info;
  for (int it = 0; it < 20; ++it) {
    info.setZero();
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < meas.size(); ++k) {
      const double dx = x(0) - poses[k].x, dy = x(1) - poses[k].y;
      const double q = dx * dx + dy * dy, r = std::sqrt(q);
      Eigen::Matrix2d h;
      h << dx / r, dy / r, -dy / q, dx / q;
      const Eigen::Vector2d res(meas[k].range - r,
                                normalizeAngle(meas[k].bearing - (std::atan2(dy, dx) - poses[k].theta)));
      const double sr = p.sigmaRange(r);
      const Eigen::Matrix2d w = Eigen::Vector2d(1 / (sr * sr), 1 / (p.sigmaPhi * p.sigmaPhi)).asDiagonal();
      info += h.transpose() * w * h;
      grad += h.transpose() * w * res;
    }
    x += info.ldlt().solve(grad);
  }
  const Eigen::Matrix2d batchCov = info.inverse();

  const Eigen::Vector2d err(est[0].positionMean.x - truth.x, est[0].positionMean.y - truth.y);
  EXPECT_LT(err.transpose() * est[0].positionCov.inverse() * err, 13.82);  // chi2(2) 0.999
  EXPECT_NEAR(est[0].positionCov.trace(), batchCov.trace(), 0.1 * batchCov.trace());
  EXPECT_NEAR(est[0].positionMean.x, x(0), 3 * std::sqrt(batchCov(0, 0)));
  EXPECT_NEAR(est[0].positionMean.y, x(1), 3 * std::sqrt(batchCov(1, 1)));
}

// Normalised estimation error squared averaged over independent runs.
TEST(Landmarks, FilterConsistency) {
  const SensorParams p;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  const Point2 truth{9, -2};
  double nees = 0;
  const int runs = 300;
  for (int run = 0; run < runs; ++run) {
    std::vector<LandmarkEstimate> est;
    for (int k = 0; k < 10; ++k) {
      const Pose2 pose(0.3 * k, 0, 0);
      Detection d = exactDetection(truth, pose, 0.3);
      d.range += p.sigmaRange(d.range) * g(rng);
      d.bearing += p.sigmaPhi * g(rng);
      if (est.empty()) {
        est.push_back(initializeLandmark(0, d, pose, p));
      } else {
        est = updateLandmarks(est, Association{{0}, {0.0}}, std::span(&d, 1), pose, p);
      }
    }
    const Eigen::Vector2d e(est[0].positionMean.x - truth.x, est[0].positionMean.y - truth.y);
    nees += e.transpose() * est[0].positionCov.inverse() * e;
  }
  nees /= runs;
  // 95% band for the mean of 300 chi2(2) samples.
  EXPECT_GT(nees, 1.7);
  EXPECT_LT(nees, 2.35);
}
