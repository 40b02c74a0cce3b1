#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace pudq;
using pudq::testing::noiseless_graph;
using pudq::testing::random_graph;
using pudq::testing::random_pose;

namespace {

Eigen::Matrix3d se2_matrix(const EuclideanPose& p) {
  Eigen::Matrix3d m;
  m << std::cos(p.theta), -std::sin(p.theta), p.tx,
       std::sin(p.theta), std::cos(p.theta), p.ty,
       0, 0, 1;
  return m;
}

double max_pose_error(const ProductPoint& a, const ProductPoint& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < num_poses(a); ++i) {
    const Pudq x = block(a, i), y = block(b, i);
    worst = std::max(worst, std::min((x - y).cwiseAbs().maxCoeff(), (x + y).cwiseAbs().maxCoeff()));
  }
  return worst;
}

SynthConfig trial_config(int n, std::uint64_t seed, double sigma_w) {
  SynthConfig c;
  c.n_vertices = n;
  c.rng_seed = seed;
  c.sigma_w = sigma_w;
  return c;
}

}  // namespace

TEST(Odometry, NoiselessRecoversGroundTruth) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PoseGraph g = noiseless_graph(30, seed);
    EXPECT_LE(max_pose_error(init_odometry(g), stack(g.vertices)), 1e-12);
  }
}

TEST(Odometry, MatchesHomogeneousMatrixChain) {
  Rng rng(40, Stream::test);
  for (int trial = 0; trial < 50; ++trial) {
    PoseGraph g;
    g.vertices.assign(3, identity());
    for (int k = 0; k < 2; ++k) {
      Edge e;
      e.i = k;
      e.j = k + 1;
      e.z = random_pose(rng);
      e.omega = Mat3::Identity();
      g.edges.push_back(e);
    }
    const ProductPoint X = init_odometry(g);
    Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
    for (int k = 0; k < 3; ++k) {
      if (k > 0) T = T * se2_matrix(to_euclidean(g.edges[static_cast<std::size_t>(k - 1)].z));
      EXPECT_LE((se2_matrix(to_euclidean(block(X, k))) - T).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Odometry, ReversedEdgesAndAnchor) {
  PoseGraph g = noiseless_graph(10, 3);
  for (Edge& e : g.edges)
    if (e.j == e.i + 1 && e.i % 2 == 1) {
      std::swap(e.i, e.j);
      e.z = inverse(e.z);
    }
  g.anchor = 4;
  const ProductPoint X = init_odometry(g);
  EXPECT_LE((block(X, 4) - identity()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(max_pose_error(X, regauge(stack(g.vertices), 4)), 1e-12);
}

TEST(Odometry, MissingChainEdgeThrows) {
  PoseGraph g = noiseless_graph(5, 1);
  g.edges.erase(g.edges.begin() + 2);
  EXPECT_THROW(init_odometry(g), Error);
}

TEST(Chordal, NoiselessRecoversGroundTruth) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PoseGraph g = noiseless_graph(40, seed);
    ChordalInfo info;
    const ProductPoint X = init_chordal(g, &info);
    EXPECT_FALSE(info.fell_back);
    EXPECT_LE(max_pose_error(X, stack(g.vertices)), 1e-8);
    for (Eigen::Index i = 0; i < num_poses(X); ++i) EXPECT_NEAR(block(X, i).head<2>().norm(), 1.0, 1e-12);
  }
}

TEST(Chordal, AnchorIsIdentity) {
  PoseGraph g = random_graph(20, 6);
  g.anchor = 7;
  const ProductPoint X = init_chordal(g);
  EXPECT_LE((block(X, 7) - identity()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Chordal, UsuallyNoWorseThanOdometry) {
  int wins = 0;
  const int trials = 50;
  for (int s = 0; s < trials; ++s) {
    const TrialDataset t = synthesize_trial(trial_config(200, 500 + static_cast<std::uint64_t>(s), 1e-3));
    if (cost(t.graph, init_chordal(t.graph)) <= cost(t.graph, init_odometry(t.graph))) ++wins;
  }
  EXPECT_GE(wins, 40);
}

TEST(Rpe, IdenticalEstimatesGiveZero) {
  const TrialDataset t = synthesize_trial(trial_config(50, 1, 1e-3));
  const ProductPoint gt = stack(t.ground_truth);
  const RpeReport r = rpe_report(gt, gt, t.graph.edges);
  EXPECT_EQ(r.rpe_l, 0.0);
  EXPECT_EQ(r.rpe_e, 0.0);
  EXPECT_EQ(r.per_edge.size(), t.graph.edges.size());
}

TEST(Rpe, QuarterTurnKnownValues) {
  std::vector<Edge> edges(1);
  edges[0].i = 0;
  edges[0].j = 1;
  const ProductPoint gt = stack({identity(), identity()});
  const ProductPoint est = stack({identity(), from_euclidean({0, 0, kPi / 4})});
  EXPECT_NEAR(rpe_lie(est, gt, edges), kPi / 8, 1e-15);
  EXPECT_NEAR(rpe_euclidean(est, gt, edges), kPi / 4, 1e-15);
  const ProductPoint shifted = stack({identity(), from_euclidean({3, 4, 0})});
  EXPECT_NEAR(rpe_euclidean(shifted, gt, edges), 5.0, 1e-14);
  EXPECT_NEAR(rpe_lie(shifted, gt, edges), 2.5, 1e-14);
}

TEST(Rpe, GaugeInvariant) {
  const TrialDataset t = synthesize_trial(trial_config(60, 2, 1e-3));
  const ProductPoint est = init_odometry(t.graph), gt = stack(t.ground_truth);
  Rng rng(41, Stream::test);
  const Pudq a = random_pose(rng);
  ProductPoint moved(est.size());
  for (Eigen::Index i = 0; i < num_poses(est); ++i) moved.segment<4>(4 * i) = compose(a, block(est, i));
  EXPECT_NEAR(rpe_lie(moved, gt, t.graph.edges), rpe_lie(est, gt, t.graph.edges), 1e-10);
  EXPECT_NEAR(rpe_euclidean(moved, gt, t.graph.edges), rpe_euclidean(est, gt, t.graph.edges), 1e-10);
}

TEST(Rpe, EuclideanIsTwiceLieForSmallErrors) {
  Rng rng(42, Stream::test);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Pudq> gt, est;
    for (int i = 0; i < 10; ++i) {
      gt.push_back(random_pose(rng));
      est.push_back(compose(gt.back(), from_euclidean({1e-3 * rng.normal(), 1e-3 * rng.normal(), 1e-3 * (2 * rng.uniform() - 1)})));
    }
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < 10; ++i) {
      Edge e;
      e.i = i;
      e.j = i + 1;
      edges.push_back(e);
    }
    const RpeReport r = rpe_report(stack(est), stack(gt), edges);
    EXPECT_NEAR(r.rpe_e / r.rpe_l, 2.0, 2e-3);
  }
}

TEST(Rpe, MismatchedSizesThrow) {
  EXPECT_THROW(rpe_report(stack({identity()}), stack({identity(), identity()}), {}), Error);
}

TEST(Rpe, PercentReduction) {
  EXPECT_DOUBLE_EQ(percent_reduction(2.0, 1.0), 50.0);
  EXPECT_DOUBLE_EQ(percent_reduction(1.0, 1.5), -50.0);
  EXPECT_EQ(percent_reduction(0.0, 0.0), 0.0);
  EXPECT_NEAR(minimal_angle(kPi - 0.1, -kPi + 0.1), 0.2, 1e-15);
}
