#include "crowdbqp/motion_context.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "crowdbqp/scene.hpp"
#include "oracles.hpp"

using namespace crowdbqp;
using crowdbqp::testing::enumerated_min_tree;
using crowdbqp::testing::rand_index;

namespace {

TargetState state_at(Point p, Eigen::Vector2d v) {
  TargetState s;
  s.position = p;
  s.velocity = v;
  s.history = {p};
  return s;
}

double tree_weight(const std::vector<MstEdge>& edges) {
  double w = 0;
  for (const auto& e : edges) w += e.rest;
  return w;
}

}  // namespace

TEST(MotionCost, PeakAtPrediction) {
  const auto s = state_at(Point(10, 10), Eigen::Vector2d(2, -1));
  const std::vector<Point> cands{Point(10, 10), Point(12, 9), Point(14, 8)};
  const Eigen::VectorXd v = motion_cost(s, MotionModel::for_target_size(6), cands);
  EXPECT_DOUBLE_EQ(v(1), 1.0);
  EXPECT_LT(v(0), 1.0);
  EXPECT_LT(v(2), 1.0);
}

TEST(MotionCost, ZeroVelocityPeaksAtPosition) {
  const auto s = state_at(Point(4, 5), Eigen::Vector2d::Zero());
  const std::vector<Point> cands{Point(3, 5), Point(4, 5)};
  const Eigen::VectorXd v = motion_cost(s, MotionModel::for_target_size(6), cands);
  EXPECT_DOUBLE_EQ(v(1), 1.0);
}

TEST(MotionCost, MahalanobisTwo) {
  // sigma = 3 px, two standard deviations = 6 px
  const auto s = state_at(Point(0, 0), Eigen::Vector2d::Zero());
  const std::vector<Point> cands{Point(6, 0)};
  EXPECT_NEAR(motion_cost(s, MotionModel::for_target_size(6), cands)(0), std::exp(-2.0), 1e-15);
}

TEST(MotionCost, SingularCovariance) {
  MotionModel mm;
  mm.sigma << 1, 0, 0, 0;
  const std::vector<Point> cands{Point(0, 0)};
  EXPECT_THROW(motion_cost(state_at(Point(0, 0), Eigen::Vector2d::Zero()), mm, cands), std::invalid_argument);
}

TEST(MotionCost, BlockMaxNearestToPrediction) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-8, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = state_at(Point(u(rng), u(rng)), Eigen::Vector2d(u(rng) / 4, u(rng) / 4));
    std::vector<Point> cands;
    for (int i = 0; i < 12; ++i) cands.emplace_back(u(rng), u(rng));
    const Eigen::VectorXd v = motion_cost(s, MotionModel::for_target_size(6), cands);
    Eigen::Index best;
    v.maxCoeff(&best);
    const Point pred = s.position + s.velocity;
    for (const auto& c : cands) EXPECT_LE((cands[static_cast<std::size_t>(best)] - pred).norm(), (c - pred).norm() + 1e-12);
  }
}

TEST(CoherentGroups, IdenticalAdjacentTracks) {
  std::vector<std::vector<Point>> h(2);
  for (int t = 0; t < 11; ++t) {
    h[0].emplace_back(2.0 * t, 0);
    h[1].emplace_back(2.0 * t, 5);
  }
  EXPECT_EQ(coherent_groups(h, {}), (std::vector<int>{0, 0}));
}

TEST(CoherentGroups, OppositeVelocities) {
  std::vector<std::vector<Point>> h(2);
  for (int t = 0; t < 11; ++t) {
    h[0].emplace_back(2.0 * t, 0);
    h[1].emplace_back(20 - 2.0 * t, 5);
  }
  EXPECT_EQ(coherent_groups(h, {}), (std::vector<int>{0, 1}));
}

TEST(CoherentGroups, ShortHistoriesAreSingletons) {
  std::vector<std::vector<Point>> h{{Point(0, 0)}, {Point(1, 0)}, {Point(2, 0), Point(3, 0)}};
  EXPECT_EQ(coherent_groups(h, {}), (std::vector<int>{0, 1, 2}));
}

TEST(CoherentGroups, RecoversPlantedGroupsAndIsDeterministic) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SceneConfig cfg;
    cfg.n_targets = 30;
    cfg.n_groups = 3;
    cfg.n_frames = 11;
    cfg.noise_sigma = 0;
    cfg.formation_jitter = 0;
    cfg.seed = seed;
    const Scene s = generate_scene(cfg);
    std::vector<std::vector<Point>> h(30);
    for (const auto& frame : s.truth.positions)
      for (std::size_t i = 0; i < frame.size(); ++i) h[i].push_back(frame[i]);
    CoherenceConfig cc;
    cc.max_distance = 4 * cfg.target_size();
    const auto labels = coherent_groups(h, cc);
    EXPECT_DOUBLE_EQ(rand_index(labels, s.truth.group_ids), 1.0) << "seed " << seed;
    EXPECT_EQ(labels, coherent_groups(h, cc));
  }
}

TEST(FitVelocity, ConstantMotion) {
  std::vector<Point> h;
  for (int t = 0; t < 8; ++t) h.emplace_back(1.5 * t, -0.5 * t + 3);
  EXPECT_TRUE(fit_velocity(h, 5).isApprox(Eigen::Vector2d(1.5, -0.5)));
  EXPECT_EQ(fit_velocity(std::vector<Point>{Point(1, 1)}, 5), Eigen::Vector2d::Zero());
}

TEST(NeighborWeights, Rules) {
  NeighborSet two{{1, {}, 4.0, 0}, {2, {}, 4.0, 0}};
  assign_neighbor_weights(two, 6);
  EXPECT_DOUBLE_EQ(two[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(two[1].weight, 0.5);
  NeighborSet ratio{{1, {}, 3.0, 0}, {2, {}, 6.0, 0}};
  assign_neighbor_weights(ratio, 6);
  EXPECT_NEAR(ratio[0].weight / ratio[1].weight, std::exp(3.0 / 6.0), 1e-12);
  EXPECT_NEAR(ratio[0].weight + ratio[1].weight, 1.0, 1e-12);
  // permutation equivariance
  NeighborSet swapped{ratio[1], ratio[0]};
  assign_neighbor_weights(swapped, 6);
  EXPECT_DOUBLE_EQ(swapped[0].weight, ratio[1].weight);
}

TEST(NeighborSets, AtMostFiveSameGroup) {
  std::vector<TargetState> ts;
  for (int i = 0; i < 9; ++i) {
    auto s = state_at(Point(i * 3.0, 0), Eigen::Vector2d(1, 0));
    s.id = i;
    s.group_id = i < 8 ? 0 : 1;
    ts.push_back(s);
  }
  const auto sets = build_neighbor_sets(ts, 6);
  EXPECT_EQ(sets[0].size(), 5u);
  EXPECT_TRUE(sets[8].empty());
  for (const auto& nb : sets[0]) EXPECT_NE(nb.id, 8);
  double sum = 0;
  for (const auto& nb : sets[3]) sum += nb.weight;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(NeighborhoodMotion, SingleNeighborSameVelocityEqualsMotion) {
  const auto s = state_at(Point(10, 10), Eigen::Vector2d(1, 2));
  NeighborSet ns{{1, Eigen::Vector2d(1, 2), 3.0, 0}};
  assign_neighbor_weights(ns, 6);
  const std::vector<Point> cands{Point(11, 12), Point(9, 9), Point(13, 10)};
  const auto mm = MotionModel::for_target_size(6);
  EXPECT_TRUE(neighborhood_motion_cost(s, ns, mm, cands).isApprox(motion_cost(s, mm, cands)));
  EXPECT_EQ(neighborhood_motion_cost(s, {}, mm, cands), Eigen::VectorXd::Zero(3));
}

TEST(ProximitySimilarity, Values) {
  const BlockLayout layout({2, 2});
  const std::vector<Point> pts{Point(0, 0), Point(50, 50), Point(0, 0), Point(6, 0)};
  const Eigen::MatrixXd s = proximity_similarity(pts, layout, 3.0);
  EXPECT_DOUBLE_EQ(s(0, 2), 1.0);
  EXPECT_NEAR(s(0, 3), std::exp(-2.0), 1e-15);
  EXPECT_EQ(s(0, 1), 0.0);  // same block
  EXPECT_EQ(s(2, 3), 0.0);
  EXPECT_EQ(s(1, 3), 0.0);  // beyond 3 sigma
  EXPECT_TRUE(s.isApprox(s.transpose()));
  EXPECT_EQ(s.diagonal(), Eigen::VectorXd::Zero(4));
}

TEST(ProximitySimilarity, MatchesDenseOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 30);
  const BlockLayout layout({4, 3, 5, 2, 4});
  std::vector<Point> pts;
  for (Index i = 0; i < layout.num_vars(); ++i) pts.emplace_back(u(rng), u(rng));
  const Eigen::MatrixXd s = proximity_similarity(pts, layout, 2.5);
  for (Index i = 0; i < layout.num_vars(); ++i) {
    for (Index j = 0; j < layout.num_vars(); ++j) {
      const double d = (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).norm();
      const double want = layout.block_of(i) != layout.block_of(j) && d <= 7.5 ? std::exp(-d * d / 12.5) : 0.0;
      EXPECT_NEAR(s(i, j), want, 1e-15);
    }
  }
}

TEST(GroupMst, SmallCases) {
  const std::vector<Point> two{Point(0, 0), Point(3, 4)};
  const auto e2 = build_group_mst(two);
  ASSERT_EQ(e2.size(), 1u);
  EXPECT_DOUBLE_EQ(e2[0].rest, 5.0);
  const std::vector<Point> line{Point(0, 0), Point(1, 0), Point(3, 0)};
  const auto e3 = build_group_mst(line);
  ASSERT_EQ(e3.size(), 2u);
  EXPECT_DOUBLE_EQ(tree_weight(e3), 3.0);
  EXPECT_EQ(e3[0].a, 0);
  EXPECT_EQ(e3[0].b, 1);
  EXPECT_EQ(e3[1].a, 1);
  EXPECT_EQ(e3[1].b, 2);
  EXPECT_TRUE(build_group_mst(std::vector<Point>{Point(1, 1)}).empty());
}

TEST(GroupMst, TieBreakByIds) {
  // square: four equal sides, the lowest id pairs win
  const std::vector<Point> sq{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
  const auto e = build_group_mst(sq);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(std::make_pair(e[0].a, e[0].b), std::make_pair(0, 1));
  EXPECT_EQ(std::make_pair(e[1].a, e[1].b), std::make_pair(0, 3));
  EXPECT_EQ(std::make_pair(e[2].a, e[2].b), std::make_pair(1, 2));
}

TEST(GroupMst, MatchesEnumeratedMinimum) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 50);
  for (int m = 2; m <= 8; ++m) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<Point> pts;
      for (int i = 0; i < m; ++i) pts.emplace_back(u(rng), u(rng));
      const auto e = build_group_mst(pts);
      EXPECT_EQ(static_cast<int>(e.size()), m - 1);
      EXPECT_NEAR(tree_weight(e), enumerated_min_tree(pts), 1e-9);
    }
  }
}

TEST(GroupSimilarity, KernelAndSparsity) {
  const std::vector<Point> centers{Point(0, 0), Point(10, 0), Point(100, 100)};
  const GroupModel g = build_group_model(centers, {0, 0, 1}, 0);
  ASSERT_EQ(g.edges.size(), 1u);
  const BlockLayout layout({2, 2, 1});
  // block 0: at 0 and 0; block 1: rest length away and 2 sigma_g further
  const std::vector<Point> pts{Point(0, 0), Point(0, 1), Point(10, 0), Point(16, 0), Point(10, 1)};
  const Eigen::MatrixXd s = group_similarity(pts, layout, g, 3.0, 5);
  EXPECT_DOUBLE_EQ(s(0, 2), 1.0);
  EXPECT_NEAR(s(0, 3), std::exp(-2.0), 1e-15);
  EXPECT_EQ(s(0, 4), 0.0);
  EXPECT_EQ(s(2, 4), 0.0);
  EXPECT_TRUE(s.isApprox(s.transpose()));
  EXPECT_GE(s.minCoeff(), 0.0);
  EXPECT_LE(s.maxCoeff(), 1.0);
  EXPECT_THROW(group_similarity(pts, layout, g, 3.0, 11), std::runtime_error);
}

TEST(GroupSimilarity, LaplacianIsPsd) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 20);
  std::vector<Point> centers;
  for (int i = 0; i < 5; ++i) centers.emplace_back(u(rng), u(rng));
  const GroupModel g = build_group_model(centers, {0, 0, 0, 0, 0}, 0);
  const BlockLayout layout({3, 3, 3, 3, 3});
  std::vector<Point> pts;
  for (int b = 0; b < 5; ++b)
    for (int i = 0; i < 3; ++i) pts.push_back(centers[static_cast<std::size_t>(b)] + Point(u(rng) / 5, u(rng) / 5));
  const Eigen::MatrixXd q = laplacianize(layout, group_similarity(pts, layout, g, 3.0, 0), LaplacianMode::attract).matrix;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}
