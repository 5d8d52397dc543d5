#include <gtest/gtest.h>

#include "lsh/modularity.hpp"
#include "oracles.hpp"

using namespace lsh;

namespace {

WeightedDigraph two_node_pair() {
  const std::vector<WeightedEdge> edges{{0, 1, 1.0}, {1, 0, 1.0}};
  return build_graph(2, edges);
}

}  // namespace

TEST(Modularity, SingleClusterSymmetricPair) {
  const auto g = two_node_pair();
  EXPECT_DOUBLE_EQ(modularity(g, Partition::from_assignment(g, {0, 0}), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(modularity(g, Partition::from_assignment(g, {0, 0}), 0.5), 0.5);
}

TEST(Modularity, SingletonPair) {
  const auto g = two_node_pair();
  EXPECT_DOUBLE_EQ(modularity(g, Partition::singletons(g), 1.0), -0.5);
}

TEST(Modularity, BarbellTrianglesAreTheMaximum) {
  const auto g = oracle::barbell();
  const std::vector<ClusterId> triangles{0, 0, 0, 1, 1, 1};
  EXPECT_NEAR(modularity(g, Partition::from_assignment(g, triangles), 1.0), 5.0 / 14.0, 1e-15);
  const auto best = oracle::best_partition(g, 1.0);
  EXPECT_NEAR(best.q, 5.0 / 14.0, 1e-15);
  EXPECT_TRUE(oracle::same_partition(best.assignment, triangles));
}

TEST(Modularity, UndefinedWithoutEdges) {
  const auto g = build_graph(3, {});
  EXPECT_THROW(modularity(g, Partition::singletons(g), 1.0), ConfigError);
}

TEST(Modularity, RejectsBadResolution) {
  const auto g = two_node_pair();
  EXPECT_THROW(modularity(g, Partition::singletons(g), 0.0), ConfigError);
}

TEST(Modularity, MatchesEdgeListOracleProperty) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = oracle::random_graph(rng, {});
    const auto assign = oracle::random_assignment(rng, g.node_count(), 1 + uniform_index(rng, 6));
    const double rho = 0.05 + 2.0 * uniform01(rng);
    EXPECT_NEAR(modularity(g, Partition::from_assignment(g, assign), rho),
                oracle::modularity(g, assign, rho), 1e-12);
  }
}

TEST(Modularity, InvariantUnderRelabelling) {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_graph(rng, {});
    auto assign = oracle::random_assignment(rng, g.node_count(), 5);
    const double q = modularity(g, Partition::from_assignment(g, assign), 1.0);
    std::vector<ClusterId> perm{3, 0, 4, 1, 2};
    for (auto& c : assign) c = perm[c] + 7;
    EXPECT_NEAR(modularity(g, Partition::from_assignment(g, assign), 1.0), q, 1e-12);
  }
}

TEST(Modularity, SymmetricGraphsMatchUndirectedFormula) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_graph(rng, {.symmetric = true});
    const auto assign = oracle::random_assignment(rng, g.node_count(), 4);
    const double rho = 0.5 + uniform01(rng);
    // e_ii: fraction of edge ends inside c_i; a_i: fraction of edge ends in c_i
    double m = 0.0;
    std::map<ClusterId, double> inner, ends;
    for (const auto& e : g.edges()) {
      m += e.weight;
      if (assign[e.src] == assign[e.dst]) inner[assign[e.src]] += e.weight;
      ends[assign[e.src]] += e.weight;
    }
    double newman = 0.0;
    for (const auto& [c, w] : ends) newman += inner[c] / m - rho * (w / m) * (w / m);
    EXPECT_NEAR(modularity(g, Partition::from_assignment(g, assign), rho), newman, 1e-12);
  }
}

TEST(MoveGain, OwnClusterIsZero) {
  const auto g = oracle::barbell();
  const auto p = Partition::from_assignment(g, {0, 0, 1, 1, 2, 2});
  for (NodeId u = 0; u < 6; ++u) EXPECT_EQ(move_gain(g, p, u, p.cluster_of(u), 1.0), 0.0);
}

TEST(MoveGain, BarbellHandValues) {
  const auto g = oracle::barbell();
  const auto p = Partition::singletons(g);
  // degree-2 node 1 joining degree-2 node 0
  EXPECT_NEAR(move_gain(g, p, 1, p.cluster_of(0), 1.0), 2.0 / 14 - 2.0 * (2.0 / 14) * (2.0 / 14),
              1e-15);
  // bridge node 3 joining bridge node 2, both of degree 3
  EXPECT_NEAR(move_gain(g, p, 3, p.cluster_of(2), 1.0), 2.0 / 14 - 2.0 * (3.0 / 14) * (3.0 / 14),
              1e-15);
  EXPECT_NEAR(move_gain(g, p, 3, p.cluster_of(2), 1.0), 0.05102, 1e-5);
}

TEST(MoveGain, MatchesRecomputationProperty) {
  Rng rng(24);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = oracle::random_graph(rng, {.symmetric = trial % 2 == 0});
    const auto n = g.node_count();
    const auto assign = oracle::random_assignment(rng, n, 1 + uniform_index(rng, n));
    const auto p = Partition::from_assignment(g, assign);
    const auto u = static_cast<NodeId>(uniform_index(rng, n));
    const auto target = assign[uniform_index(rng, n)];
    const double rho = 0.05 + 2.0 * uniform01(rng);
    auto moved = assign;
    moved[u] = target;
    const double expected = oracle::modularity(g, moved, rho) - oracle::modularity(g, assign, rho);
    worst = std::max(worst, std::abs(move_gain(g, p, u, target, rho) - expected));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(MoveGain, SelfLoopsOnAggregates) {
  Rng rng(25);
  for (int trial = 0; trial < 200; ++trial) {
    const auto base = oracle::random_graph(rng, {.min_nodes = 4, .max_nodes = 20});
    const auto agg = aggregate_graph(
        base, Partition::from_assignment(base, oracle::random_assignment(rng, base.node_count(), 4)));
    const auto n = agg.node_count();
    if (n < 2 || agg.total_weight() <= 0.0) continue;
    const auto assign = oracle::random_assignment(rng, n, 2);
    const auto p = Partition::from_assignment(agg, assign);
    const auto u = static_cast<NodeId>(uniform_index(rng, n));
    const ClusterId target = 1 - assign[u];
    auto moved = assign;
    moved[u] = target;
    const double expected = oracle::modularity(agg, moved, 0.7) - oracle::modularity(agg, assign, 0.7);
    EXPECT_NEAR(move_gain(agg, p, u, target, 0.7), expected, 1e-10);
  }
}

TEST(Partition, CachedSumsStayConsistentUnderMoves) {
  Rng rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_graph(rng, {});
    auto p = Partition::from_assignment(g, oracle::random_assignment(rng, g.node_count(), 5));
    for (int k = 0; k < 30; ++k) {
      const auto u = static_cast<NodeId>(uniform_index(rng, g.node_count()));
      const auto target = p.cluster_of(static_cast<NodeId>(uniform_index(rng, g.node_count())));
      p.move(g, u, target);
      ASSERT_TRUE(p.sums_consistent(g));
    }
    std::size_t covered = 0;
    for (const auto& c : p.clusters()) covered += c.size();
    EXPECT_EQ(covered, g.node_count());
    const auto before = std::vector<ClusterId>(p.assignment().begin(), p.assignment().end());
    const auto k = p.compact();
    EXPECT_EQ(k, p.cluster_count());
    EXPECT_TRUE(oracle::same_partition(before, p.assignment()));
    EXPECT_TRUE(p.sums_consistent(g));
  }
}

TEST(Partition, RejectsMismatchedAssignment) {
  const auto g = oracle::barbell();
  EXPECT_THROW(Partition::from_assignment(g, {0, 1}), ConfigError);
  EXPECT_THROW(Partition::from_assignment(g, {0, 0, 0, 1, 1, kNoCluster}), ConfigError);
}
