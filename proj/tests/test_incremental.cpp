#include <gtest/gtest.h>

#include <set>

#include "lsh/environment.hpp"
#include "lsh/incremental.hpp"
#include "oracles.hpp"

using namespace lsh;

namespace {

GridWorld rooms() {
  const auto layout = GridLayout::load(std::string(LSH_DATA_DIR) + "/layouts/rooms.txt");
  return GridWorld(layout, layout.start_cells()[0], layout.goal_cells()[0], "rooms");
}

IncrementalConfig small_config(Revision variant) {
  IncrementalConfig cfg;
  cfg.variant = variant;
  cfg.schedule = {100, 500, 1000, 3000};
  cfg.epochs = 40;
  cfg.epoch_length = 100;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(KnownGraph, IdsFollowFirstObservation) {
  KnownGraph known;
  EXPECT_TRUE(known.add_state(10));
  EXPECT_TRUE(known.add_transition(10, 0, 11));
  EXPECT_FALSE(known.add_transition(10, 0, 11));
  EXPECT_TRUE(known.add_transition(11, 1, 11));
  EXPECT_FALSE(known.add_state(11));
  EXPECT_EQ(known.node_count(), 2u);
  EXPECT_EQ(known.transition_count(), 2u);
  EXPECT_EQ(*known.index()->find(10), 0u);
  EXPECT_EQ(*known.index()->find(11), 1u);
  const auto g = known.graph();
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.weight(0, 1), 1.0);
}

TEST(KnownGraph, RandomWalkGivesSubgraphProperty) {
  const Taxi taxi;
  const auto full = extract_transition_graph(taxi);
  Rng rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    KnownGraph known;
    State s = taxi.reset(rng);
    for (int t = 0; t < 2000; ++t) {
      const auto acts = taxi.actions(s);
      const auto a = acts[uniform_index(rng, acts.size())];
      const auto res = taxi.step(s, a);
      known.add_transition(s, a, res.next);
      s = res.terminal ? taxi.reset(rng) : res.next;
    }
    const auto g = known.graph();
    const auto& index = *known.index();
    for (const auto& e : g.edges()) {
      const auto u = *full.index.find(index.state(e.src));
      const auto v = *full.index.find(index.state(e.dst));
      EXPECT_EQ(full.graph.weight(u, v), 1.0);
    }
    const auto model = known.model(taxi);
    for (NodeId u = 0; u < model.node_count(); ++u)
      for (const auto& m : model.moves(u))
        EXPECT_EQ(index.state(m.next), taxi.step(index.state(u), m.action).next);
  }
}

TEST(Revision, ParseAndPrint) {
  EXPECT_EQ(parse_revision("replace"), Revision::replace);
  EXPECT_EQ(parse_revision("update"), Revision::update);
  EXPECT_EQ(to_string(Revision::update), "update");
  EXPECT_THROW(parse_revision("merge"), ConfigError);
}

TEST(CarryPolicies, IdenticalHierarchiesMapOneToOne) {
  const Hanoi hanoi(4);
  const auto tg = extract_transition_graph(hanoi);
  const auto model = PrimitiveModel::from_env(hanoi, tg.index);
  const auto pruned = prune(run_louvain(tg.graph, 0.05, 0));
  auto old = OptionHierarchy::build(pruned, model);
  train_option_policies(old, model);
  auto fresh = OptionHierarchy::build(pruned, model);
  const auto pred = carry_policies(old, fresh);
  ASSERT_EQ(pred.size(), fresh.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    EXPECT_EQ(pred[i], i);
    EXPECT_EQ(fresh.option(i).q, old.option(i).q);
  }
}

TEST(CarryPolicies, NewOptionsHaveNoPredecessor) {
  const Hanoi hanoi(4);
  const auto tg = extract_transition_graph(hanoi);
  const auto model = PrimitiveModel::from_env(hanoi, tg.index);
  auto fresh = OptionHierarchy::build(prune(run_louvain(tg.graph, 0.05, 0)), model);
  const auto pred = carry_policies(OptionHierarchy{}, fresh);
  for (const auto p : pred) EXPECT_EQ(p, QTable::npos);
}

TEST(IncrementalRun, RejectsBadSchedule) {
  const auto env = rooms();
  auto cfg = small_config(Revision::update);
  cfg.schedule = {};
  EXPECT_THROW(incremental_run(env, cfg), ConfigError);
  cfg.schedule = {500, 100};
  EXPECT_THROW(incremental_run(env, cfg), ConfigError);
  cfg.schedule = {100, 100};
  EXPECT_THROW(incremental_run(env, cfg), ConfigError);
}

TEST(IncrementalRun, UpdateFreezesEarlierMemberships) {
  const auto env = rooms();
  const auto result = incremental_run(env, small_config(Revision::update));
  ASSERT_EQ(result.revisions.size(), 4u);
  EXPECT_EQ(result.returns.size(), 40u);
  for (std::size_t r = 1; r < result.revisions.size(); ++r) {
    const auto& prev = result.revisions[r - 1];
    const auto& next = result.revisions[r];
    EXPECT_GE(next.node_count, prev.node_count);
    EXPECT_GE(next.edge_count, prev.edge_count);
    ASSERT_GE(next.hierarchy.level_count(), prev.hierarchy.level_count());
    for (std::size_t i = 0; i < prev.hierarchy.level_count(); ++i)
      for (NodeId u = 0; u < prev.node_count; ++u)
        EXPECT_EQ(next.hierarchy.levels[i].base[u], prev.hierarchy.levels[i].base[u]);
  }
  EXPECT_EQ(result.final_hierarchy.level_count(), result.revisions.back().raw_levels);
}

TEST(IncrementalRun, ReplaceReclustersFromScratch) {
  const auto env = rooms();
  const auto cfg = small_config(Revision::replace);
  const auto result = incremental_run(env, cfg);
  ASSERT_EQ(result.revisions.size(), 4u);
  for (std::size_t r = 0; r < result.revisions.size(); ++r) {
    const auto& rec = result.revisions[r];
    EXPECT_EQ(rec.stage, cfg.schedule[r]);
    EXPECT_TRUE(rec.hierarchy.is_nested());
    EXPECT_EQ(rec.raw_levels, rec.hierarchy.level_count());
    EXPECT_LE(rec.retained_levels, rec.raw_levels);
    EXPECT_LE(rec.node_count, rec.stage + 1);
  }
}

TEST(IncrementalRun, Deterministic) {
  const auto env = rooms();
  const auto a = incremental_run(env, small_config(Revision::update));
  const auto b = incremental_run(env, small_config(Revision::update));
  EXPECT_EQ(a.returns, b.returns);
  ASSERT_EQ(a.revisions.size(), b.revisions.size());
  for (std::size_t r = 0; r < a.revisions.size(); ++r)
    EXPECT_EQ(a.revisions[r].option_count, b.revisions[r].option_count);
}

TEST(RandomWalk, LevelsPerCheckpoint) {
  const Hanoi hanoi(4);
  const std::size_t checkpoints[] = {10, 40, 81};
  const auto levels = random_walk_levels(hanoi, checkpoints, 0.05, 7);
  ASSERT_EQ(levels.size(), 4u);
  EXPECT_GE(levels.back(), 2u);
  for (std::size_t i = 1; i < levels.size(); ++i) EXPECT_GE(levels[i], levels[i - 1]);
}
