#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <tuple>
#include <vector>

#include "lsh/environment.hpp"
#include "lsh/learning.hpp"
#include "lsh/louvain.hpp"
#include "lsh/skills.hpp"

namespace lsh {

enum class Revision { replace, update };

Revision parse_revision(const std::string& text);
std::string to_string(Revision r);

/// Transition graph assembled from experience. Node ids follow first
/// observation and never change.
class KnownGraph {
 public:
  /// Records a state; returns true if it is new.
  bool add_state(State s);
  /// Records an observed transition (and both states); returns true if new.
  bool add_transition(State from, ActionId a, State to);

  std::size_t node_count() const { return index_->size(); }
  std::size_t transition_count() const { return transitions_.size(); }
  std::shared_ptr<const StateIndex> index() const { return index_; }
  /// Unit-weight graph over the known states, self-transitions omitted.
  WeightedDigraph graph() const;
  std::vector<TransitionTriple> transitions() const;
  PrimitiveModel model(const Env& env) const;

 private:
  std::shared_ptr<StateIndex> index_ = std::make_shared<StateIndex>();
  std::set<std::tuple<State, ActionId, State>> transitions_;
};

/// Copies the policy tables of options that persist between two hierarchies
/// (same raw level, source and target) into `fresh`. Returns, for every
/// option of `fresh`, the id of its predecessor or QTable::npos.
std::vector<std::size_t> carry_policies(const OptionHierarchy& old, OptionHierarchy& fresh);

struct IncrementalConfig {
  Revision variant = Revision::update;
  std::vector<std::size_t> schedule{100, 500, 1000, 3000, 5000};
  double rho = 0.05;
  double min_mean_cluster_size = 4.0;
  LearningParams learning{};
  OptionTrainingParams option_training{};
  std::size_t epochs = 60;
  std::size_t epoch_length = 100;
  std::uint64_t seed = 0;
};

struct RevisionRecord {
  std::size_t stage = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t raw_levels = 0;
  std::size_t retained_levels = 0;
  std::size_t option_count = 0;
  ClusterHierarchy hierarchy;  // unpruned
};

struct IncrementalResult {
  std::vector<double> returns;
  std::vector<RevisionRecord> revisions;
  ClusterHierarchy final_hierarchy;  // unpruned
};

/// Learns with primitives only at first, growing the known transition graph
/// from experience and revising the skill hierarchy after each scheduled
/// decision stage. Throws ConfigError on an empty or non-increasing schedule.
IncrementalResult incremental_run(const Env& env, const IncrementalConfig& cfg);

/// Hierarchy revision on a known graph: Replace re-clusters from scratch,
/// Update integrates new nodes into `previous`.
ClusterHierarchy revise_partitions(const WeightedDigraph& g, const ClusterHierarchy& previous,
                                   Revision variant, double rho, std::uint64_t seed);

/// Uniform random walk from the start state, revising with Update each time
/// the number of visited states reaches a checkpoint, and once more when every
/// reachable transition has been observed. Returns the raw level count after
/// each revision.
std::vector<std::size_t> random_walk_levels(const Env& env, std::span<const std::size_t> checkpoints,
                                            double rho, std::uint64_t seed,
                                            std::size_t max_steps = 1'000'000);

}  // namespace lsh
