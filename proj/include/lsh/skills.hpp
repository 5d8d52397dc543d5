#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsh/environment.hpp"
#include "lsh/graph.hpp"
#include "lsh/louvain.hpp"

namespace lsh {

/// Deterministic primitive dynamics over graph nodes: for every node, the
/// actions with a known outcome and the node each one leads to.
class PrimitiveModel {
 public:
  struct Move {
    ActionId action;
    NodeId next;
  };

  PrimitiveModel() = default;
  /// Outcomes of every admissible action in every indexed state.
  static PrimitiveModel from_env(const Env& env, const StateIndex& index);
  /// Outcomes observed so far; `terminal[u]` marks absorbing nodes.
  static PrimitiveModel from_transitions(std::size_t node_count, std::size_t action_count,
                                         std::span<const TransitionTriple> transitions,
                                         const StateIndex& index, std::vector<char> terminal);

  std::size_t node_count() const { return terminal_.size(); }
  std::size_t action_count() const { return action_count_; }
  std::span<const Move> moves(NodeId u) const {
    return {moves_.data() + offsets_[u], moves_.data() + offsets_[u + 1]};
  }
  /// Node reached by `a` from `u`, or kNoNode if the outcome is unknown.
  NodeId next(NodeId u, ActionId a) const;
  bool is_terminal(NodeId u) const { return terminal_[u] != 0; }

 private:
  std::size_t action_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Move> moves_;
  std::vector<char> terminal_;
};

/// Skill for moving from one cluster to a neighbouring cluster of the same
/// level. Initiation set = source cluster; terminates on entering the target.
struct Option {
  std::size_t level = 1;      // 1 = lowest retained level
  std::size_t raw_level = 0;  // index of the cluster level before pruning
  ClusterId source = kNoCluster;
  ClusterId target = kNoCluster;
  /// Lower-level option ids; empty when the policy calls primitives.
  std::vector<std::size_t> children;

  /// Nodes of source and target, ascending. Policy tables are indexed by
  /// position in this list.
  std::vector<NodeId> region;
  /// Admissible child slots per region node (primitive action ids, or
  /// positions in `children`).
  std::vector<std::vector<std::uint32_t>> admissible;
  /// Action values per region node, one entry per child slot.
  std::vector<std::vector<double>> q;
  /// Greedy rollouts succeeded from every non-terminal source node.
  bool converged = false;
  std::size_t episodes_trained = 0;

  bool calls_primitives() const { return children.empty(); }
  /// Position of u in `region`, or -1.
  std::ptrdiff_t local(NodeId u) const;
  /// Greedy child slot at region position i (lowest slot wins ties), or -1
  /// if nothing is admissible.
  std::int64_t greedy(std::size_t i) const;
};

/// Options for every retained level of a pruned cluster hierarchy.
class OptionHierarchy {
 public:
  OptionHierarchy() = default;

  /// One untrained option per directed aggregate edge between distinct
  /// clusters of each level. Level-L options call the level-(L-1) options
  /// whose source lies inside their source or target; level 1 calls primitives.
  static OptionHierarchy build(const ClusterHierarchy& h, const PrimitiveModel& model);

  std::size_t node_count() const { return membership_.empty() ? 0 : membership_[0].size(); }
  std::size_t action_count() const { return action_count_; }
  std::size_t level_count() const { return membership_.size(); }
  std::size_t size() const { return options_.size(); }
  bool empty() const { return options_.empty(); }

  const Option& option(std::size_t id) const { return options_[id]; }
  Option& option(std::size_t id) { return options_[id]; }
  const std::vector<Option>& options() const { return options_; }

  /// Cluster of node u at retained level `level` (1-based).
  ClusterId cluster_of(std::size_t level, NodeId u) const { return membership_[level - 1][u]; }
  const std::vector<ClusterId>& membership(std::size_t level) const {
    return membership_[level - 1];
  }
  std::size_t cluster_count(std::size_t level) const { return cluster_counts_[level - 1]; }
  std::size_t raw_level(std::size_t level) const { return raw_levels_[level - 1]; }
  /// Option ids at a level, ordered by (source, target).
  std::vector<std::size_t> options_at(std::size_t level) const;
  /// Option ids whose initiation set is `source` at `level`.
  std::span<const std::size_t> options_from(std::size_t level, ClusterId source) const;

  bool in_source(std::size_t id, NodeId u) const {
    const auto& o = options_[id];
    return membership_[o.level - 1][u] == o.source;
  }
  bool in_target(std::size_t id, NodeId u) const {
    const auto& o = options_[id];
    return membership_[o.level - 1][u] == o.target;
  }

  /// Same inventory, every policy calling primitives, policies untrained.
  OptionHierarchy flattened(const PrimitiveModel& model) const;
  /// Only the options of `level`, renumbered as level 1, calling primitives,
  /// untrained. Throws ConfigError if level is out of range.
  OptionHierarchy single_level(std::size_t level, const PrimitiveModel& model) const;

 private:
  void index_options();
  void wire_children();
  void init_region(Option& o, const PrimitiveModel& model) const;

  std::size_t action_count_ = 0;
  std::vector<std::vector<ClusterId>> membership_;
  std::vector<std::size_t> cluster_counts_;
  std::vector<std::size_t> raw_levels_;
  std::vector<Option> options_;
  // by_source_[level-1][cluster] = [begin, end) into source_order_
  std::vector<std::vector<std::size_t>> by_source_offsets_;
  std::vector<std::size_t> source_order_;
};

struct OptionTrainingParams {
  double alpha = 0.6;
  double gamma = 1.0;
  double q0 = 0.0;
  double epsilon = 0.2;
  double step_reward = -0.01;
  double target_reward = 1.0;
  std::size_t episodes = 500;
  /// Episode cap = cap_factor * |source u target| decisions.
  std::size_t cap_factor = 10;
  /// Greedy success is checked with cap rollout_factor * |source u target| primitive steps.
  std::size_t rollout_factor = 4;
  /// Episodes between greedy success checks.
  std::size_t check_every = 10;
  std::uint64_t seed = 0;
};

/// Outcome of running an option's greedy policy from one node.
struct Rollout {
  NodeId end = kNoNode;
  std::size_t steps = 0;
  bool reached_target = false;
};

/// Greedy execution of option `id` from u (all levels greedy), stopping on
/// entering the target, leaving source u target, a terminal node or after
/// `max_steps` primitive steps.
Rollout greedy_rollout(const OptionHierarchy& oh, const PrimitiveModel& model, std::size_t id,
                       NodeId u, std::size_t max_steps);

/// Fraction of non-terminal source nodes from which the greedy policy
/// reaches the target within rollout_factor * |source u target| steps.
double greedy_success_rate(const OptionHierarchy& oh, const PrimitiveModel& model, std::size_t id,
                           std::size_t rollout_factor = 4);

/// Offline macro-Q training of every option, bottom-up. Options of one level
/// train in parallel; each uses its own stream derived from the seed and
/// its (raw level, source, target), so results do not depend on scheduling.
/// Options that have not converged keep their partial policy; their count is returned.
std::size_t train_option_policies(OptionHierarchy& oh, const PrimitiveModel& model,
                                  const OptionTrainingParams& params = {});

namespace reference {
/// Serial equivalent of lsh::train_option_policies.
std::size_t train_option_policies(OptionHierarchy& oh, const PrimitiveModel& model,
                                  const OptionTrainingParams& params = {});
}  // namespace reference

/// Flattened copy of a hierarchy with retrained policies.
OptionHierarchy flatten_hierarchy(const OptionHierarchy& oh, const PrimitiveModel& model,
                                  const OptionTrainingParams& params = {});

/// One level of a hierarchy with retrained primitive-calling policies.
OptionHierarchy select_level(const OptionHierarchy& oh, std::size_t level,
                             const PrimitiveModel& model, const OptionTrainingParams& params = {});

/// Seed stream of an option, stable across flattening and hierarchy revisions.
std::uint64_t option_stream(const Option& o);

}  // namespace lsh
