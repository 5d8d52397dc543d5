#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lsh/graph.hpp"
#include "lsh/modularity.hpp"

namespace lsh {

/// One accepted level of a Louvain run.
struct ClusterLevel {
  /// Dense cluster id for every node of the previous level's graph (the
  /// original graph for level 0). After pruning this still refers to the
  /// previous *raw* level.
  std::vector<ClusterId> assignment;
  /// Graph whose nodes are this level's clusters.
  WeightedDigraph aggregate;
  /// Cluster of every node of the original graph.
  std::vector<ClusterId> base;
  /// Position of this level in the unpruned hierarchy (0 = finest).
  std::size_t raw_index = 0;

  std::size_t cluster_count() const { return aggregate.node_count(); }
  double mean_cluster_size() const {
    return cluster_count() == 0 ? 0.0 : double(base.size()) / double(cluster_count());
  }
};

/// Nested partitions of a graph, finest first.
struct ClusterHierarchy {
  double rho = 0.05;
  std::size_t node_count = 0;
  std::vector<ClusterLevel> levels;

  std::size_t level_count() const { return levels.size(); }
  bool empty() const { return levels.empty(); }
  /// Every cluster of level i is a union of clusters of level i-1.
  bool is_nested() const;
};

/// Reported after every accepted single-node move.
struct MoveEvent {
  const WeightedDigraph& graph;  // graph of the level being optimised
  const Partition& partition;    // state after the move
  NodeId node;
  ClusterId from;
  ClusterId to;
  double gain;
};
using MoveObserver = std::function<void(const MoveEvent&)>;

/// Moves with a gain at or below this are rejected.
inline constexpr double kMinMoveGain = 1e-12;

/// Sweeps `order` repeatedly, moving each node into the neighbouring cluster
/// (out- or in-neighbour) with the largest positive gain. Ties go to the
/// lowest cluster id. Stops after a sweep with no moves. Returns the number of
/// moves made.
std::size_t local_moves(const WeightedDigraph& g, Partition& p, double rho,
                        std::span<const NodeId> order, const MoveObserver& observer = {});

/// Multi-level Louvain: singleton start, local moves, keep the level iff the
/// modularity rose, aggregate, repeat. The sweep order of each phase is a
/// seeded random permutation.
ClusterHierarchy run_louvain(const WeightedDigraph& g, double rho, std::uint64_t seed,
                             const MoveObserver& observer = {});

/// Integrates the nodes of `g` that `existing` does not cover into its
/// clusters. Covered nodes keep their clusters at every level; only new nodes
/// are swept. Existing levels are always retained; further levels are added
/// while modularity improves. Throws ConfigError if `existing` covers more
/// nodes than `g` has.
ClusterHierarchy update_partitions(const WeightedDigraph& g, const ClusterHierarchy& existing,
                                   double rho, std::uint64_t seed = 0,
                                   const MoveObserver& observer = {});

/// Drops levels whose mean cluster size (original nodes per cluster) is below
/// the threshold.
ClusterHierarchy prune(const ClusterHierarchy& h, double min_mean_cluster_size = 4.0);

}  // namespace lsh
