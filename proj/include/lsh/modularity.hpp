#pragma once

#include <span>
#include <vector>

#include "lsh/graph.hpp"

namespace lsh {

/// Node-to-cluster assignment with cached per-cluster weight sums.
///
/// Cluster ids are arbitrary integers below `cluster_capacity()`. Ids of
/// clusters emptied by a move are not reused until the partition is compacted.
class Partition {
 public:
  Partition() = default;

  static Partition singletons(const WeightedDigraph& g);
  /// Throws ConfigError if the assignment does not cover every node.
  static Partition from_assignment(const WeightedDigraph& g, std::vector<ClusterId> assignment);

  std::size_t node_count() const { return assignment_.size(); }
  ClusterId cluster_of(NodeId u) const { return assignment_[u]; }
  std::span<const ClusterId> assignment() const { return assignment_; }

  std::size_t cluster_count() const { return nonempty_; }
  std::size_t cluster_capacity() const { return size_.size(); }
  std::size_t cluster_size(ClusterId c) const { return c < size_.size() ? size_[c] : 0; }

  /// Sum of weights of edges with both endpoints in c.
  double internal_weight(ClusterId c) const { return internal_[c]; }
  /// Sum of weights of edges whose source is in c.
  double out_weight(ClusterId c) const { return out_[c]; }
  /// Sum of weights of edges whose destination is in c.
  double in_weight(ClusterId c) const { return in_[c]; }

  /// Non-empty clusters ordered by id, members ascending.
  std::vector<std::vector<NodeId>> clusters() const;

  /// Moves u into `target`, which may be a fresh id (grows capacity).
  void move(const WeightedDigraph& g, NodeId u, ClusterId target);

  /// Relabels non-empty clusters to 0..k-1 in increasing order of their
  /// current id. Returns the number of clusters.
  std::size_t compact();

  /// Cached sums match a from-scratch recomputation to `rel_tol`.
  bool sums_consistent(const WeightedDigraph& g, double rel_tol = 1e-12) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.assignment_ == b.assignment_;
  }

 private:
  void ensure_capacity(std::size_t n);

  std::vector<ClusterId> assignment_;
  std::vector<double> internal_;
  std::vector<double> out_;
  std::vector<double> in_;
  std::vector<std::size_t> size_;
  std::size_t nonempty_ = 0;
};

/// Directed modularity with resolution rho:
///   Q = sum_c [ w_in(c)/m - rho * (out(c)/m) * (in(c)/m) ].
/// On symmetric graphs this is the Newman form sum_c e_cc - rho * a_c^2.
/// Throws ConfigError if m == 0 or rho <= 0.
double modularity(const WeightedDigraph& g, const Partition& p, double rho);

/// Weight of edges between a node and one cluster, excluding the node's self-loop.
struct NodeClusterLinks {
  double to = 0.0;    // u -> cluster
  double from = 0.0;  // cluster -> u
};

/// Gain in modularity from moving `node` out of its cluster and into `target`,
/// given its links to both clusters. Shared by move_gain and the Louvain sweep.
double move_gain_from_links(const WeightedDigraph& g, const Partition& p, NodeId node,
                            ClusterId target, NodeClusterLinks to_own, NodeClusterLinks to_target,
                            double rho);

/// modularity(after move) - modularity(before move), from cached sums.
/// Returns exactly 0 when target is the node's own cluster.
double move_gain(const WeightedDigraph& g, const Partition& p, NodeId node, ClusterId target,
                 double rho);

/// Aggregate graph of a (possibly non-compact) partition; cluster k of the
/// result is the k-th non-empty cluster in id order.
WeightedDigraph aggregate_graph(const WeightedDigraph& g, const Partition& p);

}  // namespace lsh
