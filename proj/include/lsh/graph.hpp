#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsh/types.hpp"

namespace lsh {

struct WeightedEdge {
  NodeId src;
  NodeId dst;
  double weight;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

struct Arc {
  NodeId node;
  double weight;
};

/// Immutable weighted directed graph stored as out- and in-adjacency CSR arrays.
/// Node ids are dense in [0, node_count). Parallel edges are merged on
/// construction; self-loops are kept.
class WeightedDigraph {
 public:
  WeightedDigraph() = default;

  /// Merges duplicate (src, dst) pairs by summing their weights.
  /// Throws ConfigError on an out-of-range id or a non-positive weight.
  static WeightedDigraph from_edges(std::size_t node_count, std::span<const WeightedEdge> edges);

  std::size_t node_count() const { return out_offsets_.empty() ? 0 : out_offsets_.size() - 1; }
  std::size_t edge_count() const { return out_arcs_.size(); }
  double total_weight() const { return total_weight_; }

  std::span<const Arc> out_arcs(NodeId u) const {
    return {out_arcs_.data() + out_offsets_[u], out_arcs_.data() + out_offsets_[u + 1]};
  }
  std::span<const Arc> in_arcs(NodeId v) const {
    return {in_arcs_.data() + in_offsets_[v], in_arcs_.data() + in_offsets_[v + 1]};
  }

  /// Sum of outgoing weights, self-loop included.
  double out_strength(NodeId u) const { return out_strength_[u]; }
  double in_strength(NodeId u) const { return in_strength_[u]; }
  double self_loop(NodeId u) const { return self_loop_[u]; }

  /// Weight of (u, v), 0 if absent.
  double weight(NodeId u, NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const { return weight(u, v) > 0.0; }

  /// All edges ordered by (src, dst).
  std::vector<WeightedEdge> edges() const;

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels);

  /// Recomputes the total from the stored arcs.
  double recompute_total_weight() const;

  friend bool operator==(const WeightedDigraph& a, const WeightedDigraph& b) {
    return a.node_count() == b.node_count() && a.edges() == b.edges();
  }

 private:
  std::vector<std::size_t> out_offsets_;
  std::vector<Arc> out_arcs_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Arc> in_arcs_;
  std::vector<double> out_strength_;
  std::vector<double> in_strength_;
  std::vector<double> self_loop_;
  std::vector<std::string> labels_;
  double total_weight_ = 0.0;
};

inline WeightedDigraph build_graph(std::size_t node_count, std::span<const WeightedEdge> edges) {
  return WeightedDigraph::from_edges(node_count, edges);
}

/// Collapses each cluster into a node. `assignment[u]` must be a dense id in
/// [0, cluster_count). Intra-cluster edges become self-loops; total weight is preserved.
WeightedDigraph aggregate_graph(const WeightedDigraph& g, std::span<const ClusterId> assignment,
                                std::size_t cluster_count);

/// Components under undirected reachability, each sorted, ordered by smallest member.
std::vector<std::vector<NodeId>> weakly_connected_components(const WeightedDigraph& g);

/// Bidirectional map between environment states and dense node ids.
class StateIndex {
 public:
  /// Returns the existing id or assigns the next one.
  NodeId insert(State s);
  std::optional<NodeId> find(State s) const;
  State state(NodeId id) const { return states_.at(id); }
  std::size_t size() const { return states_.size(); }
  const std::vector<State>& states() const { return states_; }

  friend bool operator==(const StateIndex& a, const StateIndex& b) { return a.states_ == b.states_; }

 private:
  std::unordered_map<State, NodeId> ids_;
  std::vector<State> states_;
};

/// Row-major point set with a fixed dimension.
struct PointCloud {
  std::size_t dim = 2;
  std::vector<double> coords;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  void push_back(std::span<const double> p);
};

/// k-nearest-neighbour graph: for every point u and each of its k Euclidean
/// nearest neighbours v, edges u->v and v->u with weight exp(-scale * d^2).
/// A pair that is mutually nearest is stored once per direction.
/// Neighbour search runs in parallel (OpenMP) when available.
WeightedDigraph knn_graph(const PointCloud& points, std::size_t k, double scale);

namespace reference {
/// Single-threaded neighbour search; kept as the oracle for knn_graph.
WeightedDigraph knn_graph(const PointCloud& points, std::size_t k, double scale);
}  // namespace reference

}  // namespace lsh
