#include "lsh/modularity.hpp"

#include <algorithm>
#include <cmath>

namespace lsh {

namespace {

NodeClusterLinks links_to(const WeightedDigraph& g, std::span<const ClusterId> assignment,
                          NodeId u, ClusterId c) {
  NodeClusterLinks l;
  for (const auto& a : g.out_arcs(u))
    if (a.node != u && assignment[a.node] == c) l.to += a.weight;
  for (const auto& a : g.in_arcs(u))
    if (a.node != u && assignment[a.node] == c) l.from += a.weight;
  return l;
}

bool close(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

Partition Partition::singletons(const WeightedDigraph& g) {
  std::vector<ClusterId> a(g.node_count());
  for (NodeId u = 0; u < a.size(); ++u) a[u] = u;
  return from_assignment(g, std::move(a));
}

Partition Partition::from_assignment(const WeightedDigraph& g, std::vector<ClusterId> assignment) {
  if (assignment.size() != g.node_count())
    throw ConfigError("partition covers " + std::to_string(assignment.size()) +
                      " nodes, graph has " + std::to_string(g.node_count()));
  Partition p;
  ClusterId max_id = 0;
  for (auto c : assignment) {
    if (c == kNoCluster) throw ConfigError("partition leaves a node unassigned");
    max_id = std::max(max_id, c);
  }
  p.assignment_ = std::move(assignment);
  p.ensure_capacity(p.assignment_.empty() ? 0 : std::size_t{max_id} + 1);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const ClusterId c = p.assignment_[u];
    if (p.size_[c]++ == 0) ++p.nonempty_;
    p.out_[c] += g.out_strength(u);
    p.in_[c] += g.in_strength(u);
    for (const auto& a : g.out_arcs(u))
      if (p.assignment_[a.node] == c) p.internal_[c] += a.weight;
  }
  return p;
}

void Partition::ensure_capacity(std::size_t n) {
  if (n <= size_.size()) return;
  internal_.resize(n, 0.0);
  out_.resize(n, 0.0);
  in_.resize(n, 0.0);
  size_.resize(n, 0);
}

std::vector<std::vector<NodeId>> Partition::clusters() const {
  std::vector<std::vector<NodeId>> by_id(size_.size());
  for (NodeId u = 0; u < assignment_.size(); ++u) by_id[assignment_[u]].push_back(u);
  std::vector<std::vector<NodeId>> out;
  out.reserve(nonempty_);
  for (auto& members : by_id)
    if (!members.empty()) out.push_back(std::move(members));
  return out;
}

void Partition::move(const WeightedDigraph& g, NodeId u, ClusterId target) {
  const ClusterId from = assignment_[u];
  if (from == target) return;
  ensure_capacity(std::size_t{target} + 1);
  const auto own = links_to(g, assignment_, u, from);
  const auto dst = links_to(g, assignment_, u, target);
  const double self = g.self_loop(u);

  internal_[from] -= own.to + own.from + self;
  out_[from] -= g.out_strength(u);
  in_[from] -= g.in_strength(u);
  if (--size_[from] == 0) {
    --nonempty_;
    internal_[from] = out_[from] = in_[from] = 0.0;
  }

  internal_[target] += dst.to + dst.from + self;
  out_[target] += g.out_strength(u);
  in_[target] += g.in_strength(u);
  if (size_[target]++ == 0) ++nonempty_;
  assignment_[u] = target;
}

std::size_t Partition::compact() {
  std::vector<ClusterId> relabel(size_.size(), kNoCluster);
  ClusterId next = 0;
  for (ClusterId c = 0; c < size_.size(); ++c)
    if (size_[c] > 0) relabel[c] = next++;
  std::vector<double> internal(next), out(next), in(next);
  std::vector<std::size_t> size(next);
  for (ClusterId c = 0; c < size_.size(); ++c) {
    if (relabel[c] == kNoCluster) continue;
    internal[relabel[c]] = internal_[c];
    out[relabel[c]] = out_[c];
    in[relabel[c]] = in_[c];
    size[relabel[c]] = size_[c];
  }
  for (auto& c : assignment_) c = relabel[c];
  internal_ = std::move(internal);
  out_ = std::move(out);
  in_ = std::move(in);
  size_ = std::move(size);
  return next;
}

bool Partition::sums_consistent(const WeightedDigraph& g, double rel_tol) const {
  auto fresh = from_assignment(g, assignment_);
  for (ClusterId c = 0; c < size_.size(); ++c) {
    const bool has = c < fresh.size_.size();
    if (size_[c] != (has ? fresh.size_[c] : 0)) return false;
    if (!close(internal_[c], has ? fresh.internal_[c] : 0.0, rel_tol)) return false;
    if (!close(out_[c], has ? fresh.out_[c] : 0.0, rel_tol)) return false;
    if (!close(in_[c], has ? fresh.in_[c] : 0.0, rel_tol)) return false;
  }
  return nonempty_ == fresh.nonempty_;
}

double modularity(const WeightedDigraph& g, const Partition& p, double rho) {
  if (!(rho > 0.0)) throw ConfigError("resolution must be positive");
  if (p.node_count() != g.node_count()) throw ConfigError("partition does not cover the graph");
  const double m = g.total_weight();
  if (!(m > 0.0)) throw ConfigError("modularity is undefined for a graph without edges");
  double q = 0.0;
  for (ClusterId c = 0; c < p.cluster_capacity(); ++c) {
    if (p.cluster_size(c) == 0) continue;
    q += p.internal_weight(c) / m - rho * (p.out_weight(c) / m) * (p.in_weight(c) / m);
  }
  return q;
}

double move_gain_from_links(const WeightedDigraph& g, const Partition& p, NodeId node,
                            ClusterId target, NodeClusterLinks to_own,
                            NodeClusterLinks to_target, double rho) {
  const ClusterId own = p.cluster_of(node);
  if (own == target) return 0.0;
  const double m = g.total_weight();
  const double m2 = m * m;
  const double k_out = g.out_strength(node);
  const double k_in = g.in_strength(node);
  const double self = g.self_loop(node);

  const double own_out = p.out_weight(own);
  const double own_in = p.in_weight(own);
  const double removed = -(to_own.to + to_own.from + self) / m -
                         rho * ((own_out - k_out) * (own_in - k_in) - own_out * own_in) / m2;

  double tgt_out = 0.0, tgt_in = 0.0;
  if (target < p.cluster_capacity() && p.cluster_size(target) > 0) {
    tgt_out = p.out_weight(target);
    tgt_in = p.in_weight(target);
  }
  const double added = (to_target.to + to_target.from + self) / m -
                       rho * ((tgt_out + k_out) * (tgt_in + k_in) - tgt_out * tgt_in) / m2;
  return removed + added;
}

double move_gain(const WeightedDigraph& g, const Partition& p, NodeId node, ClusterId target,
                 double rho) {
  if (node >= p.node_count()) throw ConfigError("node not covered by the partition");
  if (!(rho > 0.0)) throw ConfigError("resolution must be positive");
  if (!(g.total_weight() > 0.0)) throw ConfigError("move gain is undefined without edges");
  if (p.cluster_of(node) == target) return 0.0;
  const auto a = p.assignment();
  return move_gain_from_links(g, p, node, target, links_to(g, a, node, p.cluster_of(node)),
                              links_to(g, a, node, target), rho);
}

WeightedDigraph aggregate_graph(const WeightedDigraph& g, const Partition& p) {
  if (p.node_count() != g.node_count())
    throw ConfigError("partition does not cover every node of the graph");
  Partition compacted = p;
  const auto k = compacted.compact();
  return aggregate_graph(g, compacted.assignment(), k);
}

}  // namespace lsh
