#include "lsh/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>

#ifdef LSH_HAVE_OPENMP
#include <omp.h>
#endif

namespace lsh {

namespace {

void build_csr(std::size_t n, const std::vector<WeightedEdge>& edges, bool by_source,
               std::vector<std::size_t>& offsets, std::vector<Arc>& arcs) {
  offsets.assign(n + 1, 0);
  for (const auto& e : edges) ++offsets[(by_source ? e.src : e.dst) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  arcs.resize(edges.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  // edges are sorted by (src, dst), so in-arcs end up sorted by src as well
  for (const auto& e : edges) {
    if (by_source)
      arcs[cursor[e.src]++] = {e.dst, e.weight};
    else
      arcs[cursor[e.dst]++] = {e.src, e.weight};
  }
}

}  // namespace

WeightedDigraph WeightedDigraph::from_edges(std::size_t node_count,
                                            std::span<const WeightedEdge> edges) {
  std::vector<WeightedEdge> sorted(edges.begin(), edges.end());
  for (const auto& e : sorted) {
    if (e.src >= node_count || e.dst >= node_count)
      throw ConfigError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                        ") references a node outside [0," + std::to_string(node_count) + ")");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw ConfigError("edge weights must be positive and finite");
  }
  std::sort(sorted.begin(), sorted.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  std::vector<WeightedEdge> merged;
  merged.reserve(sorted.size());
  for (const auto& e : sorted) {
    if (!merged.empty() && merged.back().src == e.src && merged.back().dst == e.dst)
      merged.back().weight += e.weight;
    else
      merged.push_back(e);
  }

  WeightedDigraph g;
  build_csr(node_count, merged, true, g.out_offsets_, g.out_arcs_);
  build_csr(node_count, merged, false, g.in_offsets_, g.in_arcs_);
  g.out_strength_.assign(node_count, 0.0);
  g.in_strength_.assign(node_count, 0.0);
  g.self_loop_.assign(node_count, 0.0);
  for (const auto& e : merged) {
    g.out_strength_[e.src] += e.weight;
    g.in_strength_[e.dst] += e.weight;
    if (e.src == e.dst) g.self_loop_[e.src] += e.weight;
    g.total_weight_ += e.weight;
  }
  return g;
}

double WeightedDigraph::weight(NodeId u, NodeId v) const {
  auto arcs = out_arcs(u);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), v,
                             [](const Arc& a, NodeId x) { return a.node < x; });
  return (it != arcs.end() && it->node == v) ? it->weight : 0.0;
}

std::vector<WeightedEdge> WeightedDigraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u)
    for (const auto& a : out_arcs(u)) out.push_back({u, a.node, a.weight});
  return out;
}

void WeightedDigraph::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != node_count())
    throw ConfigError("label count does not match node count");
  labels_ = std::move(labels);
}

double WeightedDigraph::recompute_total_weight() const {
  double total = 0.0;
  for (const auto& a : out_arcs_) total += a.weight;
  return total;
}

WeightedDigraph aggregate_graph(const WeightedDigraph& g, std::span<const ClusterId> assignment,
                                std::size_t cluster_count) {
  if (assignment.size() != g.node_count())
    throw ConfigError("partition does not cover every node of the graph");
  std::vector<WeightedEdge> edges;
  edges.reserve(g.edge_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (assignment[u] >= cluster_count) throw ConfigError("cluster id out of range");
    for (const auto& a : g.out_arcs(u))
      edges.push_back({assignment[u], assignment[a.node], a.weight});
  }
  return WeightedDigraph::from_edges(cluster_count, edges);
}

std::vector<std::vector<NodeId>> weakly_connected_components(const WeightedDigraph& g) {
  const std::size_t n = g.node_count();
  std::vector<NodeId> comp(n, kNoNode);
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> stack;
  for (NodeId root = 0; root < n; ++root) {
    if (comp[root] != kNoNode) continue;
    const auto id = static_cast<NodeId>(out.size());
    out.emplace_back();
    comp[root] = id;
    stack.push_back(root);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      out.back().push_back(u);
      auto visit = [&](NodeId v) {
        if (comp[v] == kNoNode) {
          comp[v] = id;
          stack.push_back(v);
        }
      };
      for (const auto& a : g.out_arcs(u)) visit(a.node);
      for (const auto& a : g.in_arcs(u)) visit(a.node);
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

NodeId StateIndex::insert(State s) {
  auto [it, inserted] = ids_.try_emplace(s, static_cast<NodeId>(states_.size()));
  if (inserted) states_.push_back(s);
  return it->second;
}

std::optional<NodeId> StateIndex::find(State s) const {
  auto it = ids_.find(s);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void PointCloud::push_back(std::span<const double> p) {
  if (p.size() != dim) throw ConfigError("point dimension mismatch");
  coords.insert(coords.end(), p.begin(), p.end());
}

namespace {

using Candidate = std::pair<double, NodeId>;  // (squared distance, index)

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return d2;
}

void check_knn_args(const PointCloud& points, std::size_t k, double scale) {
  if (points.size() < k + 1)
    throw ConfigError("knn_graph needs at least k+1 points (have " +
                      std::to_string(points.size()) + ", k=" + std::to_string(k) + ")");
  if (!(scale > 0.0)) throw ConfigError("knn_graph scale must be positive");
}

double knn_weight(double d2, double scale) {
  return std::max(std::exp(-scale * d2), std::numeric_limits<double>::min());
}

WeightedDigraph knn_from_neighbours(const PointCloud& points,
                                    const std::vector<std::vector<Candidate>>& nbrs, double scale) {
  std::vector<WeightedEdge> edges;
  edges.reserve(2 * nbrs.size() * (nbrs.empty() ? 0 : nbrs[0].size()));
  for (NodeId u = 0; u < nbrs.size(); ++u) {
    for (const auto& [d2, v] : nbrs[u]) {
      const double w = knn_weight(d2, scale);
      edges.push_back({u, v, w});
      edges.push_back({v, u, w});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const WeightedEdge& a, const WeightedEdge& b) {
                            return a.src == b.src && a.dst == b.dst;
                          }),
              edges.end());
  return WeightedDigraph::from_edges(points.size(), edges);
}

// Bounded max-heap over (d2, index); keeps the k lexicographically smallest.
std::vector<Candidate> nearest(const PointCloud& points, NodeId u, std::size_t k) {
  std::priority_queue<Candidate> heap;
  const auto pu = points.point(u);
  for (NodeId v = 0; v < points.size(); ++v) {
    if (v == u) continue;
    Candidate c{squared_distance(pu, points.point(v)), v};
    if (heap.size() < k) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
  }
  std::vector<Candidate> out(heap.size());
  for (auto i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

}  // namespace

WeightedDigraph knn_graph(const PointCloud& points, std::size_t k, double scale) {
  check_knn_args(points, k, scale);
  const auto n = static_cast<std::int64_t>(points.size());
  std::vector<std::vector<Candidate>> nbrs(points.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t u = 0; u < n; ++u) nbrs[u] = nearest(points, static_cast<NodeId>(u), k);
  return knn_from_neighbours(points, nbrs, scale);
}

namespace reference {

WeightedDigraph knn_graph(const PointCloud& points, std::size_t k, double scale) {
  check_knn_args(points, k, scale);
  std::vector<std::vector<Candidate>> nbrs(points.size());
  for (NodeId u = 0; u < points.size(); ++u) {
    std::vector<Candidate> all;
    for (NodeId v = 0; v < points.size(); ++v)
      if (v != u) all.emplace_back(squared_distance(points.point(u), points.point(v)), v);
    std::sort(all.begin(), all.end());
    all.resize(k);
    nbrs[u] = std::move(all);
  }
  return knn_from_neighbours(points, nbrs, scale);
}

}  // namespace reference

}  // namespace lsh
