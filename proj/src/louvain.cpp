#include "lsh/louvain.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lsh {

bool ClusterHierarchy::is_nested() const {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const auto& fine = levels[i - 1].base;
    const auto& coarse = levels[i].base;
    if (fine.size() != coarse.size()) return false;
    std::vector<ClusterId> parent(levels[i - 1].cluster_count(), kNoCluster);
    for (std::size_t u = 0; u < fine.size(); ++u) {
      auto& slot = parent[fine[u]];
      if (slot == kNoCluster)
        slot = coarse[u];
      else if (slot != coarse[u])
        return false;
    }
  }
  return true;
}

std::size_t local_moves(const WeightedDigraph& g, Partition& p, double rho,
                        std::span<const NodeId> order, const MoveObserver& observer) {
  if (g.total_weight() <= 0.0 || order.empty()) return 0;
  const std::size_t cap = p.cluster_capacity();
  std::vector<NodeClusterLinks> links(cap);
  std::vector<char> seen(cap, 0);
  std::vector<ClusterId> touched;

  std::size_t total = 0;
  for (;;) {
    std::size_t moved = 0;
    for (const NodeId u : order) {
      const ClusterId own = p.cluster_of(u);
      auto touch = [&](ClusterId c) {
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
      };
      for (const auto& a : g.out_arcs(u)) {
        if (a.node == u) continue;
        const ClusterId c = p.cluster_of(a.node);
        touch(c);
        links[c].to += a.weight;
      }
      for (const auto& a : g.in_arcs(u)) {
        if (a.node == u) continue;
        const ClusterId c = p.cluster_of(a.node);
        touch(c);
        links[c].from += a.weight;
      }

      const NodeClusterLinks own_links = seen[own] ? links[own] : NodeClusterLinks{};
      ClusterId best = kNoCluster;
      double best_gain = -std::numeric_limits<double>::infinity();
      for (const ClusterId c : touched) {
        if (c == own) continue;
        const double gain = move_gain_from_links(g, p, u, c, own_links, links[c], rho);
        if (gain > best_gain || (gain == best_gain && c < best)) {
          best_gain = gain;
          best = c;
        }
      }
      for (const ClusterId c : touched) {
        seen[c] = 0;
        links[c] = {};
      }
      touched.clear();

      if (best != kNoCluster && best_gain > kMinMoveGain) {
        p.move(g, u, best);
        ++moved;
        if (observer) observer(MoveEvent{g, p, u, own, best, best_gain});
      }
    }
    total += moved;
    if (moved == 0) break;
  }
  return total;
}

namespace {

std::vector<NodeId> shuffled_nodes(std::size_t n, Rng& rng) {
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void push_level(ClusterHierarchy& h, const WeightedDigraph& level_graph, Partition& p,
                std::vector<ClusterId>& base) {
  const auto k = p.compact();
  ClusterLevel level;
  level.assignment.assign(p.assignment().begin(), p.assignment().end());
  level.aggregate = aggregate_graph(level_graph, level.assignment, k);
  for (auto& c : base) c = level.assignment[c];
  level.base = base;
  level.raw_index = h.levels.size();
  h.levels.push_back(std::move(level));
}

}  // namespace

ClusterHierarchy run_louvain(const WeightedDigraph& g, double rho, std::uint64_t seed,
                             const MoveObserver& observer) {
  if (!(rho > 0.0)) throw ConfigError("resolution must be positive");
  if (g.node_count() == 0) throw ConfigError("cannot cluster an empty graph");
  ClusterHierarchy h;
  h.rho = rho;
  h.node_count = g.node_count();
  if (g.total_weight() <= 0.0) return h;

  Rng rng(seed);
  std::vector<ClusterId> base(g.node_count());
  std::iota(base.begin(), base.end(), ClusterId{0});
  WeightedDigraph work;
  const WeightedDigraph* current = &g;
  for (;;) {
    Partition p = Partition::singletons(*current);
    const double q_old = modularity(*current, p, rho);
    const auto order = shuffled_nodes(current->node_count(), rng);
    const auto moved = local_moves(*current, p, rho, order, observer);
    if (moved == 0) break;
    const double q_new = modularity(*current, p, rho);
    if (!(q_new > q_old)) break;
    push_level(h, *current, p, base);
    work = h.levels.back().aggregate;
    current = &work;
  }
  return h;
}

ClusterHierarchy update_partitions(const WeightedDigraph& g, const ClusterHierarchy& existing,
                                   double rho, std::uint64_t seed, const MoveObserver& observer) {
  if (!(rho > 0.0)) throw ConfigError("resolution must be positive");
  if (existing.node_count > g.node_count())
    throw ConfigError("existing hierarchy covers nodes missing from the graph");
  ClusterHierarchy h;
  h.rho = rho;
  h.node_count = g.node_count();
  if (g.node_count() == 0 || g.total_weight() <= 0.0) return h;

  Rng rng(seed);
  std::vector<ClusterId> base(g.node_count());
  std::iota(base.begin(), base.end(), ClusterId{0});
  WeightedDigraph work;
  const WeightedDigraph* current = &g;
  for (std::size_t i = 0;; ++i) {
    const std::size_t n = current->node_count();
    std::vector<ClusterId> assignment(n);
    std::vector<NodeId> fresh;
    const bool has_existing = i < existing.levels.size();
    std::size_t covered = 0;
    ClusterId next_id = 0;
    if (has_existing) {
      const auto& old = existing.levels[i].assignment;
      covered = old.size();
      if (covered > n) throw ConfigError("existing level covers nodes missing from the graph");
      std::copy(old.begin(), old.end(), assignment.begin());
      next_id = static_cast<ClusterId>(existing.levels[i].cluster_count());
    }
    for (std::size_t u = covered; u < n; ++u) {
      assignment[u] = next_id++;
      fresh.push_back(static_cast<NodeId>(u));
    }
    Partition p = Partition::from_assignment(*current, std::move(assignment));
    std::shuffle(fresh.begin(), fresh.end(), rng);

    bool improved = false;
    if (current->total_weight() > 0.0) {
      const double q_old = modularity(*current, p, rho);
      const auto moved = local_moves(*current, p, rho, fresh, observer);
      improved = moved > 0 && modularity(*current, p, rho) > q_old;
    }
    if (!(improved || has_existing)) break;
    // Compaction keeps the ids of the (never emptied) existing clusters, so the
    // next level's existing assignment still lines up with the aggregate nodes.
    push_level(h, *current, p, base);
    work = h.levels.back().aggregate;
    current = &work;
  }
  return h;
}

ClusterHierarchy prune(const ClusterHierarchy& h, double min_mean_cluster_size) {
  if (!(min_mean_cluster_size >= 1.0)) throw ConfigError("pruning threshold must be at least 1");
  ClusterHierarchy out;
  out.rho = h.rho;
  out.node_count = h.node_count;
  bool keeping = false;
  for (const auto& level : h.levels) {
    const bool keep = level.mean_cluster_size() >= min_mean_cluster_size;
    // mean size never shrinks with depth, so only a prefix can be dropped
    if (keeping && !keep) throw std::logic_error("mean cluster size decreased between levels");
    keeping = keeping || keep;
    if (keep) out.levels.push_back(level);
  }
  return out;
}

}  // namespace lsh
