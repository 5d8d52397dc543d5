// Independent reference computations used by the tests: brute-force
// partition search, from-scratch modularity, BFS distances, random graph
// generators and a plain tabular Q-learner.
#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "lsh/environment.hpp"
#include "lsh/graph.hpp"
#include "lsh/learning.hpp"

namespace oracle {

using lsh::ClusterId;
using lsh::NodeId;
using lsh::WeightedDigraph;
using lsh::WeightedEdge;

// Straight from the edge list: sum over clusters of w_in/m - rho*out*in/m^2.
inline double modularity(const WeightedDigraph& g, const std::vector<ClusterId>& assign, double rho) {
  const auto edges = g.edges();
  double m = 0.0;
  for (const auto& e : edges) m += e.weight;
  std::map<ClusterId, double> in_w, out_w, inner;
  for (const auto& e : edges) {
    out_w[assign[e.src]] += e.weight;
    in_w[assign[e.dst]] += e.weight;
    if (assign[e.src] == assign[e.dst]) inner[assign[e.src]] += e.weight;
  }
  std::set<ClusterId> ids(assign.begin(), assign.end());
  double q = 0.0;
  for (const auto c : ids) q += inner[c] / m - rho * (out_w[c] / m) * (in_w[c] / m);
  return q;
}

// Calls fn on every set partition of {0..n-1}, encoded as a restricted
// growth string (a[0] = 0, a[i] <= 1 + max(a[0..i-1])).
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<ClusterId>&)>& fn) {
  std::vector<ClusterId> a(n, 0);
  auto prefix_max = [&](std::size_t i) {
    ClusterId m = 0;
    for (std::size_t j = 0; j < i; ++j) m = std::max(m, a[j]);
    return m;
  };
  for (;;) {
    fn(a);
    std::size_t i = n;
    while (i > 1 && a[i - 1] > prefix_max(i - 1)) --i;
    if (i <= 1) return;
    ++a[i - 1];
    std::fill(a.begin() + static_cast<std::ptrdiff_t>(i), a.end(), 0);
  }
}

inline std::size_t bell_number(std::size_t n) {
  std::size_t count = 0;
  for_each_partition(n, [&](const std::vector<ClusterId>&) { ++count; });
  return count;
}

struct Best {
  double q = -std::numeric_limits<double>::infinity();
  std::vector<ClusterId> assignment;
};

inline Best best_partition(const WeightedDigraph& g, double rho) {
  Best best;
  for_each_partition(g.node_count(), [&](const std::vector<ClusterId>& a) {
    const double q = modularity(g, a, rho);
    if (q > best.q) best = {q, a};
  });
  return best;
}

// Canonical relabelling: clusters numbered by first occurrence.
inline std::vector<ClusterId> canonical(std::span<const ClusterId> a) {
  std::unordered_map<ClusterId, ClusterId> ids;
  std::vector<ClusterId> out;
  out.reserve(a.size());
  for (const auto c : a) out.push_back(ids.try_emplace(c, static_cast<ClusterId>(ids.size())).first->second);
  return out;
}

inline bool same_partition(std::span<const ClusterId> a, std::span<const ClusterId> b) {
  return a.size() == b.size() && canonical(a) == canonical(b);
}

// No single node can move to a cluster it shares an edge with and gain more
// than tol.
inline bool is_local_maximum(const WeightedDigraph& g, const std::vector<ClusterId>& assign, double rho,
                             double tol = 1e-12) {
  const double q = modularity(g, assign, rho);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    std::set<ClusterId> targets;
    for (const auto& a : g.out_arcs(u)) targets.insert(assign[a.node]);
    for (const auto& a : g.in_arcs(u)) targets.insert(assign[a.node]);
    for (const auto c : targets) {
      if (c == assign[u]) continue;
      auto moved = assign;
      moved[u] = c;
      if (modularity(g, moved, rho) > q + tol) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Graph generators

inline WeightedDigraph symmetric(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> pairs) {
  std::vector<WeightedEdge> edges;
  for (const auto& [u, v] : pairs) {
    edges.push_back({u, v, 1.0});
    edges.push_back({v, u, 1.0});
  }
  return lsh::build_graph(n, edges);
}

// Two triangles {0,1,2} and {3,4,5} joined by 2-3.
inline WeightedDigraph barbell() {
  return symmetric(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
}

// Pairs {0,1} and {2,3} joined by 1-2.
inline WeightedDigraph clique_pair() { return symmetric(4, {{0, 1}, {2, 3}, {1, 2}}); }

// Triangles {0,1,2}, {3,4,5}, {6,7,8} joined in a ring 2-3, 5-6, 8-0.
inline WeightedDigraph triangle_ring() {
  return symmetric(9, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {6, 7}, {7, 8}, {6, 8},
                       {2, 3}, {5, 6}, {8, 0}});
}

struct RandomGraphSpec {
  std::size_t min_nodes = 2;
  std::size_t max_nodes = 30;
  double density = 0.2;
  bool symmetric = false;
  bool unit_weights = false;
};

inline WeightedDigraph random_graph(lsh::Rng& rng, const RandomGraphSpec& spec) {
  const std::size_t n =
      spec.min_nodes + lsh::uniform_index(rng, spec.max_nodes - spec.min_nodes + 1);
  std::vector<WeightedEdge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = spec.symmetric ? u + 1 : 0; v < n; ++v) {
      if (u == v || lsh::uniform01(rng) >= spec.density) continue;
      const double w = spec.unit_weights ? 1.0 : 0.1 + 2.0 * lsh::uniform01(rng);
      edges.push_back({u, v, w});
      if (spec.symmetric) edges.push_back({v, u, w});
    }
  }
  // Keep m > 0.
  if (edges.empty()) {
    edges.push_back({0, 1, 1.0});
    if (spec.symmetric) edges.push_back({1, 0, 1.0});
  }
  return lsh::build_graph(n, edges);
}

inline std::vector<ClusterId> random_assignment(lsh::Rng& rng, std::size_t n, std::size_t clusters) {
  std::vector<ClusterId> a(n);
  for (auto& c : a) c = static_cast<ClusterId>(lsh::uniform_index(rng, clusters));
  return a;
}

// ---------------------------------------------------------------------------
// Environments

// Shortest path length (in primitive steps) from `from` to any terminal state.
inline std::size_t distance_to_goal(const lsh::Env& env, lsh::State from) {
  std::map<lsh::State, std::size_t> dist{{from, 0}};
  std::deque<lsh::State> queue{from};
  std::vector<lsh::ActionId> acts;
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    if (env.is_terminal(s)) return dist[s];
    env.actions(s, acts);
    for (const auto a : acts) {
      const auto t = env.step(s, a).next;
      if (dist.emplace(t, dist[s] + 1).second) queue.push_back(t);
    }
  }
  return std::numeric_limits<std::size_t>::max();
}

// Reachable states by BFS over every offered action.
inline std::set<lsh::State> reachable(const lsh::Env& env) {
  const auto support = env.start_support();
  std::set<lsh::State> seen(support.begin(), support.end());
  std::deque<lsh::State> queue(support.begin(), support.end());
  std::vector<lsh::ActionId> acts;
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    env.actions(s, acts);
    for (const auto a : acts) {
      const auto t = env.step(s, a).next;
      if (seen.insert(t).second) queue.push_back(t);
    }
  }
  return seen;
}

// ---------------------------------------------------------------------------
// Plain epsilon-greedy Q-learning with random tie-breaking. Consumes the
// generator in the same order as an agent without options: reset on episode
// start, one uniform draw for exploration, then one index draw when exploring
// or when several actions tie.
struct QLearner {
  const lsh::Env& env;
  lsh::LearningParams p;
  lsh::Rng rng;
  std::map<std::pair<lsh::State, lsh::ActionId>, double> q;
  std::optional<lsh::State> state;
  std::size_t episode_steps = 0;

  QLearner(const lsh::Env& e, lsh::LearningParams params, std::uint64_t seed)
      : env(e), p(params), rng(seed) {}

  double value(lsh::State s, lsh::ActionId a) const {
    const auto it = q.find({s, a});
    return it == q.end() ? p.q0 : it->second;
  }

  double best(lsh::State s) const {
    if (env.is_terminal(s)) return 0.0;
    double b = -std::numeric_limits<double>::infinity();
    for (const auto a : env.actions(s)) b = std::max(b, value(s, a));
    return b;
  }

  void step() {
    if (!state) {
      state = env.reset(rng);
      episode_steps = 0;
    }
    const auto s = *state;
    const auto acts = env.actions(s);
    lsh::ActionId a;
    if (lsh::uniform01(rng) < p.epsilon) {
      a = acts[lsh::uniform_index(rng, acts.size())];
    } else {
      const double b = best(s);
      std::vector<lsh::ActionId> ties;
      for (const auto x : acts)
        if (value(s, x) == b) ties.push_back(x);
      a = ties.size() == 1 ? ties[0] : ties[lsh::uniform_index(rng, ties.size())];
    }
    const auto res = env.step(s, a);
    const double target = res.reward + p.gamma * best(res.next);
    double& v = q.try_emplace({s, a}, p.q0).first->second;
    v += p.alpha * (target - v);
    ++episode_steps;
    if (res.terminal || episode_steps >= p.max_episode_steps)
      state.reset();
    else
      state = res.next;
  }
};

}  // namespace oracle
