#include "lsh/skills.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace lsh {

// ---------------------------------------------------------------------------
// PrimitiveModel

PrimitiveModel PrimitiveModel::from_env(const Env& env, const StateIndex& index) {
  PrimitiveModel m;
  m.action_count_ = env.action_count();
  m.terminal_.resize(index.size());
  m.offsets_.assign(1, 0);
  std::vector<ActionId> acts;
  for (NodeId u = 0; u < index.size(); ++u) {
    const State s = index.state(u);
    m.terminal_[u] = env.is_terminal(s) ? 1 : 0;
    env.actions(s, acts);
    for (const ActionId a : acts) {
      const auto next = index.find(env.step(s, a).next);
      if (next) m.moves_.push_back({a, *next});
    }
    m.offsets_.push_back(m.moves_.size());
  }
  return m;
}

PrimitiveModel PrimitiveModel::from_transitions(std::size_t node_count, std::size_t action_count,
                                                std::span<const TransitionTriple> transitions,
                                                const StateIndex& index,
                                                std::vector<char> terminal) {
  if (terminal.size() != node_count) throw ConfigError("terminal flags must cover every node");
  std::vector<std::vector<Move>> rows(node_count);
  for (const auto& t : transitions) {
    const auto from = index.find(t.from);
    const auto to = index.find(t.to);
    if (!from || !to || *from >= node_count || *to >= node_count) continue;
    auto& row = rows[*from];
    const auto it = std::find_if(row.begin(), row.end(),
                                 [&](const Move& mv) { return mv.action == t.action; });
    if (it == row.end()) row.push_back({t.action, *to});
  }
  PrimitiveModel m;
  m.action_count_ = action_count;
  m.terminal_ = std::move(terminal);
  m.offsets_.assign(1, 0);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(),
              [](const Move& a, const Move& b) { return a.action < b.action; });
    m.moves_.insert(m.moves_.end(), row.begin(), row.end());
    m.offsets_.push_back(m.moves_.size());
  }
  return m;
}

NodeId PrimitiveModel::next(NodeId u, ActionId a) const {
  for (const auto& mv : moves(u))
    if (mv.action == a) return mv.next;
  return kNoNode;
}

// ---------------------------------------------------------------------------
// Option

std::ptrdiff_t Option::local(NodeId u) const {
  const auto it = std::lower_bound(region.begin(), region.end(), u);
  if (it == region.end() || *it != u) return -1;
  return it - region.begin();
}

std::int64_t Option::greedy(std::size_t i) const {
  std::int64_t best = -1;
  double best_q = -std::numeric_limits<double>::infinity();
  for (const auto slot : admissible[i]) {
    const double v = q[i][slot];
    if (v > best_q || (v == best_q && slot < best)) {
      best_q = v;
      best = slot;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// OptionHierarchy

OptionHierarchy OptionHierarchy::build(const ClusterHierarchy& h, const PrimitiveModel& model) {
  OptionHierarchy oh;
  oh.action_count_ = model.action_count();
  if (h.empty()) return oh;
  if (h.node_count != model.node_count())
    throw ConfigError("hierarchy and transition model cover different node sets");
  if (!h.is_nested()) throw ConfigError("cluster hierarchy is not nested");

  for (std::size_t l = 0; l < h.levels.size(); ++l) {
    const auto& level = h.levels[l];
    oh.membership_.push_back(level.base);
    oh.cluster_counts_.push_back(level.cluster_count());
    oh.raw_levels_.push_back(level.raw_index);
    for (const auto& e : level.aggregate.edges()) {
      if (e.src == e.dst) continue;
      Option o;
      o.level = l + 1;
      o.raw_level = level.raw_index;
      o.source = e.src;
      o.target = e.dst;
      oh.options_.push_back(std::move(o));
    }
  }
  oh.index_options();
  oh.wire_children();
  for (auto& o : oh.options_) oh.init_region(o, model);
  return oh;
}

void OptionHierarchy::index_options() {
  by_source_offsets_.assign(membership_.size(), {});
  source_order_.resize(options_.size());
  std::iota(source_order_.begin(), source_order_.end(), std::size_t{0});
  // options_ is already sorted by (level, source, target) on construction
  for (std::size_t l = 0; l < membership_.size(); ++l) {
    auto& offsets = by_source_offsets_[l];
    offsets.assign(cluster_counts_[l] + 1, 0);
    for (const auto& o : options_)
      if (o.level == l + 1) ++offsets[o.source + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::size_t first = 0;
    while (first < options_.size() && options_[first].level != l + 1) ++first;
    for (auto& off : offsets) off += first;
  }
}

void OptionHierarchy::wire_children() {
  for (std::size_t l = 1; l < membership_.size(); ++l) {
    std::vector<ClusterId> parent(cluster_counts_[l - 1], kNoCluster);
    for (std::size_t u = 0; u < membership_[l].size(); ++u)
      parent[membership_[l - 1][u]] = membership_[l][u];
    const auto lower = options_at(l);
    for (auto& o : options_) {
      if (o.level != l + 1) continue;
      o.children.clear();
      for (const auto c : lower) {
        const auto p = parent[options_[c].source];
        if (p == o.source || p == o.target) o.children.push_back(c);
      }
    }
  }
}

void OptionHierarchy::init_region(Option& o, const PrimitiveModel& model) const {
  const auto& member = membership_[o.level - 1];
  o.region.clear();
  for (NodeId u = 0; u < member.size(); ++u)
    if (member[u] == o.source || member[u] == o.target) o.region.push_back(u);
  const std::size_t slots = o.calls_primitives() ? action_count_ : o.children.size();
  o.admissible.assign(o.region.size(), {});
  o.q.assign(o.region.size(), {});
  for (std::size_t i = 0; i < o.region.size(); ++i) {
    const NodeId u = o.region[i];
    if (member[u] != o.source) continue;
    o.q[i].assign(slots, 0.0);
    if (!o.calls_primitives() || model.is_terminal(u)) continue;
    for (const auto& mv : model.moves(u))
      if (mv.next != u && o.local(mv.next) >= 0) o.admissible[i].push_back(mv.action);
  }
  o.converged = false;
  o.episodes_trained = 0;
}

std::vector<std::size_t> OptionHierarchy::options_at(std::size_t level) const {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < options_.size(); ++i)
    if (options_[i].level == level) ids.push_back(i);
  return ids;
}

std::span<const std::size_t> OptionHierarchy::options_from(std::size_t level,
                                                           ClusterId source) const {
  const auto& off = by_source_offsets_[level - 1];
  if (source + 1 >= off.size()) return {};
  return {source_order_.data() + off[source], source_order_.data() + off[source + 1]};
}

OptionHierarchy OptionHierarchy::flattened(const PrimitiveModel& model) const {
  OptionHierarchy flat = *this;
  for (auto& o : flat.options_) {
    o.children.clear();
    flat.init_region(o, model);
  }
  return flat;
}

OptionHierarchy OptionHierarchy::single_level(std::size_t level, const PrimitiveModel& model) const {
  if (level < 1 || level > level_count())
    throw ConfigError("level " + std::to_string(level) + " outside 1.." +
                      std::to_string(level_count()));
  OptionHierarchy one;
  one.action_count_ = action_count_;
  one.membership_ = {membership_[level - 1]};
  one.cluster_counts_ = {cluster_counts_[level - 1]};
  one.raw_levels_ = {raw_levels_[level - 1]};
  for (const auto& o : options_) {
    if (o.level != level) continue;
    Option copy;
    copy.level = 1;
    copy.raw_level = o.raw_level;
    copy.source = o.source;
    copy.target = o.target;
    one.options_.push_back(std::move(copy));
  }
  one.index_options();
  for (auto& o : one.options_) one.init_region(o, model);
  return one;
}

// ---------------------------------------------------------------------------
// Rollouts

Rollout greedy_rollout(const OptionHierarchy& oh, const PrimitiveModel& model, std::size_t id,
                       NodeId u, std::size_t max_steps) {
  const Option& o = oh.option(id);
  Rollout r{u, 0, false};
  while (r.steps < max_steps) {
    const auto i = o.local(r.end);
    if (i < 0 || !oh.in_source(id, r.end) || model.is_terminal(r.end)) return r;
    const auto slot = o.greedy(static_cast<std::size_t>(i));
    if (slot < 0) return r;
    if (o.calls_primitives()) {
      const NodeId next = model.next(r.end, static_cast<ActionId>(slot));
      if (next == kNoNode) return r;
      r.end = next;
      ++r.steps;
    } else {
      const auto child = greedy_rollout(oh, model, o.children[slot], r.end, max_steps - r.steps);
      r.steps += child.steps;
      r.end = child.end;
      if (!child.reached_target) return r;
    }
    if (oh.in_target(id, r.end)) {
      r.reached_target = true;
      return r;
    }
  }
  return r;
}

double greedy_success_rate(const OptionHierarchy& oh, const PrimitiveModel& model, std::size_t id,
                           std::size_t rollout_factor) {
  const Option& o = oh.option(id);
  const std::size_t cap = rollout_factor * o.region.size();
  std::size_t starts = 0;
  std::size_t hits = 0;
  for (const NodeId u : o.region) {
    if (!oh.in_source(id, u) || model.is_terminal(u)) continue;
    ++starts;
    hits += greedy_rollout(oh, model, id, u, cap).reached_target ? 1 : 0;
  }
  return starts == 0 ? 1.0 : double(hits) / double(starts);
}

// ---------------------------------------------------------------------------
// Training

std::uint64_t option_stream(const Option& o) {
  return (std::uint64_t(o.raw_level) << 48) ^ (std::uint64_t(o.source) << 24) ^ o.target;
}

namespace {

struct ChildOutcome {
  NodeId end;
  std::size_t steps;
};

// Admissible children of a higher-level option: those whose greedy execution
// from the node reaches their target inside the option's region.
std::vector<std::vector<ChildOutcome>> wire_admissible(OptionHierarchy& oh,
                                                       const PrimitiveModel& model,
                                                       std::size_t id) {
  Option& o = oh.option(id);
  std::vector<std::vector<ChildOutcome>> outcomes(o.region.size());
  for (std::size_t i = 0; i < o.region.size(); ++i) {
    o.admissible[i].clear();
    const NodeId u = o.region[i];
    if (!oh.in_source(id, u) || model.is_terminal(u)) continue;
    for (std::uint32_t slot = 0; slot < o.children.size(); ++slot) {
      const std::size_t c = o.children[slot];
      if (!oh.in_source(c, u)) continue;
      const auto& child = oh.option(c);
      const auto r = greedy_rollout(oh, model, c, u, 4 * child.region.size());
      if (!r.reached_target || o.local(r.end) < 0) continue;
      o.admissible[i].push_back(slot);
      outcomes[i].push_back({r.end, r.steps});
    }
  }
  return outcomes;
}

double max_q(const Option& o, std::size_t i) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto slot : o.admissible[i]) best = std::max(best, o.q[i][slot]);
  return std::isinf(best) ? 0.0 : best;
}

bool train_one(OptionHierarchy& oh, const PrimitiveModel& model, std::size_t id,
               const OptionTrainingParams& p) {
  std::vector<std::vector<ChildOutcome>> outcomes;
  if (!oh.option(id).calls_primitives()) outcomes = wire_admissible(oh, model, id);
  Option& o = oh.option(id);

  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < o.region.size(); ++i)
    if (!o.admissible[i].empty()) starts.push_back(i);
  auto succeeded = [&] { return greedy_success_rate(oh, model, id, p.rollout_factor) >= 1.0; };

  o.converged = succeeded();
  if (o.converged || starts.empty()) return o.converged;

  Rng rng(derive_seed(p.seed, option_stream(o)));
  const std::size_t cap = p.cap_factor * o.region.size();
  for (std::size_t ep = 0; ep < p.episodes; ++ep) {
    std::size_t i = starts[uniform_index(rng, starts.size())];
    for (std::size_t t = 0; t < cap; ++t) {
      const auto& adm = o.admissible[i];
      std::uint32_t slot;
      if (uniform01(rng) < p.epsilon)
        slot = adm[uniform_index(rng, adm.size())];
      else
        slot = static_cast<std::uint32_t>(o.greedy(i));

      NodeId next;
      std::size_t tau = 1;
      if (o.calls_primitives()) {
        next = model.next(o.region[i], slot);
      } else {
        const auto pos = std::find(adm.begin(), adm.end(), slot) - adm.begin();
        next = outcomes[i][pos].end;
        tau = outcomes[i][pos].steps;
      }
      const auto j = o.local(next);
      const bool entered = j >= 0 && oh.in_target(id, next);
      double reward = 0.0;
      double discount = 1.0;
      for (std::size_t k = 0; k < tau; ++k) {
        reward += discount * p.step_reward;
        if (k + 1 < tau) discount *= p.gamma;
      }
      if (entered) reward += discount * p.target_reward;
      discount *= p.gamma;
      const bool done = entered || j < 0 || model.is_terminal(next) ||
                        o.admissible[static_cast<std::size_t>(j)].empty();
      const double boot = done ? 0.0 : max_q(o, static_cast<std::size_t>(j));
      auto& q = o.q[i][slot];
      q += p.alpha * (reward + discount * boot - q);
      if (done) break;
      i = static_cast<std::size_t>(j);
    }
    ++o.episodes_trained;
    if ((ep + 1) % p.check_every == 0 && succeeded()) {
      o.converged = true;
      break;
    }
  }
  if (!o.converged) o.converged = succeeded();
  return o.converged;
}

std::size_t train_levels(OptionHierarchy& oh, const PrimitiveModel& model,
                         const OptionTrainingParams& p, bool parallel) {
  std::size_t failures = 0;
  for (std::size_t level = 1; level <= oh.level_count(); ++level) {
    const auto ids = oh.options_at(level);
    const auto n = static_cast<std::ptrdiff_t>(ids.size());
    std::vector<char> ok(ids.size(), 0);
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t k = 0; k < n; ++k) ok[k] = train_one(oh, model, ids[k], p) ? 1 : 0;
    } else {
      for (std::ptrdiff_t k = 0; k < n; ++k) ok[k] = train_one(oh, model, ids[k], p) ? 1 : 0;
    }
    failures += static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 0));
  }
  return failures;
}

}  // namespace

std::size_t train_option_policies(OptionHierarchy& oh, const PrimitiveModel& model,
                                  const OptionTrainingParams& params) {
  return train_levels(oh, model, params, true);
}

namespace reference {
std::size_t train_option_policies(OptionHierarchy& oh, const PrimitiveModel& model,
                                  const OptionTrainingParams& params) {
  return train_levels(oh, model, params, false);
}
}  // namespace reference

OptionHierarchy flatten_hierarchy(const OptionHierarchy& oh, const PrimitiveModel& model,
                                  const OptionTrainingParams& params) {
  auto flat = oh.flattened(model);
  train_option_policies(flat, model, params);
  return flat;
}

OptionHierarchy select_level(const OptionHierarchy& oh, std::size_t level,
                             const PrimitiveModel& model, const OptionTrainingParams& params) {
  auto one = oh.single_level(level, model);
  train_option_policies(one, model, params);
  return one;
}

}  // namespace lsh
