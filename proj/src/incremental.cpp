#include "lsh/incremental.hpp"

#include <algorithm>
#include <map>

namespace lsh {

Revision parse_revision(const std::string& text) {
  if (text == "replace") return Revision::replace;
  if (text == "update") return Revision::update;
  throw ConfigError("unknown revision variant '" + text + "' (expected replace or update)");
}

std::string to_string(Revision r) { return r == Revision::replace ? "replace" : "update"; }

// ---------------------------------------------------------------------------

bool KnownGraph::add_state(State s) {
  const auto before = index_->size();
  index_->insert(s);
  return index_->size() != before;
}

bool KnownGraph::add_transition(State from, ActionId a, State to) {
  add_state(from);
  add_state(to);
  return transitions_.emplace(from, a, to).second;
}

WeightedDigraph KnownGraph::graph() const {
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& [from, a, to] : transitions_) {
    const NodeId u = *index_->find(from);
    const NodeId v = *index_->find(to);
    if (u != v) pairs.emplace(u, v);
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) edges.push_back({u, v, 1.0});
  return build_graph(index_->size(), edges);
}

std::vector<TransitionTriple> KnownGraph::transitions() const {
  std::vector<TransitionTriple> out;
  out.reserve(transitions_.size());
  for (const auto& [from, a, to] : transitions_) out.push_back({from, a, to});
  return out;
}

PrimitiveModel KnownGraph::model(const Env& env) const {
  std::vector<char> terminal(index_->size());
  for (NodeId u = 0; u < index_->size(); ++u) terminal[u] = env.is_terminal(index_->state(u));
  const auto triples = transitions();
  return PrimitiveModel::from_transitions(index_->size(), env.action_count(), triples, *index_,
                                          std::move(terminal));
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> carry_policies(const OptionHierarchy& old, OptionHierarchy& fresh) {
  using Key = std::tuple<std::size_t, ClusterId, ClusterId>;
  std::map<Key, std::size_t> old_ids;
  for (std::size_t i = 0; i < old.size(); ++i) {
    const auto& o = old.option(i);
    old_ids[{o.raw_level, o.source, o.target}] = i;
  }
  std::vector<std::size_t> predecessor(fresh.size(), QTable::npos);
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    Option& o = fresh.option(i);
    const auto it = old_ids.find({o.raw_level, o.source, o.target});
    if (it == old_ids.end()) continue;
    predecessor[i] = it->second;
    const Option& prev = old.option(it->second);
    if (prev.calls_primitives() != o.calls_primitives()) continue;

    // child slot in the old option -> slot in the new one
    std::vector<std::size_t> slot_map;
    if (o.calls_primitives()) {
      slot_map.resize(old.action_count());
      for (std::size_t a = 0; a < slot_map.size(); ++a) slot_map[a] = a;
    } else {
      std::map<Key, std::size_t> fresh_slots;
      for (std::size_t k = 0; k < o.children.size(); ++k) {
        const auto& c = fresh.option(o.children[k]);
        fresh_slots[{c.raw_level, c.source, c.target}] = k;
      }
      slot_map.assign(prev.children.size(), QTable::npos);
      for (std::size_t k = 0; k < prev.children.size(); ++k) {
        const auto& c = old.option(prev.children[k]);
        const auto f = fresh_slots.find({c.raw_level, c.source, c.target});
        if (f != fresh_slots.end()) slot_map[k] = f->second;
      }
    }
    for (std::size_t j = 0; j < prev.region.size(); ++j) {
      if (prev.q[j].empty()) continue;
      const auto i_new = o.local(prev.region[j]);
      if (i_new < 0 || o.q[i_new].empty()) continue;
      for (std::size_t k = 0; k < slot_map.size() && k < prev.q[j].size(); ++k)
        if (slot_map[k] != QTable::npos && slot_map[k] < o.q[i_new].size())
          o.q[i_new][slot_map[k]] = prev.q[j][k];
    }
  }
  return predecessor;
}

ClusterHierarchy revise_partitions(const WeightedDigraph& g, const ClusterHierarchy& previous,
                                   Revision variant, double rho, std::uint64_t seed) {
  if (g.node_count() == 0) {
    ClusterHierarchy h;
    h.rho = rho;
    return h;
  }
  if (variant == Revision::replace) return run_louvain(g, rho, seed);
  return update_partitions(g, previous, rho, seed);
}

IncrementalResult incremental_run(const Env& env, const IncrementalConfig& cfg) {
  if (cfg.schedule.empty()) throw ConfigError("revision schedule is empty");
  if (!std::is_sorted(cfg.schedule.begin(), cfg.schedule.end()) ||
      std::adjacent_find(cfg.schedule.begin(), cfg.schedule.end()) != cfg.schedule.end())
    throw ConfigError("revision schedule must be strictly increasing");

  IncrementalResult out;
  KnownGraph known;
  Agent agent(env, SkillSet{}, cfg.learning, cfg.seed);
  Rng eval_rng(derive_seed(cfg.seed, 0x65766131));
  auto options = std::make_shared<OptionHierarchy>();
  ClusterHierarchy raw;
  raw.rho = cfg.rho;
  std::size_t next_revision = 0;

  auto revise = [&] {
    const auto g = known.graph();
    const auto model = known.model(env);
    raw = revise_partitions(g, raw, cfg.variant, cfg.rho, derive_seed(cfg.seed, 100 + next_revision));
    const auto pruned = prune(raw, cfg.min_mean_cluster_size);
    auto fresh = std::make_shared<OptionHierarchy>(OptionHierarchy::build(pruned, model));
    std::vector<std::size_t> predecessor(fresh->size(), QTable::npos);
    if (cfg.variant == Revision::update) predecessor = carry_policies(*options, *fresh);
    auto training = cfg.option_training;
    training.seed = derive_seed(cfg.seed, 200 + next_revision);
    train_option_policies(*fresh, model, training);

    RevisionRecord rec;
    rec.stage = cfg.schedule[next_revision];
    rec.node_count = g.node_count();
    rec.edge_count = g.edge_count();
    rec.raw_levels = raw.level_count();
    rec.retained_levels = pruned.level_count();
    rec.option_count = fresh->size();
    rec.hierarchy = raw;
    out.revisions.push_back(std::move(rec));

    options = fresh;
    agent.replace_skills(SkillSet{options, known.index()}, predecessor);
    ++next_revision;
  };

  out.returns.reserve(cfg.epochs);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    for (std::size_t t = 0; t < cfg.epoch_length; ++t) {
      if (next_revision < cfg.schedule.size() && agent.steps() == cfg.schedule[next_revision])
        revise();
      const auto rec = agent.step();
      known.add_transition(rec.state, rec.action, rec.next);
    }
    out.returns.push_back(agent.evaluate(eval_rng));
  }
  out.final_hierarchy = raw;
  return out;
}

std::vector<std::size_t> random_walk_levels(const Env& env, std::span<const std::size_t> checkpoints,
                                            double rho, std::uint64_t seed, std::size_t max_steps) {
  const auto all = env.enumerate();
  const auto total_transitions = static_cast<std::size_t>(std::count_if(
      all.begin(), all.end(), [&](const TransitionTriple& t) { return !env.is_terminal(t.from); }));
  Rng rng(seed);
  KnownGraph known;
  ClusterHierarchy h;
  h.rho = rho;
  std::vector<std::size_t> levels;
  std::size_t next = 0;
  std::uint64_t revision = 0;
  auto revise = [&] {
    h = revise_partitions(known.graph(), h, Revision::update, rho, derive_seed(seed, ++revision));
    levels.push_back(h.level_count());
  };

  State s = env.reset(rng);
  known.add_state(s);
  std::vector<ActionId> acts;
  for (std::size_t t = 0; t < max_steps; ++t) {
    env.actions(s, acts);
    const ActionId a = acts[uniform_index(rng, acts.size())];
    const auto res = env.step(s, a);
    known.add_transition(s, a, res.next);
    while (next < checkpoints.size() && known.node_count() >= checkpoints[next]) {
      revise();
      ++next;
    }
    if (known.transition_count() >= total_transitions) break;
    s = res.terminal ? env.reset(rng) : res.next;
  }
  revise();
  return levels;
}

}  // namespace lsh
