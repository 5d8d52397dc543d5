#include "lsh/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsh {

// ---------------------------------------------------------------------------
// QTable

double QTable::value(State s, std::size_t slot) const {
  const auto it = rows_.find(s);
  return it == rows_.end() ? q0_ : it->second[slot];
}

double& QTable::at(State s, std::size_t slot) {
  auto [it, fresh] = rows_.try_emplace(s);
  if (fresh) it->second.assign(slots_, q0_);
  return it->second[slot];
}

const std::vector<double>* QTable::row(State s) const {
  const auto it = rows_.find(s);
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<State> QTable::states() const {
  std::vector<State> out;
  out.reserve(rows_.size());
  for (const auto& [s, row] : rows_) out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

void QTable::remap(std::span<const std::size_t> old_for_new) {
  for (auto& [s, row] : rows_) {
    std::vector<double> fresh(old_for_new.size(), q0_);
    for (std::size_t j = 0; j < old_for_new.size(); ++j)
      if (old_for_new[j] != npos) fresh[j] = row[old_for_new[j]];
    row = std::move(fresh);
  }
  slots_ = old_for_new.size();
}

// ---------------------------------------------------------------------------
// Agent

NodeId SkillSet::node(State s) const {
  if (!options || !index) return kNoNode;
  const auto id = index->find(s);
  if (!id || *id >= options->node_count()) return kNoNode;
  return *id;
}

Agent::Agent(const Env& env, SkillSet skills, LearningParams params, std::uint64_t seed)
    : env_(&env),
      skills_(std::move(skills)),
      p_(params),
      rng_(seed),
      q_(env.action_count() + skills_.size(), params.q0) {}

void Agent::admissible(State s, std::vector<std::size_t>& out) const {
  out.clear();
  env_->actions(s, actions_);
  out.assign(actions_.begin(), actions_.end());
  const NodeId u = skills_.node(s);
  if (u == kNoNode || env_->is_terminal(s)) return;
  const auto& oh = *skills_.options;
  const std::size_t base = env_->action_count();
  for (std::size_t level = 1; level <= oh.level_count(); ++level) {
    for (const auto id : oh.options_from(level, oh.cluster_of(level, u))) {
      const auto& o = oh.option(id);
      const auto i = o.local(u);
      if (i >= 0 && !o.admissible[i].empty()) out.push_back(base + id);
    }
  }
}

double Agent::best_value(State s) const {
  if (env_->is_terminal(s)) return 0.0;
  std::vector<std::size_t> slots;
  admissible(s, slots);
  if (slots.empty()) return 0.0;
  const auto* row = q_.row(s);
  if (!row) return q_.q0();
  double best = (*row)[slots[0]];
  for (const auto slot : slots) best = std::max(best, (*row)[slot]);
  return best;
}

bool Agent::continues(std::size_t id, State s) const {
  if (env_->is_terminal(s)) return false;
  const NodeId u = skills_.node(s);
  if (u == kNoNode) return false;
  const auto& oh = *skills_.options;
  if (!oh.in_source(id, u)) return false;
  const auto& o = oh.option(id);
  const auto i = o.local(u);
  return i >= 0 && !o.admissible[i].empty();
}

bool Agent::consistent(std::size_t id, State s, ActionId a) const {
  const NodeId u = skills_.node(s);
  if (u == kNoNode) return false;
  const auto& oh = *skills_.options;
  const auto& o = oh.option(id);
  if (!oh.in_source(id, u)) return false;
  const auto i = o.local(u);
  if (i < 0 || o.admissible[i].empty()) return false;
  const auto& values = o.q[i];
  double best = values[o.admissible[i][0]];
  for (const auto slot : o.admissible[i]) best = std::max(best, values[slot]);
  for (const auto slot : o.admissible[i]) {
    if (values[slot] != best) continue;
    if (o.calls_primitives() ? slot == a : consistent(o.children[slot], s, a)) return true;
  }
  return false;
}

std::size_t Agent::choose_root(State s) {
  admissible(s, scratch_);
  if (uniform01(rng_) < p_.epsilon) return scratch_[uniform_index(rng_, scratch_.size())];
  const auto* row = q_.row(s);
  auto value = [&](std::size_t slot) { return row ? (*row)[slot] : q_.q0(); };
  double best = value(scratch_[0]);
  for (const auto slot : scratch_) best = std::max(best, value(slot));
  ties_.clear();
  for (const auto slot : scratch_)
    if (value(slot) == best) ties_.push_back(slot);
  return ties_.size() == 1 ? ties_[0] : ties_[uniform_index(rng_, ties_.size())];
}

std::size_t Agent::choose_child(std::size_t id, State s, bool explore) {
  const auto& o = skills_.options->option(id);
  const auto i = static_cast<std::size_t>(o.local(skills_.node(s)));
  const auto& adm = o.admissible[i];
  if (explore && uniform01(rng_) < p_.epsilon) return adm[uniform_index(rng_, adm.size())];
  return static_cast<std::size_t>(o.greedy(i));
}

void Agent::update(UpdateKind kind, State s, std::size_t slot, double target) {
  double& v = q_.at(s, slot);
  const double before = v;
  v += p_.alpha * (target - v);
  if (observer_) observer_(UpdateEvent{kind, s, slot, before, v});
}

void Agent::start_episode(State s) {
  flush_intra();
  stack_.clear();
  state_ = s;
  episode_steps_ = 0;
}

StepRecord Agent::step(std::optional<std::size_t> root) {
  if (!state_) {
    state_ = env_->reset(rng_);
    episode_steps_ = 0;
  }
  const State s = *state_;
  const std::size_t base = env_->action_count();

  ActionId action;
  bool chosen = false;
  if (stack_.empty()) {
    const std::size_t slot = root ? *root : choose_root(s);
    if (slot < base) {
      action = static_cast<ActionId>(slot);
      chosen = true;
    } else {
      stack_.push_back(Frame{slot - base, s});
    }
  }
  while (!chosen) {
    const std::size_t id = stack_.back().option;
    const std::size_t child = choose_child(id, s, true);
    const auto& o = skills_.options->option(id);
    if (o.calls_primitives()) {
      action = static_cast<ActionId>(child);
      chosen = true;
    } else {
      stack_.push_back(Frame{o.children[child], s});
    }
  }

  const StepResult res = env_->step(s, action);
  ++steps_;
  ++episode_steps_;
  StepRecord rec{s, action, res.reward, res.next, res.terminal, {}};

  update(UpdateKind::primitive, s, action, res.reward + p_.gamma * best_value(res.next));
  for (auto& f : stack_) {
    f.reward += f.discount * res.reward;
    f.discount *= p_.gamma;
    ++f.tau;
  }
  if (p_.intra_option && skills_.size() > 0)
    pending_.push_back({s, action, res.reward, res.next, res.terminal});

  std::size_t keep = stack_.size();
  for (std::size_t k = 0; k < stack_.size(); ++k) {
    if (res.terminal || !continues(stack_[k].option, res.next)) {
      keep = k;
      break;
    }
  }
  if (keep < stack_.size()) {
    const double next_max = best_value(res.next);
    while (stack_.size() > keep) {
      const Frame f = stack_.back();
      stack_.pop_back();
      update(UpdateKind::macro, f.start, base + f.option, f.reward + f.discount * next_max);
      rec.terminated.push_back(f.option);
    }
  }

  const bool cut = episode_steps_ >= p_.max_episode_steps;
  if (!rec.terminated.empty() || stack_.empty() || res.terminal || cut) flush_intra();
  if (res.terminal || cut) {
    stack_.clear();
    state_.reset();
  } else {
    state_ = res.next;
  }
  return rec;
}

void Agent::flush_intra() {
  if (pending_.empty()) return;
  const auto& oh = *skills_.options;
  const std::size_t base = env_->action_count();
  for (const auto& t : pending_) {
    const NodeId u = skills_.node(t.s);
    if (u == kNoNode) continue;
    const double next_max = best_value(t.next);
    for (std::size_t level = 1; level <= oh.level_count(); ++level) {
      for (const auto id : oh.options_from(level, oh.cluster_of(level, u))) {
        if (!consistent(id, t.s, t.a)) continue;
        const bool cont = !t.terminal && continues(id, t.next);
        const double target = intra_option_target(t.r, p_.gamma, cont,
                                                  q_.value(t.next, base + id), next_max);
        update(UpdateKind::intra, t.s, base + id, target);
      }
    }
  }
  pending_.clear();
}

void Agent::replace_skills(SkillSet skills, std::span<const std::size_t> old_for_new) {
  flush_intra();
  stack_.clear();
  const std::size_t base = env_->action_count();
  std::vector<std::size_t> columns(base + old_for_new.size());
  std::iota(columns.begin(), columns.begin() + base, std::size_t{0});
  for (std::size_t i = 0; i < old_for_new.size(); ++i)
    columns[base + i] = old_for_new[i] == QTable::npos ? QTable::npos : base + old_for_new[i];
  q_.remap(columns);
  skills_ = std::move(skills);
}

double Agent::evaluate(Rng& rng) const {
  State s = env_->reset(rng);
  const std::size_t base = env_->action_count();
  std::vector<std::size_t> stack;
  std::vector<std::size_t> slots;
  double total = 0.0;
  for (std::size_t t = 0; t < p_.eval_max_steps; ++t) {
    ActionId action = 0;
    if (stack.empty()) {
      admissible(s, slots);
      const auto* row = q_.row(s);
      std::size_t best = slots[0];
      if (row)
        for (const auto slot : slots)
          if ((*row)[slot] > (*row)[best]) best = slot;
      if (best >= base)
        stack.push_back(best - base);
      else
        action = static_cast<ActionId>(best);
    }
    if (!stack.empty()) {
      for (;;) {
        const auto& o = skills_.options->option(stack.back());
        const auto child = o.greedy(static_cast<std::size_t>(o.local(skills_.node(s))));
        if (o.calls_primitives()) {
          action = static_cast<ActionId>(child);
          break;
        }
        stack.push_back(o.children[child]);
      }
    }
    const StepResult res = env_->step(s, action);
    total += res.reward;
    if (res.terminal) break;
    s = res.next;
    for (std::size_t k = 0; k < stack.size(); ++k) {
      if (!continues(stack[k], s)) {
        stack.resize(k);
        break;
      }
    }
  }
  return total;
}

double evaluate(const Agent& agent, Rng& rng) { return agent.evaluate(rng); }

// ---------------------------------------------------------------------------
// Curves

void LearningCurve::set_run(std::size_t run, std::span<const double> returns) {
  if (returns.size() != epochs_) throw ConfigError("run length does not match the epoch count");
  std::copy(returns.begin(), returns.end(), values_.begin() + run * epochs_);
}

double LearningCurve::mean(std::size_t epoch) const {
  if (runs_ == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < runs_; ++r) sum += at(r, epoch);
  return sum / double(runs_);
}

double LearningCurve::stderr_of_mean(std::size_t epoch) const {
  if (runs_ < 2) return 0.0;
  const double mu = mean(epoch);
  double ss = 0.0;
  for (std::size_t r = 0; r < runs_; ++r) ss += (at(r, epoch) - mu) * (at(r, epoch) - mu);
  return std::sqrt(ss / double(runs_ - 1)) / std::sqrt(double(runs_));
}

double LearningCurve::tail_mean(std::size_t window) const {
  window = std::min(window, epochs_);
  if (window == 0 || runs_ == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t e = epochs_ - window; e < epochs_; ++e) sum += mean(e);
  return sum / double(window);
}

double pooled_stderr(double a, double b) { return std::sqrt(a * a + b * b); }

TrainingResult run_training(const Env& env, const SkillSet& skills, const LearningParams& params,
                            std::size_t epochs, std::size_t epoch_length, std::uint64_t seed) {
  Agent agent(env, skills, params, seed);
  Rng eval_rng(derive_seed(seed, 0x65766131));
  TrainingResult out;
  out.returns.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t t = 0; t < epoch_length; ++t) agent.step();
    out.returns.push_back(agent.evaluate(eval_rng));
  }
  out.q = agent.q();
  return out;
}

}  // namespace lsh
