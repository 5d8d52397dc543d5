#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "lsh/environment.hpp"
#include "lsh/skills.hpp"

namespace lsh {

struct LearningParams {
  double alpha = 0.4;
  double gamma = 1.0;
  double q0 = 0.0;
  double epsilon = 0.1;
  /// Primitive steps before a training episode is cut off.
  std::size_t max_episode_steps = 10'000;
  /// Primitive steps allowed in an evaluation rollout.
  std::size_t eval_max_steps = 10'000;
  bool intra_option = true;
};

/// Action values over root slots: primitive actions occupy slots
/// 0..A-1, option i occupies slot A+i. Absent entries read as q0.
class QTable {
 public:
  QTable(std::size_t slots = 0, double q0 = 0.0) : slots_(slots), q0_(q0) {}

  std::size_t slots() const { return slots_; }
  double q0() const { return q0_; }
  double value(State s, std::size_t slot) const;
  /// Creates the row on first access.
  double& at(State s, std::size_t slot);
  const std::vector<double>* row(State s) const;
  std::size_t state_count() const { return rows_.size(); }
  /// Visited states in increasing order.
  std::vector<State> states() const;

  /// Re-lays the columns: column j of the result is old column old_for_new[j],
  /// or q0 where that entry is npos.
  void remap(std::span<const std::size_t> old_for_new);

  friend bool operator==(const QTable& a, const QTable& b) {
    return a.slots_ == b.slots_ && a.q0_ == b.q0_ && a.rows_ == b.rows_;
  }

  static constexpr std::size_t npos = ~std::size_t{0};

 private:
  std::size_t slots_;
  double q0_;
  std::unordered_map<State, std::vector<double>> rows_;
};

/// Target of an SMDP (macro-Q) backup: R + gamma^tau * next_max, where
/// next_max is 0 for a terminal s'.
inline double macro_q_target(double reward, double gamma, std::size_t tau, double next_max) {
  double discount = 1.0;
  for (std::size_t k = 0; k < tau; ++k) discount *= gamma;
  return reward + discount * next_max;
}

/// Q(s,o) += alpha * (R + gamma^tau * next_max - Q(s,o)). tau = 1 is Q-learning.
inline void macro_q_update(QTable& q, State s, std::size_t slot, double reward, std::size_t tau,
                           double next_max, double alpha, double gamma) {
  double& v = q.at(s, slot);
  v += alpha * (macro_q_target(reward, gamma, tau, next_max) - v);
}

/// Intra-option target for one primitive transition: r + gamma * U, where U
/// is the option's own value at s' if it continues there and the best
/// admissible value at s' if it terminates.
inline double intra_option_target(double reward, double gamma, bool continues,
                                  double option_value_next, double next_max) {
  return reward + gamma * (continues ? option_value_next : next_max);
}

/// Skills available to an agent. Option nodes are mapped to environment
/// states through `index`; states it does not cover start no option.
struct SkillSet {
  std::shared_ptr<const OptionHierarchy> options;
  std::shared_ptr<const StateIndex> index;

  std::size_t size() const { return options ? options->size() : 0; }
  NodeId node(State s) const;
};

/// Running option of the call stack (outermost first).
struct Frame {
  std::size_t option;
  State start;
  double reward = 0.0;    // discounted reward accumulated so far
  double discount = 1.0;  // gamma^tau
  std::size_t tau = 0;
};

struct StepRecord {
  State state;
  ActionId action;
  double reward;
  State next;
  bool terminal;
  /// Options whose frames were popped after this step, innermost first.
  std::vector<std::size_t> terminated;
};

enum class UpdateKind { primitive, macro, intra };

struct UpdateEvent {
  UpdateKind kind;
  State state;
  std::size_t slot;
  double before;
  double after;
};
using UpdateObserver = std::function<void(const UpdateEvent&)>;

/// Tabular agent acting through primitives and a multi-level option call
/// stack, learning with Q-learning, macro-Q and intra-option updates.
class Agent {
 public:
  Agent(const Env& env, SkillSet skills, LearningParams params, std::uint64_t seed);

  /// One decision stage (primitive step). A new episode starts when needed.
  /// `root` forces the root choice when the stack is empty; otherwise the
  /// root choice is epsilon-greedy with ties broken uniformly at random.
  StepRecord step(std::optional<std::size_t> root = std::nullopt);

  /// Greedy rollout at every level, without learning, from a start drawn
  /// with `rng`. Returns the undiscounted return.
  double evaluate(Rng& rng) const;

  /// Root slots admissible in s: env actions, then options whose initiation
  /// set holds s, ascending.
  void admissible(State s, std::vector<std::size_t>& out) const;
  /// Best admissible root value in s, 0 if s is terminal.
  double best_value(State s) const;
  /// Whether option `id` has chosen primitive a in s under its greedy child
  /// chain (ties count as agreement).
  bool consistent(std::size_t id, State s, ActionId a) const;

  /// Swaps in a revised skill set. old_for_new maps each new option to its
  /// predecessor (QTable::npos for none); the call stack is cleared.
  void replace_skills(SkillSet skills, std::span<const std::size_t> old_for_new);

  const QTable& q() const { return q_; }
  QTable& q() { return q_; }
  const SkillSet& skills() const { return skills_; }
  const std::vector<Frame>& stack() const { return stack_; }
  std::optional<State> state() const { return state_; }
  /// Starts a new episode in s.
  void start_episode(State s);
  std::size_t steps() const { return steps_; }

  void set_observer(UpdateObserver obs) { observer_ = std::move(obs); }

 private:
  struct Pending {
    State s;
    ActionId a;
    double r;
    State next;
    bool terminal;
  };

  std::size_t choose_root(State s);
  std::size_t choose_child(std::size_t id, State s, bool explore);
  bool continues(std::size_t id, State s) const;
  void update(UpdateKind kind, State s, std::size_t slot, double target);
  void flush_intra();
  void end_episode();

  const Env* env_;
  SkillSet skills_;
  LearningParams p_;
  Rng rng_;
  QTable q_;
  std::vector<Frame> stack_;
  std::vector<Pending> pending_;
  std::optional<State> state_;
  std::size_t episode_steps_ = 0;
  std::size_t steps_ = 0;
  UpdateObserver observer_;
  mutable std::vector<std::size_t> scratch_;
  std::vector<std::size_t> ties_;
  mutable std::vector<ActionId> actions_;
};

/// Evaluation returns per (run, epoch).
class LearningCurve {
 public:
  LearningCurve(std::size_t runs = 0, std::size_t epochs = 0)
      : runs_(runs), epochs_(epochs), values_(runs * epochs, 0.0) {}

  std::size_t runs() const { return runs_; }
  std::size_t epochs() const { return epochs_; }
  double& at(std::size_t run, std::size_t epoch) { return values_[run * epochs_ + epoch]; }
  double at(std::size_t run, std::size_t epoch) const { return values_[run * epochs_ + epoch]; }
  void set_run(std::size_t run, std::span<const double> returns);

  double mean(std::size_t epoch) const;
  /// Sample standard deviation over runs divided by sqrt(runs).
  double stderr_of_mean(std::size_t epoch) const;
  /// Mean over runs and the last `window` epochs.
  double tail_mean(std::size_t window) const;

 private:
  std::size_t runs_;
  std::size_t epochs_;
  std::vector<double> values_;
};

/// sqrt(a^2 + b^2), the standard error of a difference of independent means.
double pooled_stderr(double a, double b);

struct TrainingResult {
  QTable q;
  /// Evaluation return after each epoch.
  std::vector<double> returns;
};

/// Trains for epochs * epoch_length decision stages, evaluating greedily
/// after each epoch. Evaluation starts are drawn from a stream separate from
/// the learner's.
TrainingResult run_training(const Env& env, const SkillSet& skills, const LearningParams& params,
                            std::size_t epochs, std::size_t epoch_length, std::uint64_t seed);

/// Greedy evaluation of a trained agent from a start drawn with `rng`.
double evaluate(const Agent& agent, Rng& rng);

}  // namespace lsh
