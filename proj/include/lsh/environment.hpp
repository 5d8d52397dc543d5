#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lsh/graph.hpp"
#include "lsh/types.hpp"

namespace lsh {

inline constexpr double kStepReward = -0.001;
inline constexpr double kGoalReward = 1.0;

struct StepResult {
  State next;
  double reward;
  bool terminal;
};

struct TransitionTriple {
  State from;
  ActionId action;
  State to;
};

/// Finite deterministic MDP. Implementations are immutable; the current state
/// is owned by the caller, so one instance can serve many parallel runs.
class Env {
 public:
  virtual ~Env() = default;

  virtual std::string name() const = 0;
  /// Size of the action-id space; admissible subsets come from actions().
  virtual std::size_t action_count() const = 0;
  virtual void actions(State s, std::vector<ActionId>& out) const = 0;
  virtual StepResult step(State s, ActionId a) const = 0;
  virtual bool is_terminal(State s) const = 0;
  virtual bool is_goal(State s) const { return is_terminal(s); }
  /// States from which enumeration starts (the initial-state support).
  virtual std::vector<State> start_support() const = 0;
  /// Samples an episode start.
  virtual State reset(Rng& rng) const = 0;
  virtual std::string describe(State s) const = 0;

  std::vector<ActionId> actions(State s) const {
    std::vector<ActionId> out;
    actions(s, out);
    return out;
  }
  /// Every (state, action, next) triple reachable from start_support(),
  /// breadth-first in canonical order. Terminal states are expanded too.
  std::vector<TransitionTriple> enumerate(std::size_t state_cap = 10'000'000) const;
};

struct TransitionGraph {
  WeightedDigraph graph;
  StateIndex index;
};

/// One node per reachable state (ids in breadth-first discovery order), a
/// unit-weight edge u->v whenever some action moves u to v != u. Throws
/// std::runtime_error if more than `state_cap` states are discovered.
TransitionGraph extract_transition_graph(const Env& env, std::size_t state_cap = 10'000'000);

// ---------------------------------------------------------------------------
// Gridworlds

enum class Cell : char { wall = '#', floor = '.', start = 'S', goal = 'G', elevator = 'E' };

/// Rectangular ASCII map. Start and goal candidates are floor cells.
class GridLayout {
 public:
  static GridLayout parse(std::string_view text);
  static GridLayout load(const std::filesystem::path& path);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t cell_count() const { return cells_.size(); }
  Cell at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  Cell at(std::size_t cell) const { return cells_[cell]; }
  bool is_wall(std::size_t cell) const { return cells_[cell] == Cell::wall; }
  std::size_t floor_count() const;

  const std::vector<std::size_t>& start_cells() const { return starts_; }
  const std::vector<std::size_t>& goal_cells() const { return goals_; }
  /// Throws ConfigError if the layout has no elevator.
  std::size_t elevator_cell() const;

  /// Neighbour of `cell` in direction a (0=N, 1=S, 2=E, 3=W), or `cell` if blocked.
  std::size_t move(std::size_t cell, ActionId a) const;

  std::string cell_name(std::size_t cell) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Cell> cells_;
  std::vector<std::size_t> starts_;
  std::vector<std::size_t> goals_;
};

enum GridAction : ActionId { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3 };

/// Single-agent navigation: 4 moves, walls block, episode ends at the goal.
/// State = cell index.
class GridWorld final : public Env {
 public:
  /// Throws ConfigError if start or goal is a wall.
  GridWorld(GridLayout layout, std::size_t start, std::size_t goal, std::string name = "grid");
  /// Start and goal drawn from the layout's candidate lists.
  static GridWorld with_random_endpoints(GridLayout layout, Rng& rng, std::string name = "grid");

  std::string name() const override { return name_; }
  std::size_t action_count() const override { return 4; }
  using Env::actions;
  void actions(State s, std::vector<ActionId>& out) const override;
  StepResult step(State s, ActionId a) const override;
  bool is_terminal(State s) const override { return s == goal_; }
  std::vector<State> start_support() const override { return {start_}; }
  State reset(Rng&) const override { return start_; }
  std::string describe(State s) const override { return layout_.cell_name(s); }

  const GridLayout& layout() const { return layout_; }
  std::size_t start() const { return start_; }
  std::size_t goal() const { return goal_; }

 private:
  GridLayout layout_;
  std::size_t start_;
  std::size_t goal_;
  std::string name_;
};

enum OfficeAction : ActionId { kUp = 4, kDown = 5 };

/// Stacked copies of one layout joined by an elevator cell. State =
/// floor * cell_count + cell. Up/down are offered only at the elevator and
/// are no-ops at the top/bottom floor.
class MultiFloorOffice final : public Env {
 public:
  MultiFloorOffice(std::size_t floors, GridLayout layout, std::size_t start, std::size_t goal_floor,
                   std::size_t goal);
  /// Start on floor 0 and goal on the top floor, drawn from the candidates.
  static MultiFloorOffice with_random_endpoints(std::size_t floors, GridLayout layout, Rng& rng);

  std::string name() const override { return "office-multi:" + std::to_string(floors_); }
  std::size_t action_count() const override { return 6; }
  using Env::actions;
  void actions(State s, std::vector<ActionId>& out) const override;
  StepResult step(State s, ActionId a) const override;
  bool is_terminal(State s) const override { return s == goal_; }
  std::vector<State> start_support() const override { return {start_}; }
  State reset(Rng&) const override { return start_; }
  std::string describe(State s) const override;

  std::size_t floors() const { return floors_; }
  State encode(std::size_t floor, std::size_t cell) const { return floor * layout_.cell_count() + cell; }

 private:
  std::size_t floors_;
  GridLayout layout_;
  std::size_t elevator_;
  State start_;
  State goal_;
};

// ---------------------------------------------------------------------------
// Taxi

enum TaxiAction : ActionId { kPickUp = 4, kPutDown = 5 };

/// 5x5 Taxi with landmarks R, G, Y, B. Passenger location 0..3 = waiting at
/// a landmark, 4 = in the taxi, 5 = delivered (terminal, absorbing).
/// Put-down only succeeds at the destination; otherwise pick-up and
/// put-down leave the state unchanged.
class Taxi final : public Env {
 public:
  static constexpr std::size_t kSize = 5;
  static constexpr std::size_t kInTaxi = 4;
  static constexpr std::size_t kDelivered = 5;
  static constexpr std::array<std::size_t, 4> kLandmarks = {0, 4, 20, 23};  // R G Y B

  std::string name() const override { return "taxi"; }
  std::size_t action_count() const override { return 6; }
  using Env::actions;
  void actions(State s, std::vector<ActionId>& out) const override;
  StepResult step(State s, ActionId a) const override;
  bool is_terminal(State s) const override { return passenger(s) == kDelivered; }
  std::vector<State> start_support() const override;
  State reset(Rng& rng) const override;
  std::string describe(State s) const override;

  static State encode(std::size_t taxi_cell, std::size_t passenger, std::size_t destination) {
    return taxi_cell + 25 * (passenger + 6 * destination);
  }
  static std::size_t taxi_cell(State s) { return s % 25; }
  static std::size_t passenger(State s) { return (s / 25) % 6; }
  static std::size_t destination(State s) { return s / 150; }
  /// Cell reached by a move, honouring the internal walls.
  static std::size_t move(std::size_t cell, ActionId a);
};

// ---------------------------------------------------------------------------
// Towers of Hanoi

/// Discs 0 (smallest) .. n-1 on three poles; state = sum pole(d) * 3^d.
/// Action 3*from + to (from != to encoded as 6 ids: see action_pair).
class Hanoi final : public Env {
 public:
  explicit Hanoi(std::size_t discs = 4);

  std::string name() const override { return "hanoi"; }
  std::size_t action_count() const override { return 6; }
  using Env::actions;
  void actions(State s, std::vector<ActionId>& out) const override;
  StepResult step(State s, ActionId a) const override;
  bool is_terminal(State s) const override { return s == goal_; }
  std::vector<State> start_support() const override { return {0}; }
  State reset(Rng&) const override { return 0; }
  std::string describe(State s) const override;

  std::size_t discs() const { return discs_; }
  static std::pair<std::size_t, std::size_t> action_pair(ActionId a);
  /// Index of the smallest disc on `pole`, or discs() if empty.
  std::size_t top_disc(State s, std::size_t pole) const;

 private:
  std::size_t discs_;
  State goal_;
};

// ---------------------------------------------------------------------------
// Pinball geometry (positions only; no dynamics)

struct Vec2 {
  double x;
  double y;
};

struct PinballGeometry {
  std::vector<std::vector<Vec2>> obstacles;
  double ball_radius = 0.02;
  Vec2 start{0.2, 0.9};
  Vec2 goal{0.9, 0.2};

  static PinballGeometry load(const std::filesystem::path& path);
  static PinballGeometry parse(std::string_view json_text);
  /// Ball fits inside the unit square without touching any obstacle.
  bool collision_free(Vec2 p) const;
};

/// Uniform positions over the collision-free region by seeded rejection
/// sampling. Throws std::runtime_error if fewer than 1% of draws are accepted.
PointCloud sample_pinball_states(const PinballGeometry& geom, std::size_t n, std::uint64_t seed);

}  // namespace lsh
