#include "lsh/environment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lsh {

std::vector<TransitionTriple> Env::enumerate(std::size_t state_cap) const {
  std::vector<TransitionTriple> out;
  StateIndex seen;
  std::deque<State> frontier;
  for (State s : start_support()) {
    if (seen.find(s)) continue;
    seen.insert(s);
    frontier.push_back(s);
  }
  std::vector<ActionId> acts;
  while (!frontier.empty()) {
    const State s = frontier.front();
    frontier.pop_front();
    actions(s, acts);
    for (ActionId a : acts) {
      const State next = step(s, a).next;
      out.push_back({s, a, next});
      if (!seen.find(next)) {
        if (seen.size() >= state_cap)
          throw std::runtime_error(name() + ": state enumeration exceeded the cap of " +
                                   std::to_string(state_cap) + " states");
        seen.insert(next);
        frontier.push_back(next);
      }
    }
  }
  return out;
}

TransitionGraph extract_transition_graph(const Env& env, std::size_t state_cap) {
  TransitionGraph tg;
  std::vector<WeightedEdge> edges;
  for (State s : env.start_support()) tg.index.insert(s);
  // enumerate() visits states in the same breadth-first order we index them in
  for (const auto& t : env.enumerate(state_cap)) {
    const NodeId u = tg.index.insert(t.from);
    const NodeId v = tg.index.insert(t.to);
    if (u != v) edges.push_back({u, v, 1.0});
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const WeightedEdge& a, const WeightedEdge& b) {
                            return a.src == b.src && a.dst == b.dst;
                          }),
              edges.end());
  tg.graph = WeightedDigraph::from_edges(tg.index.size(), edges);
  std::vector<std::string> labels;
  labels.reserve(tg.index.size());
  for (State s : tg.index.states()) labels.push_back(env.describe(s));
  tg.graph.set_labels(std::move(labels));
  return tg;
}

// ---------------------------------------------------------------------------

GridLayout GridLayout::parse(std::string_view text) {
  GridLayout g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw ConfigError("empty grid layout");
  g.rows_ = rows.size();
  g.cols_ = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != g.cols_) throw ConfigError("grid layout is not rectangular");
    for (char ch : row) {
      switch (ch) {
        case '#': case '.': case 'S': case 'G': case 'E':
          g.cells_.push_back(static_cast<Cell>(ch));
          break;
        default:
          throw ConfigError(std::string("unknown layout character '") + ch + "'");
      }
    }
  }
  for (std::size_t i = 0; i < g.cells_.size(); ++i) {
    if (g.cells_[i] == Cell::start) g.starts_.push_back(i);
    if (g.cells_[i] == Cell::goal) g.goals_.push_back(i);
  }
  if (g.starts_.empty() || g.goals_.empty())
    throw ConfigError("layout needs at least one start (S) and one goal (G) cell");
  return g;
}

GridLayout GridLayout::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read layout " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::size_t GridLayout::floor_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](Cell c) { return c != Cell::wall; }));
}

std::size_t GridLayout::elevator_cell() const {
  auto it = std::find(cells_.begin(), cells_.end(), Cell::elevator);
  if (it == cells_.end()) throw ConfigError("layout has no elevator cell (E)");
  return static_cast<std::size_t>(it - cells_.begin());
}

std::size_t GridLayout::move(std::size_t cell, ActionId a) const {
  const std::size_t r = cell / cols_, c = cell % cols_;
  std::size_t nr = r, nc = c;
  switch (a) {
    case kNorth: if (r > 0) nr = r - 1; break;
    case kSouth: if (r + 1 < rows_) nr = r + 1; break;
    case kEast: if (c + 1 < cols_) nc = c + 1; break;
    case kWest: if (c > 0) nc = c - 1; break;
    default: return cell;
  }
  const std::size_t next = nr * cols_ + nc;
  return is_wall(next) ? cell : next;
}

std::string GridLayout::cell_name(std::size_t cell) const {
  return "(" + std::to_string(cell / cols_) + "," + std::to_string(cell % cols_) + ")";
}

GridWorld::GridWorld(GridLayout layout, std::size_t start, std::size_t goal, std::string name)
    : layout_(std::move(layout)), start_(start), goal_(goal), name_(std::move(name)) {
  if (start_ >= layout_.cell_count() || layout_.is_wall(start_))
    throw ConfigError("start cell is a wall");
  if (goal_ >= layout_.cell_count() || layout_.is_wall(goal_))
    throw ConfigError("goal cell is a wall");
}

GridWorld GridWorld::with_random_endpoints(GridLayout layout, Rng& rng, std::string name) {
  const auto start = layout.start_cells()[uniform_index(rng, layout.start_cells().size())];
  const auto goal = layout.goal_cells()[uniform_index(rng, layout.goal_cells().size())];
  return GridWorld(std::move(layout), start, goal, std::move(name));
}

void GridWorld::actions(State, std::vector<ActionId>& out) const { out.assign({0, 1, 2, 3}); }

StepResult GridWorld::step(State s, ActionId a) const {
  const State next = layout_.move(s, a);
  const bool goal = next == goal_;
  return {next, kStepReward + (goal ? kGoalReward : 0.0), goal};
}

// ---------------------------------------------------------------------------

MultiFloorOffice::MultiFloorOffice(std::size_t floors, GridLayout layout, std::size_t start,
                                   std::size_t goal_floor, std::size_t goal)
    : floors_(floors), layout_(std::move(layout)) {
  if (floors_ < 1) throw ConfigError("office needs at least one floor");
  elevator_ = layout_.elevator_cell();
  if (layout_.is_wall(start) || layout_.is_wall(goal)) throw ConfigError("start or goal is a wall");
  if (goal_floor >= floors_) throw ConfigError("goal floor out of range");
  start_ = encode(0, start);
  goal_ = encode(goal_floor, goal);
}

MultiFloorOffice MultiFloorOffice::with_random_endpoints(std::size_t floors, GridLayout layout,
                                                         Rng& rng) {
  const auto start = layout.start_cells()[uniform_index(rng, layout.start_cells().size())];
  const auto goal = layout.goal_cells()[uniform_index(rng, layout.goal_cells().size())];
  return MultiFloorOffice(floors, std::move(layout), start, floors - 1, goal);
}

void MultiFloorOffice::actions(State s, std::vector<ActionId>& out) const {
  out.assign({0, 1, 2, 3});
  if (s % layout_.cell_count() == elevator_) {
    out.push_back(kUp);
    out.push_back(kDown);
  }
}

StepResult MultiFloorOffice::step(State s, ActionId a) const {
  const std::size_t floor = s / layout_.cell_count();
  const std::size_t cell = s % layout_.cell_count();
  State next = s;
  if (a < 4) {
    next = encode(floor, layout_.move(cell, a));
  } else if (cell == elevator_) {
    if (a == kUp && floor + 1 < floors_) next = encode(floor + 1, cell);
    if (a == kDown && floor > 0) next = encode(floor - 1, cell);
  }
  const bool goal = next == goal_;
  return {next, kStepReward + (goal ? kGoalReward : 0.0), goal};
}

std::string MultiFloorOffice::describe(State s) const {
  return "f" + std::to_string(s / layout_.cell_count()) + layout_.cell_name(s % layout_.cell_count());
}

// ---------------------------------------------------------------------------

std::size_t Taxi::move(std::size_t cell, ActionId a) {
  const std::size_t r = cell / kSize, c = cell % kSize;
  // wall to the east of (row, col)
  auto wall_east = [](std::size_t row, std::size_t col) {
    return ((row == 0 || row == 1) && col == 1) || ((row == 3 || row == 4) && (col == 0 || col == 2));
  };
  switch (a) {
    case kNorth: return r > 0 ? cell - kSize : cell;
    case kSouth: return r + 1 < kSize ? cell + kSize : cell;
    case kEast: return (c + 1 < kSize && !wall_east(r, c)) ? cell + 1 : cell;
    case kWest: return (c > 0 && !wall_east(r, c - 1)) ? cell - 1 : cell;
    default: return cell;
  }
}

void Taxi::actions(State, std::vector<ActionId>& out) const { out.assign({0, 1, 2, 3, 4, 5}); }

StepResult Taxi::step(State s, ActionId a) const {
  const std::size_t cell = taxi_cell(s), pass = passenger(s), dest = destination(s);
  if (pass == kDelivered) return {s, kStepReward, true};
  if (a < 4) return {encode(move(cell, a), pass, dest), kStepReward, false};
  if (a == kPickUp && pass < 4 && cell == kLandmarks[pass])
    return {encode(cell, kInTaxi, dest), kStepReward, false};
  if (a == kPutDown && pass == kInTaxi && cell == kLandmarks[dest])
    return {encode(cell, kDelivered, dest), kStepReward + kGoalReward, true};
  return {s, kStepReward, false};
}

std::vector<State> Taxi::start_support() const {
  std::vector<State> out;
  for (std::size_t dest = 0; dest < 4; ++dest)
    for (std::size_t pass = 0; pass < 4; ++pass)
      if (pass != dest)
        for (std::size_t cell = 0; cell < kSize * kSize; ++cell) out.push_back(encode(cell, pass, dest));
  return out;
}

State Taxi::reset(Rng& rng) const {
  const std::size_t cell = uniform_index(rng, kSize * kSize);
  const std::size_t pass = uniform_index(rng, 4);
  std::size_t dest = uniform_index(rng, 3);
  if (dest >= pass) ++dest;
  return encode(cell, pass, dest);
}

std::string Taxi::describe(State s) const {
  static constexpr const char* kNames[] = {"R", "G", "Y", "B", "taxi", "delivered"};
  return "taxi" + std::to_string(taxi_cell(s)) + "/p:" + kNames[passenger(s)] +
         "/d:" + kNames[destination(s)];
}

// ---------------------------------------------------------------------------

Hanoi::Hanoi(std::size_t discs) : discs_(discs), goal_(0) {
  if (discs_ < 1 || discs_ > 20) throw ConfigError("disc count must be in [1, 20]");
  State p = 1;
  for (std::size_t d = 0; d < discs_; ++d, p *= 3) goal_ += 2 * p;
}

std::pair<std::size_t, std::size_t> Hanoi::action_pair(ActionId a) {
  static constexpr std::pair<std::size_t, std::size_t> kPairs[] = {{0, 1}, {0, 2}, {1, 0},
                                                                   {1, 2}, {2, 0}, {2, 1}};
  return kPairs[a];
}

std::size_t Hanoi::top_disc(State s, std::size_t pole) const {
  for (std::size_t d = 0; d < discs_; ++d, s /= 3)
    if (s % 3 == pole) return d;
  return discs_;
}

void Hanoi::actions(State s, std::vector<ActionId>& out) const {
  out.clear();
  for (ActionId a = 0; a < 6; ++a) {
    const auto [from, to] = action_pair(a);
    const auto moving = top_disc(s, from);
    if (moving < discs_ && moving < top_disc(s, to)) out.push_back(a);
  }
}

StepResult Hanoi::step(State s, ActionId a) const {
  const auto [from, to] = action_pair(a);
  const auto moving = top_disc(s, from);
  State next = s;
  if (moving < discs_ && moving < top_disc(s, to)) {
    State p = 1;
    for (std::size_t d = 0; d < moving; ++d) p *= 3;
    next = s - from * p + to * p;
  }
  const bool goal = next == goal_;
  return {next, kStepReward + (goal ? kGoalReward : 0.0), goal};
}

std::string Hanoi::describe(State s) const {
  std::string out;
  for (std::size_t d = 0; d < discs_; ++d, s /= 3) out += static_cast<char>('0' + s % 3);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool inside_polygon(const std::vector<Vec2>& poly, Vec2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

Vec2 parse_point(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("pinball points must be [x, y] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

bool PinballGeometry::collision_free(Vec2 p) const {
  const double r = ball_radius;
  if (p.x < r || p.x > 1.0 - r || p.y < r || p.y > 1.0 - r) return false;
  for (const auto& poly : obstacles) {
    if (inside_polygon(poly, p)) return false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
      if (segment_distance(p, poly[j], poly[i]) < r) return false;
  }
  return true;
}

PinballGeometry PinballGeometry::parse(std::string_view json_text) {
  PinballGeometry g;
  try {
    const auto j = nlohmann::json::parse(json_text);
    g.ball_radius = j.value("ball_radius", g.ball_radius);
    if (j.contains("start")) g.start = parse_point(j["start"]);
    if (j.contains("goal")) g.goal = parse_point(j["goal"]);
    for (const auto& poly : j.at("obstacles")) {
      std::vector<Vec2> pts;
      for (const auto& p : poly) pts.push_back(parse_point(p));
      if (pts.size() < 3) throw ConfigError("pinball obstacles need at least 3 vertices");
      g.obstacles.push_back(std::move(pts));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid pinball geometry: ") + e.what());
  }
  if (!(g.ball_radius > 0.0)) throw ConfigError("ball radius must be positive");
  if (!g.collision_free(g.start) || !g.collision_free(g.goal))
    throw ConfigError("pinball start and goal must be collision-free");
  return g;
}

PinballGeometry PinballGeometry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read pinball geometry " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

PointCloud sample_pinball_states(const PinballGeometry& geom, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("need at least one sample");
  Rng rng(seed);
  PointCloud out;
  out.dim = 2;
  out.coords.reserve(2 * n);
  std::size_t attempts = 0;
  while (out.size() < n) {
    ++attempts;
    const Vec2 p{uniform01(rng), uniform01(rng)};
    if (geom.collision_free(p)) {
      const double xy[2] = {p.x, p.y};
      out.push_back(xy);
    }
    if (attempts >= 1000 && out.size() * 100 < attempts)
      throw std::runtime_error("pinball sampling acceptance rate below 1%; geometry is degenerate");
  }
  return out;
}

}  // namespace lsh
