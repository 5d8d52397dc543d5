#include <gtest/gtest.h>

#include <set>

#include "lsh/environment.hpp"
#include "oracles.hpp"

using namespace lsh;

namespace {

std::string data_path(const std::string& rel) { return std::string(LSH_DATA_DIR) + "/" + rel; }

GridWorld rooms() {
  const auto layout = GridLayout::load(data_path("layouts/rooms.txt"));
  return GridWorld(layout, layout.start_cells()[0], layout.goal_cells()[0], "rooms");
}

}  // namespace

TEST(GridLayout, ParsesCandidatesAndWalls) {
  const auto layout = GridLayout::parse("#####\n#S.G#\n#.#.#\n#####\n");
  EXPECT_EQ(layout.rows(), 4u);
  EXPECT_EQ(layout.cols(), 5u);
  EXPECT_EQ(layout.floor_count(), 5u);
  EXPECT_EQ(layout.start_cells(), (std::vector<std::size_t>{6}));
  EXPECT_EQ(layout.goal_cells(), (std::vector<std::size_t>{8}));
  EXPECT_EQ(layout.move(6, kNorth), 6u);
  EXPECT_EQ(layout.move(6, kEast), 7u);
  EXPECT_EQ(layout.move(7, kSouth), 7u);
}

TEST(GridLayout, RejectsMalformedText) {
  EXPECT_THROW(GridLayout::parse(""), ConfigError);
  EXPECT_THROW(GridLayout::parse("###\n#S\n"), ConfigError);
  EXPECT_THROW(GridLayout::parse("#S#\n#x#\n#G#\n"), ConfigError);
  EXPECT_THROW(GridLayout::parse("###\n#.#\n###\n"), ConfigError);
  EXPECT_THROW(GridLayout::load(data_path("layouts/missing.txt")), ConfigError);
}

TEST(GridWorld, RewardsAndTermination) {
  const auto layout = GridLayout::parse("####\n#SG#\n####\n");
  const GridWorld env(layout, 5, 6);
  const auto bump = env.step(5, kWest);
  EXPECT_EQ(bump.next, 5u);
  EXPECT_DOUBLE_EQ(bump.reward, -0.001);
  EXPECT_FALSE(bump.terminal);
  const auto goal = env.step(5, kEast);
  EXPECT_EQ(goal.next, 6u);
  EXPECT_DOUBLE_EQ(goal.reward, 1.0 - 0.001);
  EXPECT_TRUE(goal.terminal);
  EXPECT_TRUE(env.is_terminal(6));
}

TEST(GridWorld, RejectsWallEndpoints) {
  const auto layout = GridLayout::parse("####\n#SG#\n####\n");
  EXPECT_THROW(GridWorld(layout, 0, 6), ConfigError);
  EXPECT_THROW(GridWorld(layout, 5, 3), ConfigError);
}

TEST(GridWorld, RandomEndpointsComeFromCandidates) {
  const auto layout = GridLayout::load(data_path("layouts/rooms.txt"));
  const std::set<std::size_t> starts(layout.start_cells().begin(), layout.start_cells().end());
  const std::set<std::size_t> goals(layout.goal_cells().begin(), layout.goal_cells().end());
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto env = GridWorld::with_random_endpoints(layout, rng);
    EXPECT_TRUE(starts.count(env.start()));
    EXPECT_TRUE(goals.count(env.goal()));
  }
}

TEST(GridWorld, StepsStayOnFloorProperty) {
  const auto env = rooms();
  const auto& layout = env.layout();
  for (std::size_t cell = 0; cell < layout.cell_count(); ++cell) {
    if (layout.is_wall(cell)) continue;
    for (const auto a : env.actions(cell)) {
      const auto next = env.step(cell, a).next;
      EXPECT_FALSE(layout.is_wall(next));
      const auto dr = std::abs(long(next / layout.cols()) - long(cell / layout.cols()));
      const auto dc = std::abs(long(next % layout.cols()) - long(cell % layout.cols()));
      EXPECT_LE(dr + dc, 1);
    }
  }
}

TEST(GridWorld, LayoutsAreConnected) {
  for (const auto* file : {"rooms.txt", "maze.txt", "grid.txt"}) {
    const auto layout = GridLayout::load(data_path(std::string("layouts/") + file));
    const GridWorld env(layout, layout.start_cells()[0], layout.goal_cells()[0]);
    EXPECT_EQ(oracle::reachable(env).size(), layout.floor_count()) << file;
    for (const auto g : layout.goal_cells()) {
      const GridWorld to_g(layout, layout.start_cells()[0], g);
      EXPECT_LT(oracle::distance_to_goal(to_g, to_g.start()), layout.floor_count()) << file;
    }
  }
}

TEST(Office, ElevatorConnectsFloors) {
  const auto layout = GridLayout::load(data_path("layouts/office.txt"));
  const auto e = layout.elevator_cell();
  const MultiFloorOffice env(3, layout, layout.start_cells()[0], 2, layout.goal_cells()[0]);
  EXPECT_EQ(env.actions(env.encode(0, e)).size(), 6u);
  EXPECT_EQ(env.actions(env.encode(0, layout.start_cells()[0])).size(), 4u);
  EXPECT_EQ(env.step(env.encode(0, e), kUp).next, env.encode(1, e));
  EXPECT_EQ(env.step(env.encode(2, e), kUp).next, env.encode(2, e));
  EXPECT_EQ(env.step(env.encode(0, e), kDown).next, env.encode(0, e));
  EXPECT_EQ(env.step(env.encode(1, e), kDown).next, env.encode(0, e));
  EXPECT_EQ(oracle::reachable(env).size(), 3 * layout.floor_count());
  EXPECT_TRUE(env.is_terminal(env.encode(2, layout.goal_cells()[0])));
  EXPECT_FALSE(env.is_terminal(env.encode(0, layout.goal_cells()[0])));
}

TEST(Office, RejectsBadConfiguration) {
  const auto layout = GridLayout::load(data_path("layouts/office.txt"));
  EXPECT_THROW(MultiFloorOffice(0, layout, layout.start_cells()[0], 0, layout.goal_cells()[0]),
               ConfigError);
  EXPECT_THROW(MultiFloorOffice(2, layout, layout.start_cells()[0], 2, layout.goal_cells()[0]),
               ConfigError);
  const auto no_elevator = GridLayout::parse("####\n#SG#\n####\n");
  EXPECT_THROW(MultiFloorOffice(2, no_elevator, 5, 1, 6), ConfigError);
}

TEST(Taxi, PickUpAndDelivery) {
  const Taxi taxi;
  // passenger waiting at R (cell 0), destination B (cell 23)
  const auto s = Taxi::encode(0, 0, 3);
  const auto picked = taxi.step(s, kPickUp);
  EXPECT_EQ(Taxi::passenger(picked.next), Taxi::kInTaxi);
  EXPECT_DOUBLE_EQ(picked.reward, -0.001);
  // pick-up away from the passenger and put-down away from the destination do nothing
  EXPECT_EQ(taxi.step(Taxi::encode(1, 0, 3), kPickUp).next, Taxi::encode(1, 0, 3));
  EXPECT_EQ(taxi.step(Taxi::encode(0, Taxi::kInTaxi, 3), kPutDown).next, Taxi::encode(0, Taxi::kInTaxi, 3));
  const auto done = taxi.step(Taxi::encode(23, Taxi::kInTaxi, 3), kPutDown);
  EXPECT_TRUE(done.terminal);
  EXPECT_DOUBLE_EQ(done.reward, 1.0 - 0.001);
  EXPECT_EQ(Taxi::passenger(done.next), Taxi::kDelivered);
  // delivered is absorbing
  for (ActionId a = 0; a < 6; ++a) EXPECT_EQ(taxi.step(done.next, a).next, done.next);
}

TEST(Taxi, InternalWalls) {
  EXPECT_EQ(Taxi::move(1, kEast), 1u);   // (0,1) | (0,2)
  EXPECT_EQ(Taxi::move(2, kWest), 2u);
  EXPECT_EQ(Taxi::move(11, kEast), 12u);  // row 2 is open
  EXPECT_EQ(Taxi::move(15, kEast), 15u);  // (3,0) | (3,1)
  EXPECT_EQ(Taxi::move(22, kEast), 22u);  // (4,2) | (4,3)
  EXPECT_EQ(Taxi::move(23, kWest), 23u);
  EXPECT_EQ(Taxi::move(0, kNorth), 0u);
  EXPECT_EQ(Taxi::move(24, kSouth), 24u);
}

TEST(Taxi, ResetCoversStartSupport) {
  const Taxi taxi;
  const auto support = taxi.start_support();
  EXPECT_EQ(support.size(), 25u * 12u);
  const std::set<State> allowed(support.begin(), support.end());
  Rng rng(6);
  std::set<State> seen;
  for (int i = 0; i < 20000; ++i) {
    const auto s = taxi.reset(rng);
    ASSERT_TRUE(allowed.count(s));
    seen.insert(s);
  }
  EXPECT_EQ(seen.size(), allowed.size());
}

TEST(Hanoi, LegalMovesOnly) {
  const Hanoi hanoi(3);
  // all discs on pole 0: only the smallest disc can move
  EXPECT_EQ(hanoi.actions(0).size(), 2u);
  const auto moved = hanoi.step(0, 0).next;  // 0 -> 1
  EXPECT_EQ(hanoi.describe(moved), "100");
  // disc 1 cannot land on disc 0
  EXPECT_EQ(hanoi.step(moved, 0).next, moved);
  EXPECT_EQ(hanoi.top_disc(moved, 2), 3u);
}

TEST(Hanoi, OptimalSolutionLength) {
  for (std::size_t n = 1; n <= 5; ++n) {
    const Hanoi hanoi(n);
    EXPECT_EQ(oracle::distance_to_goal(hanoi, 0), (std::size_t{1} << n) - 1) << n;
    EXPECT_EQ(oracle::reachable(hanoi).size(), static_cast<std::size_t>(std::pow(3, n)));
  }
  EXPECT_THROW(Hanoi(0), ConfigError);
}

TEST(Hanoi, GoalOnThirdPole) {
  const Hanoi hanoi(2);
  EXPECT_TRUE(hanoi.is_terminal(8));
  EXPECT_EQ(hanoi.describe(8), "22");
}

TEST(Enumerate, TriplesAreConsistentWithStep) {
  const Taxi taxi;
  const Hanoi hanoi(4);
  const auto office_layout = GridLayout::load(data_path("layouts/office.txt"));
  const MultiFloorOffice office(2, office_layout, office_layout.start_cells()[0], 1,
                                office_layout.goal_cells()[0]);
  for (const Env* env : std::initializer_list<const Env*>{&taxi, &hanoi, &office}) {
    const auto triples = env->enumerate();
    std::set<State> from;
    for (const auto& t : triples) {
      EXPECT_EQ(env->step(t.from, t.action).next, t.to);
      from.insert(t.from);
    }
    EXPECT_EQ(from, oracle::reachable(*env)) << env->name();
  }
}

TEST(Pinball, GeometryAndSampling) {
  const auto geom = PinballGeometry::load(data_path("pinball.json"));
  EXPECT_FALSE(geom.obstacles.empty());
  EXPECT_TRUE(geom.collision_free(geom.start));
  EXPECT_FALSE(geom.collision_free({0.0, 0.5}));
  const auto pts = sample_pinball_states(geom, 500, 3);
  ASSERT_EQ(pts.size(), 500u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto p = pts.point(i);
    EXPECT_TRUE(geom.collision_free({p[0], p[1]}));
  }
  const auto again = sample_pinball_states(geom, 500, 3);
  EXPECT_EQ(pts.coords, again.coords);
}

TEST(Pinball, RejectsDegenerateGeometry) {
  EXPECT_THROW(PinballGeometry::parse("{"), ConfigError);
  EXPECT_THROW(PinballGeometry::parse(R"({"obstacles": [[[0,0],[1,1]]]})"), ConfigError);
  EXPECT_THROW(PinballGeometry::parse(R"({"obstacles": [], "ball_radius": 0})"), ConfigError);
  PinballGeometry full;
  full.obstacles.push_back({{-1, -1}, {2, -1}, {2, 2}, {-1, 2}});
  EXPECT_THROW(sample_pinball_states(full, 10, 0), std::runtime_error);
}
