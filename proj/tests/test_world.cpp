#include <gtest/gtest.h>

#include <evac/experiment.hpp>
#include <evac/world.hpp>

#include <cmath>

#include "support.hpp"

using namespace evac;

namespace {

// 9 m x 5.1 m room; 1.2 m exit in the right wall, rows 7..10 (y in [2.1, 3.3]).
FloorPlan big_room() { return floor_from_grid(test::walled_room(30, 17, 7, 4), 0); }

World lone_floor(const FloorPlan& plan, std::vector<Agent> agents, WorldConfig config = {}) {
  return World(make_regions(plan, config), std::move(agents), config);
}

Scenario small_fixture(const char* name, int per_floor) {
  Scenario s = load_scenario(std::string(EVAC_SCENARIO_DIR "/") + name);
  s.agents.per_floor = per_floor;
  return s;
}

World fixture_world(const Scenario& s, int workers, double stagger = 0.0) {
  WorldConfig config = world_config(s);
  config.workers = workers;
  const Building b = build_building(s);
  std::vector<Agent> agents;
  for (int n = 0; n < b.floor_count(); ++n) {
    auto placed = spawn_agents(b.floor(n), b.floor(n).initial_agent_count, floor_seed(s, n),
                               s.agents.agent, n, static_cast<int>(agents.size()), n * stagger);
    agents.insert(agents.end(), placed.begin(), placed.end());
  }
  return World(make_regions(b, config), std::move(agents), config, s.agents.seed);
}

void expect_conserved(const World& w) {
  EXPECT_EQ(w.count(AgentStatus::Active) + w.count(AgentStatus::Inert) +
                w.count(AgentStatus::Evacuated),
            w.spawned());
}

}  // namespace

TEST(Step, NoActiveAgentsOnlyAdvancesTime) {
  World w = lone_floor(big_room(), {});
  w.step(0.01);
  EXPECT_DOUBLE_EQ(w.sim_time(), 0.01);
  EXPECT_EQ(w.spawned(), 0);
}

TEST(Step, RelaxesToDesiredSpeedLikeTheClosedForm) {
  World w = lone_floor(big_room(), {test::active_agent(0, {2.4, 2.55})});
  const double v0 = 1.5, tau = 0.5, dt = 0.01;
  double worst = 0.0;
  for (int k = 1; k * dt <= 5 * tau + 1e-12; ++k) {
    w.step(dt);
    const double t = k * dt;
    const double want = v0 * (1.0 - std::exp(-t / tau));
    worst = std::max(worst, std::abs(norm(w.agents()[0].velocity) - want));
  }
  EXPECT_LT(worst, 0.01 * v0);
  EXPECT_NEAR(norm(w.agents()[0].velocity), v0, 0.01 * v0);
  EXPECT_NEAR(w.agents()[0].velocity.y, 0.0, 1e-12);
}

TEST(Step, OverlappingAgentsWithoutFieldMoveApart) {
  const FloorPlan plan = big_room();
  WorldConfig config;
  FlowField still = compute_flow_field(plan.grid);
  std::fill(still.vectors.begin(), still.vectors.end(), Vec2{});
  config.floor_field_override = still;
  const Vec2 pa{4.0, 2.5}, pb{4.4, 2.7};
  World w = lone_floor(plan, {test::active_agent(0, pa), test::active_agent(1, pb)}, config);
  w.step(0.01);
  const Vec2 n = normalized(pa - pb);
  EXPECT_GT(dot(w.agents()[0].velocity, n), 0.0);
  EXPECT_GT(dot(w.agents()[1].velocity, -n), 0.0);
}

TEST(Step, SpeedIsClampedAtOneAndAHalfDesired) {
  World w = lone_floor(big_room(), {test::active_agent(0, {4.0, 2.5}), test::active_agent(1, {4.05, 2.5})});
  w.step(0.01);
  for (const Agent& a : w.agents()) EXPECT_LE(norm(a.velocity), 1.5 * 1.5 + 1e-12);
  EXPECT_GT(w.anomalies().at("speed_clamped"), 0u);
}

TEST(Step, InertAgentsWakeAtTheirStartTime) {
  Agent a = test::active_agent(0, {2.4, 2.55});
  a.status = AgentStatus::Inert;
  a.start_time = 0.05;
  World w = lone_floor(big_room(), {a});
  EXPECT_EQ(w.count(AgentStatus::Inert), 1);
  for (int k = 0; k < 4; ++k) w.step(0.01);
  EXPECT_EQ(w.agents()[0].position, a.position);
  w.step(0.01);
  EXPECT_EQ(w.count(AgentStatus::Active), 1);
}

TEST(Transfer, KeepsLateralOffsetAndSpeed) {
  const Scenario s = small_fixture("ladder_short.scn", 1);
  const auto regions = make_regions(build_building(s), world_config(s));
  const Region& floor1 = regions[1];
  const int stair = regions[1].next;
  const Region& to = regions[static_cast<std::size_t>(stair)];
  const Seam seam = make_seam(floor1, to, 1, stair);
  // Floor departure band: right wall, rows 1..4, so y in [0.3, 1.5] and the
  // walker's right-hand edge (facing +x) is y = 0.3.
  Agent a = test::active_agent(7, {8.5, 0.3 + 0.4}, {0.9, 0.3}, 1);
  EXPECT_NEAR(seam.lateral_from(a.position), 0.4, 1e-12);
  const Agent b = transfer_agent(a, floor1, to, stair);
  EXPECT_EQ(b.region, stair);
  EXPECT_NEAR(seam.lateral_to(b.position), 0.4, 1e-12);
  // Ladder arrival band: left wall rows 1..4, entered facing +x.
  EXPECT_NEAR(b.position.y, 0.7, 1e-12);
  EXPECT_NEAR(norm(b.velocity), norm(a.velocity), 1e-12);
  const Vec2 heading = field_lookup(to.field, b.position).direction;
  EXPECT_NEAR(dot(normalized(b.velocity), heading), 1.0, 1e-12);
}

TEST(Transfer, OffsetIsClampedSoTheBodyFits) {
  const Scenario s = small_fixture("standard_staircase.scn", 1);
  const auto regions = make_regions(build_building(s), world_config(s));
  const int stair = regions[1].next;
  const Seam seam = make_seam(regions[1], regions[static_cast<std::size_t>(stair)], 1, stair);
  const Agent a = test::active_agent(0, {8.5, 0.31}, {1.0, 0.0}, 1);
  const Agent b = transfer_agent(a, regions[1], regions[static_cast<std::size_t>(stair)], stair);
  EXPECT_NEAR(seam.lateral_to(b.position), 0.3, 1e-12);
}

TEST(Transfer, LastExitEvacuates) {
  World w = lone_floor(big_room(), {test::active_agent(0, {8.35, 2.55}, {1.5, 0.0})});
  for (int k = 0; k < 50 && w.count(AgentStatus::Evacuated) == 0; ++k) w.step(0.01);
  ASSERT_EQ(w.count(AgentStatus::Evacuated), 1);
  ASSERT_TRUE(w.agents()[0].evacuated_at.has_value());
  EXPECT_NEAR(*w.agents()[0].evacuated_at, w.sim_time(), 1e-12);
  const auto forces = w.evaluate_forces();
  EXPECT_EQ(forces[0].total(), Vec2{});
}

TEST(Spawn, ZeroCountIsEmpty) {
  EXPECT_TRUE(spawn_agents(big_room(), 0, 1, AgentTemplate{}).empty());
}

TEST(Spawn, SameSeedSamePlacement) {
  AgentTemplate t;
  t.desired_speed_spread = 0.1;
  const auto a = spawn_agents(big_room(), 40, 99, t);
  const auto b = spawn_agents(big_room(), 40, 99, t);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, spawn_agents(big_room(), 40, 100, t));
}

TEST(Spawn, NoOverlapWithAgentsOrWalls) {
  const FloorPlan plan = big_room();
  AgentTemplate t;
  t.radius_spread = 0.05;
  const auto agents = spawn_agents(plan, 60, 5, t);
  ASSERT_EQ(agents.size(), 60u);
  const WallMap walls(plan.grid, 2.0);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    EXPECT_EQ(plan.grid.at(*plan.grid.locate(agents[i].position)), CellKind::Free);
    for (const WallSegment& s : walls.segments()) {
      const Vec2 ab = s.b - s.a;
      const double u = std::clamp(dot(agents[i].position - s.a, ab) / dot(ab, ab), 0.0, 1.0);
      EXPECT_GT(norm(agents[i].position - (s.a + ab * u)), agents[i].params.radius - 1e-12);
    }
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      EXPECT_GT(norm(agents[i].position - agents[j].position),
                agents[i].params.radius + agents[j].params.radius);
    }
  }
}

TEST(Spawn, OvercrowdingThrows) {
  const FloorPlan plan = floor_from_grid(test::walled_room(6, 6, 2), 0);
  EXPECT_THROW(spawn_agents(plan, 50, 1, AgentTemplate{}), PlacementError);
}

TEST(Run, OneAgentThreeMetresFromExitLeavesWithinTwoToThreeSeconds) {
  // The exit cell starts at x = 8.7 m; the agent walks along its row.
  World w = lone_floor(big_room(), {test::active_agent(0, {8.7 - 3.0, 2.7})});
  const RunResult r = run_until_empty(w, RunOptions{});
  ASSERT_TRUE(r.completed);
  const RunSummary s = summarize(r.trace);
  EXPECT_GE(s.total_evacuation_time, 2.0);
  EXPECT_LE(s.total_evacuation_time, 3.0);
}

TEST(Run, ZeroAgentsCompleteImmediately) {
  World w = lone_floor(big_room(), {});
  const RunResult r = run_until_empty(w, RunOptions{});
  EXPECT_TRUE(r.completed);
  ASSERT_EQ(r.trace.samples.size(), 1u);
  EXPECT_EQ(summarize(r.trace).total_evacuation_time, 0.0);
}

TEST(Run, TimeLimitReportsIncomplete) {
  World w = lone_floor(big_room(), {test::active_agent(0, {1.0, 2.55})});
  RunOptions o;
  o.t_max = 0.5;
  const RunResult r = run_until_empty(w, o);
  EXPECT_FALSE(r.completed);
  EXPECT_FALSE(summarize(r.trace).completed);
}

TEST(Run, IdenticalSeedsGiveIdenticalTraces) {
  const Scenario s = small_fixture("standard_staircase.scn", 15);
  const Building b = build_building(s);
  const Schedule sched = build_schedule(0.0, 2, ScheduleMode::Simultaneous);
  EXPECT_EQ(run_schedule(s, b, sched).trace, run_schedule(s, b, sched).trace);
}

TEST(Determinism, WorkerCountDoesNotChangeTrajectories) {
  Scenario s = small_fixture("helical_staircase.scn", 40);
  World serial = fixture_world(s, 1);
  World parallel = fixture_world(s, 4);
  for (int k = 0; k < 600; ++k) {
    serial.step(0.01);
    parallel.step(0.01);
  }
  ASSERT_EQ(serial.agents().size(), parallel.agents().size());
  for (std::size_t i = 0; i < serial.agents().size(); ++i) {
    EXPECT_EQ(serial.agents()[i], parallel.agents()[i]) << "agent " << i;
  }
  EXPECT_EQ(serial.anomalies(), parallel.anomalies());
}

TEST(Conservation, HoldsEveryStepAcrossTransfers) {
  const Scenario s = small_fixture("ladder_short.scn", 20);
  World w = fixture_world(s, 2, 3.0);
  int transfers = 0;
  for (int k = 0; k < 4000 && w.count(AgentStatus::Evacuated) < w.spawned(); ++k) {
    w.step(0.01);
    expect_conserved(w);
    transfers = static_cast<int>(w.crossings().size());
  }
  EXPECT_GT(transfers, 20);
}

TEST(Neighbors, HashMatchesBruteForceOnAFloor) {
  const FloorPlan plan = big_room();
  Rng rng(17);
  std::vector<Agent> agents;
  for (int i = 0; i < 50; ++i) {
    agents.push_back(test::active_agent(i, {rng.uniform(0.4, 8.6), rng.uniform(0.4, 4.7)},
                                        {rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  }
  const World w = lone_floor(plan, agents);
  const auto forces = w.evaluate_forces();
  const ForceParams p;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    Vec2 brute;
    std::vector<std::uint32_t> near;
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (j == i || norm(agents[j].position - agents[i].position) > p.interaction_cutoff) continue;
      brute += agent_agent_force(agents[i], agents[j], p);
      near.push_back(static_cast<std::uint32_t>(j));
    }
    EXPECT_EQ(forces[i].agents, brute) << "agent " << i;
    EXPECT_EQ(w.neighbors(i), near);
  }
}

TEST(Seams, AgentsSenseEachOtherAcrossAnOpening) {
  const Scenario s = small_fixture("ladder_short.scn", 1);
  const Building b = build_building(s);
  const auto regions = make_regions(b, world_config(s));
  const int stair = regions[1].next;
  // One agent in the doorway of floor 1, one just inside the staircase.
  std::vector<Agent> agents{test::active_agent(0, {8.3, 0.9}, {}, 1),
                            test::active_agent(1, {0.35, 0.9}, {}, stair)};
  const World w(regions, agents, world_config(s));
  const auto ab = w.view_from(0, 1);
  const auto ba = w.view_from(1, 0);
  ASSERT_TRUE(ab && ba);
  EXPECT_NEAR(norm(ab->position - agents[0].position), norm(ba->position - agents[1].position), 1e-12);
  const auto f = w.evaluate_forces();
  EXPECT_LT(f[0].agents.x, 0.0);
  EXPECT_GT(f[1].agents.x, 0.0);
  EXPECT_NEAR(norm(f[0].agents), norm(f[1].agents), 1e-9);
}

TEST(Fluctuation, OffByDefaultAndRepeatableWhenOn) {
  Scenario s = small_fixture("ladder_short.scn", 20);
  s.dynamics.fluctuation = 0.0;
  World a = fixture_world(s, 1);
  World b = fixture_world(s, 1);
  Scenario noisy = s;
  noisy.dynamics.fluctuation = 200.0;
  World c = fixture_world(noisy, 1);
  World d = fixture_world(noisy, 3);
  for (int k = 0; k < 200; ++k) {
    a.step(0.01);
    b.step(0.01);
    c.step(0.01);
    d.step(0.01);
  }
  EXPECT_TRUE(std::equal(a.agents().begin(), a.agents().end(), b.agents().begin()));
  EXPECT_TRUE(std::equal(c.agents().begin(), c.agents().end(), d.agents().begin()));
  EXPECT_FALSE(std::equal(a.agents().begin(), a.agents().end(), c.agents().begin()));
}
