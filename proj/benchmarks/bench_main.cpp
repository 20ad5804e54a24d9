#include <benchmark/benchmark.h>

#include <evac/experiment.hpp>
#include <evac/flowfield.hpp>
#include <evac/scenario.hpp>
#include <evac/world.hpp>

#include <filesystem>

using namespace evac;

namespace {

Scenario fixture(int per_floor) {
  Scenario s = load_scenario(std::filesystem::path(EVAC_SCENARIO_DIR) / "standard_staircase.scn");
  s.agents.per_floor = per_floor;
  return s;
}

World populated(const Scenario& s, int workers) {
  WorldConfig config = world_config(s);
  config.workers = workers;
  const Building b = build_building(s);
  std::vector<Agent> agents;
  for (int n = 0; n < b.floor_count(); ++n) {
    auto placed = spawn_agents(b.floor(n), b.floor(n).initial_agent_count, floor_seed(s, n),
                               s.agents.agent, n, static_cast<int>(agents.size()));
    agents.insert(agents.end(), placed.begin(), placed.end());
  }
  return World(make_regions(b, config), std::move(agents), config, s.agents.seed);
}

void BM_EvaluateForces(benchmark::State& state) {
  const World w = populated(fixture(static_cast<int>(state.range(0))), 1);
  for (auto _ : state) benchmark::DoNotOptimize(w.evaluate_forces());
  state.SetItemsProcessed(state.iterations() * w.spawned());
}
BENCHMARK(BM_EvaluateForces)->Arg(10)->Arg(25)->Arg(50);

void BM_Step(benchmark::State& state) {
  World w = populated(fixture(50), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(w.step(0.01));
}
BENCHMARK(BM_Step)->Arg(1)->Arg(4);

void BM_FlowField(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CellGrid g(n, n, kDefaultCellSize, CellKind::Free);
  for (int i = 0; i < n; ++i) {
    g.set({i, 0}, CellKind::Obstacle);
    g.set({i, n - 1}, CellKind::Obstacle);
    g.set({0, i}, CellKind::Obstacle);
    g.set({n - 1, i}, CellKind::Obstacle);
  }
  for (int r = 2; r < n - 2; r += 4) {
    for (int c = 2; c < n - 4; ++c) g.set({(r / 4) % 2 ? c + 2 : c, r}, CellKind::Obstacle);
  }
  for (int i = 0; i < 4; ++i) g.set({n - 1, 1 + i}, CellKind::Exit);
  for (auto _ : state) benchmark::DoNotOptimize(compute_flow_field(g));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n) * n);
}
BENCHMARK(BM_FlowField)->Arg(30)->Arg(60)->Arg(120)->Complexity();

}  // namespace

BENCHMARK_MAIN();
