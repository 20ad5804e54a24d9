#pragma once

#include <evac/building.hpp>
#include <evac/flowfield.hpp>
#include <evac/random.hpp>
#include <evac/world.hpp>

#include <string>
#include <vector>

namespace evac::test {

inline CellGrid grid_of(const std::vector<std::string>& rows, double cell = kDefaultCellSize) {
  return CellGrid::from_rows(rows, cell);
}

/// Walled rectangle with a single exit run on the right wall, rows counted
/// from the bottom.
inline CellGrid walled_room(int width, int height, int exit_row, int exit_count = 1) {
  CellGrid g(width, height, kDefaultCellSize, CellKind::Free);
  for (int c = 0; c < width; ++c) {
    g.set({c, 0}, CellKind::Obstacle);
    g.set({c, height - 1}, CellKind::Obstacle);
  }
  for (int r = 0; r < height; ++r) {
    g.set({0, r}, CellKind::Obstacle);
    g.set({width - 1, r}, CellKind::Obstacle);
  }
  for (int i = 0; i < exit_count; ++i) g.set({width - 1, exit_row + i}, CellKind::Exit);
  return g;
}

inline Agent active_agent(int id, Vec2 position, Vec2 velocity = {}, int region = 0) {
  Agent a;
  a.id = id;
  a.region = region;
  a.position = position;
  a.velocity = velocity;
  a.status = AgentStatus::Active;
  return a;
}

/// Square map with `density` obstacles, a closed border and a four-cell exit
/// run at a random place on the border.
inline CellGrid random_map(std::uint64_t seed, int size = 30, double density = 0.2) {
  Rng rng(seed);
  CellGrid g(size, size, kDefaultCellSize, CellKind::Free);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const Cell cell{c, r};
      if (g.on_boundary(cell) || rng.uniform() < density) g.set(cell, CellKind::Obstacle);
    }
  }
  const auto side = rng.below(4);
  const int first = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(size - 6)));
  for (int i = 0; i < 4; ++i) {
    const int k = first + i;
    const Cell cell = side == 0   ? Cell{0, k}
                      : side == 1 ? Cell{size - 1, k}
                      : side == 2 ? Cell{k, 0}
                                  : Cell{k, size - 1};
    g.set(cell, CellKind::Exit);
  }
  return g;
}

/// Walkable cells from which following the field one aligned neighbour at a
/// time does not reach a departure cell within `walkable` steps.
inline std::vector<Cell> trapped_cells(const CellGrid& grid, const FlowField& field) {
  std::vector<Cell> trapped;
  const std::size_t budget = grid.walkable_count();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Cell start = grid.cell_at(i);
    if (!is_walkable(grid.at(start)) || is_departure(grid.at(start))) continue;
    if (field.distance_at(start) == kUnreachable) continue;
    Cell c = start;
    bool reached = false;
    for (std::size_t step = 0; step < budget; ++step) {
      const auto next = aligned_neighbor(grid, c, field.vector_at(c));
      if (!next) break;
      c = *next;
      if (is_departure(grid.at(c))) {
        reached = true;
        break;
      }
    }
    if (!reached) trapped.push_back(start);
  }
  return trapped;
}

}  // namespace evac::test
