#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "evac/building.hpp"
#include "evac/vec2.hpp"

namespace evac {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline constexpr int kDefaultVisibilityRadius = 20;
/// Minimum distance, in cells, between a target ray and a convex obstacle
/// corner.
inline constexpr double kDefaultCornerClearance = 1.0;

/// Desired-direction field over one grid. Unit vectors on reachable walkable
/// cells, zero on obstacles, unreachable cells and departure cells.
struct FlowField {
  int width = 0;
  int height = 0;
  double cell_size = 0.0;
  std::vector<Vec2> vectors;
  /// Shortest-path distance to the nearest departure cell, in cells.
  std::vector<double> distance;
  std::vector<std::uint8_t> obstacle;

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(c.col);
  }
  Vec2 vector_at(Cell c) const { return vectors[index(c)]; }
  double distance_at(Cell c) const { return distance[index(c)]; }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

/// True iff the segment between the two cell centres touches no obstacle
/// cell. Touching a cell corner counts as touching the cell.
bool ray_cast(const CellGrid& grid, Cell from, Cell to);

/// Octile shortest-path distance (straight 1, diagonal sqrt(2)) from every cell
/// to the nearest Exit/StairEntry cell. Diagonal moves may not cut an obstacle
/// corner. kUnreachable on obstacles and sealed-off cells.
std::vector<double> compute_distance_field(const CellGrid& grid);

/// Each reachable walkable cell points at the visible cell (within
/// `visibility_radius` cells) of least distance, nearest first on ties. A
/// target only counts as visible if the ray also stays `corner_clearance`
/// cells away from every convex obstacle corner, other than the jambs of a
/// departure cell it ends on. If no visible cell is
/// strictly closer, or following that direction one cell would not descend,
/// the steepest-descent neighbour is used instead.
FlowField compute_flow_field(const CellGrid& grid, int visibility_radius = kDefaultVisibilityRadius,
                             double corner_clearance = kDefaultCornerClearance);

/// Grid vertices (in cell units) where exactly one of the four surrounding
/// cells is an obstacle; outside the grid counts as obstacle.
std::vector<Vec2> convex_corners(const CellGrid& grid);

/// The neighbour a walker following `direction` from `cell` steps into: the
/// walkable, non-corner-cutting 8-neighbour best aligned with the direction,
/// ties broken in E, N, W, S, NE, NW, SW, SE order.
std::optional<Cell> aligned_neighbor(const CellGrid& grid, Cell cell, Vec2 direction);

struct FieldSample {
  Vec2 direction;
  bool anomaly = false;  // position on an obstacle or outside the grid
};

/// Vector of the cell containing `position`. No interpolation.
FieldSample field_lookup(const FlowField& field, Vec2 position);

}  // namespace evac
