#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evac/agent.hpp"
#include "evac/building.hpp"
#include "evac/vec2.hpp"

namespace evac {

/// Repulsion constants shared by agent-agent and agent-wall terms.
struct ForceParams {
  double social_strength = 2000.0;    // A, N
  double social_range = 0.08;         // B, m
  double body_stiffness = 1.2e5;      // k, N/m
  double sliding_friction = 2.4e5;    // kappa, kg/(m s)
  double interaction_cutoff = 2.0;    // m

  bool valid(double max_radius) const {
    return social_strength > 0.0 && social_range > 0.0 && body_stiffness > 0.0 &&
           sliding_friction > 0.0 &&
           interaction_cutoff >= 2.0 * max_radius + 5.0 * social_range;
  }

  friend bool operator==(const ForceParams&, const ForceParams&) = default;
};

/// m (v0 e - v) / tau. A zero direction leaves pure damping.
Vec2 driving_force(const Agent& agent, Vec2 direction, double desired_speed);
inline Vec2 driving_force(const Agent& agent, Vec2 direction) {
  return driving_force(agent, direction, agent.params.desired_speed);
}

/// Force on i from j: social exponential plus body compression along the
/// normal, sliding friction along the tangent. Exactly antisymmetric in (i, j).
/// Centres closer than 1e-6 m use a direction derived from the id pair and
/// set *coincident.
Vec2 agent_agent_force(const Agent& i, const Agent& j, const ForceParams& params,
                       bool* coincident = nullptr);

/// Maximal straight run of obstacle edges facing walkable space.
struct WallSegment {
  Vec2 a;
  Vec2 b;
  Vec2 normal;  // into the walkable side
};

/// Wall segments of a grid, bucketed per cell by proximity.
class WallMap {
 public:
  WallMap() = default;
  WallMap(const CellGrid& grid, double cutoff);

  std::span<const WallSegment> segments() const { return segments_; }
  /// Segments that may lie within the cutoff of a point in `cell`.
  std::span<const std::uint32_t> near(Cell cell) const;
  const CellGrid& grid() const { return grid_; }

 private:
  CellGrid grid_;
  std::vector<WallSegment> segments_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> buckets_;
};

/// Sum of the wall repulsion from every wall segment within the cutoff; a
/// nearest point shared by two segments (a convex corner) counts once. An
/// agent centred inside an obstacle cell is pushed out through the closest
/// face with contact depth equal to its radius, and *inside_obstacle is set.
/// The magnitudes of the individual contributions are added to *load.
Vec2 agent_wall_force(const Agent& agent, const WallMap& walls, const ForceParams& params,
                      bool* inside_obstacle = nullptr, double* load = nullptr);

}  // namespace evac
