#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "evac/agent.hpp"
#include "evac/building.hpp"
#include "evac/flowfield.hpp"
#include "evac/forces.hpp"
#include "evac/metrics.hpp"

namespace evac {

inline constexpr int kBuildingExit = -1;

enum class RegionKind : std::uint8_t { Floor, Staircase };

/// One simulation plane: a floor or an unfolded staircase. Agents reaching the
/// departure band move to `next` (or leave the building).
struct Region {
  RegionKind kind = RegionKind::Floor;
  int index = 0;
  CellGrid grid;
  Band departure;
  std::optional<Band> arrival;
  int next = kBuildingExit;
  double speed_factor = 1.0;
  FlowField field;
  WallMap walls;
};

struct WorldConfig {
  ForceParams forces;
  int workers = 1;
  int visibility_radius = kDefaultVisibilityRadius;
  /// Desired speed multiplier inside staircases.
  double stair_speed_factor = 1.0;
  /// Standard deviation (N, per axis) of a random force redrawn every step
  /// for every active agent. Zero disables it.
  double fluctuation = 0.0;
  /// Replaces the computed field on every floor (same dimensions required).
  std::optional<FlowField> floor_field_override;
};

/// Regions for every floor and staircase. Floor n is region n; staircase k is
/// region floor_count + k and feeds floor k.
std::vector<Region> make_regions(const Building& building, const WorldConfig& config);
/// A lone floor whose departure band is the building exit.
std::vector<Region> make_regions(const FloorPlan& floor, const WorldConfig& config);

enum AnomalyFlag : std::uint8_t {
  kFieldOnObstacle = 1u << 0,
  kCoincidentAgents = 1u << 1,
  kInsideObstacle = 1u << 2,
};

struct AgentForces {
  Vec2 driving;
  Vec2 agents;
  Vec2 walls;
  /// Sum of the magnitudes of every agent and wall contribution.
  double load = 0.0;
  std::uint8_t flags = 0;

  Vec2 repulsive() const { return agents + walls; }
  Vec2 total() const { return driving + agents + walls; }
};

/// Rigid map gluing a region's departure band to the next region's arrival
/// band. Lateral offsets are measured from the right-hand edge of each band
/// for a walker passing through; the inner edge of the departure cells meets
/// the outer edge of the arrival cells.
struct Seam {
  int from = 0;
  int to = 0;
  double cell = 0.0;
  double width = 0.0;  // narrower of the two bands
  Vec2 from_origin;
  Vec2 out_dir;
  Vec2 out_left;
  Vec2 to_origin;
  Vec2 in_dir;
  Vec2 in_left;

  /// Depth past the glued edge, positive on the destination side.
  double depth_from(Vec2 p) const { return dot(p - from_origin, out_dir) + cell; }
  double depth_to(Vec2 q) const { return dot(q - to_origin, in_dir); }
  double lateral_from(Vec2 p) const { return dot(p - from_origin, out_left); }
  double lateral_to(Vec2 q) const { return dot(q - to_origin, in_left); }

  Vec2 forward(Vec2 p) const {
    return to_origin + in_left * lateral_from(p) + in_dir * depth_from(p);
  }
  Vec2 backward(Vec2 q) const {
    return from_origin + out_left * lateral_to(q) + out_dir * (depth_to(q) - cell);
  }
  Vec2 rotate_forward(Vec2 v) const { return in_left * dot(v, out_left) + in_dir * dot(v, out_dir); }
  Vec2 rotate_backward(Vec2 v) const { return out_left * dot(v, in_left) + out_dir * dot(v, in_dir); }

  /// True if the straight line between two points in the destination frame
  /// passes through the opening rather than a wall.
  bool through_opening(Vec2 a, Vec2 b) const;
};

Seam make_seam(const Region& from, const Region& to, int from_index, int to_index);

/// Agent passing from one region to the next, or out of the building.
struct Crossing {
  int agent = 0;
  int from = 0;
  int to = kBuildingExit;
  double time = 0.0;
  double speed = 0.0;
};

/// Uniform bucket grid over active agents, one per region, cell size equal
/// to the interaction cutoff.
class NeighborIndex {
 public:
  void rebuild(std::span<const Agent> agents, std::span<const Region> regions, double cell);

  /// Candidate agent indices around `p` in `region`, ascending.
  void candidates(int region, Vec2 p, std::vector<std::uint32_t>& out) const;

 private:
  struct Grid {
    int nx = 0;
    int ny = 0;
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> entries;
  };
  double cell_ = 1.0;
  std::vector<Grid> grids_;
};

class World {
 public:
  World(std::vector<Region> regions, std::vector<Agent> agents, WorldConfig config,
        std::uint64_t rng_seed = 0);

  double sim_time() const { return time_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  std::span<const Agent> agents() const { return agents_; }
  std::span<const Region> regions() const { return regions_; }
  const WorldConfig& config() const { return config_; }
  const AnomalyCounts& anomalies() const { return anomalies_; }
  std::span<const Crossing> crossings() const { return crossings_; }

  int spawned() const { return static_cast<int>(agents_.size()); }
  int count(AgentStatus status) const;

  /// Per-agent force terms at the current state, indexed like agents().
  /// Inactive agents get zero entries.
  std::vector<AgentForces> evaluate_forces() const;

  /// Semi-implicit Euler update with forces from evaluate_forces() on this
  /// same state plus the configured fluctuation, followed by region transfers
  /// and activation.
  void advance(double dt, std::span<const AgentForces> forces);

  /// evaluate_forces() then advance(); returns the forces used.
  std::vector<AgentForces> step(double dt);

  /// Indices of active agents within the cutoff of agent `i`, ascending, as
  /// the neighbour index finds them. Includes agents across a seam.
  std::vector<std::uint32_t> neighbors(std::size_t i) const;

  /// Agent `j` expressed in the frame of `i`'s region: itself when both share
  /// a region, its image through the seam when the regions are glued and the
  /// line between them passes the opening, nullopt otherwise.
  std::optional<Agent> view_from(std::size_t i, std::size_t j) const;

  std::span<const Seam> seams() const { return seams_; }

 private:
  void evaluate_range(std::size_t begin, std::size_t end, std::span<AgentForces> out) const;
  void gather(std::size_t i, std::vector<std::uint32_t>& scratch,
              std::vector<std::pair<std::uint32_t, Agent>>& out) const;
  void activate();
  bool arrival_blocked(const Agent& candidate, std::size_t self) const;

  std::vector<Region> regions_;
  std::vector<Seam> seams_;
  std::vector<int> outgoing_;                 // seam index per region, -1 if none
  std::vector<std::vector<int>> incoming_;    // seam indices per region
  std::vector<Agent> agents_;
  WorldConfig config_;
  std::uint64_t rng_seed_ = 0;
  double time_ = 0.0;
  std::uint64_t steps_ = 0;
  NeighborIndex index_;
  AnomalyCounts anomalies_;
  std::vector<Crossing> crossings_;
};

/// Moves an agent from `from`'s departure band to `to`'s arrival band through
/// the seam map, keeping its offset from the right-hand edge of the band
/// (clamped so the body fits) and its speed. The new heading is the
/// destination field vector.
Agent transfer_agent(const Agent& agent, const Region& from, const Region& to, int to_region);

struct AgentTemplate {
  AgentParams base;
  double desired_speed_spread = 0.0;  // uniform +/- around base
  double radius_spread = 0.0;

  friend bool operator==(const AgentTemplate&, const AgentTemplate&) = default;
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection-samples `count` non-overlapping agents on the floor's Free cells,
/// clear of walls. Throws PlacementError after 10000 * count consecutive
/// rejections.
std::vector<Agent> spawn_agents(const FloorPlan& floor, int count, std::uint64_t rng_seed,
                                const AgentTemplate& agent_template, int region = 0,
                                int first_id = 0, double start_time = 0.0);

struct RunOptions {
  double dt = 0.01;
  double t_max = 600.0;
  double sample_interval = 0.1;
  ForceMetric metric = ForceMetric::Repulsive;
  /// Called at every sample with the forces behind it.
  std::function<void(const World&, std::span<const AgentForces>, const Sample&)> on_sample;
};

struct RunResult {
  ForceTrace trace;
  bool completed = false;
};

/// Steps until every agent has left or t_max passes, sampling on the way.
RunResult run_until_empty(World& world, const RunOptions& options);

}  // namespace evac
