#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evac/building.hpp"
#include "evac/forces.hpp"
#include "evac/metrics.hpp"
#include "evac/world.hpp"

namespace evac {

struct BuildingSpec {
  double cell_size_m = kDefaultCellSize;
  /// Generated rectangular floor; ignored when `layout` is non-empty.
  FloorSpec floor;
  /// Explicit floor grid, rows top-down ('#', '.', 'E', '>', '<').
  std::vector<std::string> layout;
  StaircaseKind stair_kind = StaircaseKind::Standard;
  double stair_length_m = 8.0;
  double stair_width_m = 1.2;
  int floor_count = 2;
  BuildingMode mode = BuildingMode::UnitCell;

  friend bool operator==(const BuildingSpec&, const BuildingSpec&) = default;
};

struct AgentSpec {
  int per_floor = 50;
  std::uint64_t seed = 1;
  AgentTemplate agent;
  double stair_speed_factor = 1.0;

  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

struct DynamicsSpec {
  double dt = 0.01;
  double t_max = 600.0;
  double sample_interval = 0.1;
  int workers = 1;
  int visibility_radius = kDefaultVisibilityRadius;
  double fluctuation = 0.0;
  ForceParams forces;
  ForceMetric metric = ForceMetric::Repulsive;

  friend bool operator==(const DynamicsSpec&, const DynamicsSpec&) = default;
};

enum class ModeSelection : std::uint8_t { Staggered, Simultaneous, Both };

std::string to_string(ModeSelection m);
ModeSelection mode_selection_from_string(const std::string& s);

struct Scenario {
  std::string name;
  BuildingSpec building;
  AgentSpec agents;
  DynamicsSpec dynamics;
  ModeSelection modes = ModeSelection::Both;
  std::string output_dir = "out";
  /// Flow-field CSV (x,y,vx,vy[,distance]) replacing the computed floor field.
  std::string field_override;
  /// Directory relative paths in the file resolve against; not serialized.
  std::filesystem::path base_dir;

  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.name == b.name && a.building == b.building && a.agents == b.agents &&
           a.dynamics == b.dynamics && a.modes == b.modes && a.output_dir == b.output_dir &&
           a.field_override == b.field_override;
  }
};

/// Malformed file: syntax, types, unknown keys, out-of-range values. The
/// message names the offending field or line.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed file describing an invalid building.
class ScenarioValidationError : public std::runtime_error {
 public:
  explicit ScenarioValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Parses without building-level validation.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
std::string serialize_scenario(const Scenario& scenario);

/// Reads, parses, defaults and validates. Throws ScenarioError,
/// ScenarioValidationError, or std::system_error on I/O failure.
Scenario load_scenario(const std::filesystem::path& path);

/// The building the scenario describes (FullStack when requested).
Building build_building(const Scenario& scenario);

std::vector<Diagnostic> validate(const Scenario& scenario);

}  // namespace evac
