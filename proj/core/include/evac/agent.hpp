#pragma once

#include <cstdint>
#include <optional>

#include "evac/vec2.hpp"

namespace evac {

/// Physical parameters of one pedestrian. Defaults follow the usual
/// social-force calibration for adults.
struct AgentParams {
  double mass_kg = 80.0;
  double desired_speed = 1.5;    // m/s
  double relaxation_time = 0.5;  // s
  double radius = 0.3;           // m

  bool valid() const {
    return mass_kg > 0.0 && relaxation_time > 0.0 && radius > 0.0 && desired_speed >= 0.0;
  }

  friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

enum class AgentStatus : std::uint8_t {
  Inert,      // waiting for its floor's start time; exerts and feels nothing
  Active,
  Evacuated,  // left the building; exerts and feels nothing
};

struct Agent {
  int id = 0;
  int region = 0;  // floor index, or floor_count + staircase index
  Vec2 position;   // region-local, m
  Vec2 velocity;   // m/s
  AgentParams params;
  double start_time = 0.0;
  std::optional<double> evacuated_at;
  AgentStatus status = AgentStatus::Inert;

  bool active() const { return status == AgentStatus::Active; }

  friend bool operator==(const Agent&, const Agent&) = default;
};

}  // namespace evac
