#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evac/building.hpp"
#include "evac/world.hpp"

namespace evac {

/// Flux continuity at the floor exit / staircase junction: v_s c_s = v_f c_f.
/// Throws std::domain_error unless every input is positive.
double staircase_speed(double v_f, double c_f, double c_s);

/// Time to cover a staircase of length l_s at speed v_s. Throws
/// std::domain_error for v_s <= 0 or l_s < 0.
double staircase_transit_time(double l_s, double v_s);

struct ContinuityInputs {
  double t_f = 0.0;  // floor clear time, s
  double l_s = 0.0;  // staircase length, m
  double c_s = 0.0;  // staircase width, m
  double c_f = 0.0;  // floor exit width, m
  double v_f = 0.0;  // speed at the floor exit, m/s

  friend bool operator==(const ContinuityInputs&, const ContinuityInputs&) = default;
};

struct TimeShift {
  double delta_t = 0.0;  // s, never negative
  double raw = 0.0;      // t_f - t_s before clamping
  double t_s = 0.0;
  double v_s = 0.0;
  bool clamped = false;
  /// c_s < c_f: continuity makes agents faster on the narrower staircase.
  bool narrowing_warning = false;
};

/// Delta t = t_f - l_s c_s / (v_f c_f), clamped at zero.
TimeShift compute_time_shift(const ContinuityInputs& inputs);

enum class ScheduleMode : std::uint8_t { Staggered, Simultaneous };

std::string to_string(ScheduleMode mode);

struct Schedule {
  std::vector<double> floor_start_times;  // floor 0 (nearest the exit) first
  double delta_t = 0.0;
  bool clamped = false;
  ScheduleMode mode = ScheduleMode::Simultaneous;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Staggered: floor n starts at n * delta_t. Simultaneous: all at zero. Throws
/// std::invalid_argument for a negative shift or fewer than two floors.
Schedule build_schedule(double delta_t, int floor_count, ScheduleMode mode, bool clamped = false);

struct CalibrationConfig {
  WorldConfig world;
  AgentTemplate agents;
  double dt = 0.01;
  double t_max = 600.0;
};

struct Calibration {
  double t_f = 0.0;
  double v_f = 0.0;
  int samples = 0;
  bool no_samples = false;  // nobody crossed; v_f is the desired speed
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulates the building's exit floor alone, everyone starting at t = 0.
/// t_f is when the last agent crosses the exit; v_f is the mean crossing speed.
Calibration calibrate_floor(const Building& building, const CalibrationConfig& config,
                            std::uint64_t rng_seed);
Calibration calibrate_floor(const FloorPlan& floor, const CalibrationConfig& config,
                            std::uint64_t rng_seed);
/// Same measurement from a given placement on `floor` (region 0).
Calibration calibrate_floor(const FloorPlan& floor, const CalibrationConfig& config,
                            std::vector<Agent> agents, std::uint64_t rng_seed);

}  // namespace evac
