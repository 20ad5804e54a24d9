#include "evac/scheduler.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace evac {

double staircase_speed(double v_f, double c_f, double c_s) {
  if (!(v_f > 0.0) || !(c_f > 0.0) || !(c_s > 0.0)) {
    throw std::domain_error(
        fmt::format("staircase speed needs positive v_f, c_f, c_s (got {}, {}, {})", v_f, c_f, c_s));
  }
  return v_f * c_f / c_s;
}

double staircase_transit_time(double l_s, double v_s) {
  if (!(v_s > 0.0)) {
    throw std::domain_error(fmt::format("staircase speed must be positive (got {})", v_s));
  }
  if (!(l_s >= 0.0)) {
    throw std::domain_error(fmt::format("staircase length must be nonnegative (got {})", l_s));
  }
  return l_s / v_s;
}

TimeShift compute_time_shift(const ContinuityInputs& in) {
  if (!(in.l_s > 0.0)) {
    throw std::domain_error(fmt::format("staircase length must be positive (got {})", in.l_s));
  }
  if (!(in.t_f >= 0.0)) {
    throw std::domain_error(fmt::format("floor clear time must be nonnegative (got {})", in.t_f));
  }
  TimeShift out;
  out.v_s = staircase_speed(in.v_f, in.c_f, in.c_s);
  out.t_s = staircase_transit_time(in.l_s, out.v_s);
  out.raw = in.t_f - out.t_s;
  out.clamped = out.raw < 0.0;
  out.delta_t = out.clamped ? 0.0 : out.raw;
  out.narrowing_warning = in.c_s < in.c_f;
  return out;
}

std::string to_string(ScheduleMode mode) {
  return mode == ScheduleMode::Staggered ? "staggered" : "simultaneous";
}

Schedule build_schedule(double delta_t, int floor_count, ScheduleMode mode, bool clamped) {
  if (!(delta_t >= 0.0)) {
    throw std::invalid_argument("time shift must be nonnegative");
  }
  if (floor_count < 2) {
    throw std::invalid_argument("schedule needs at least two floors");
  }
  Schedule s;
  s.mode = mode;
  s.delta_t = mode == ScheduleMode::Staggered ? delta_t : 0.0;
  s.clamped = clamped;
  s.floor_start_times.resize(static_cast<std::size_t>(floor_count), 0.0);
  if (mode == ScheduleMode::Staggered) {
    for (int n = 0; n < floor_count; ++n) {
      s.floor_start_times[static_cast<std::size_t>(n)] = n * delta_t;
    }
  }
  return s;
}

Calibration calibrate_floor(const Building& building, const CalibrationConfig& config,
                            std::uint64_t rng_seed) {
  return calibrate_floor(with_departure_kind(building.floor(0), CellKind::Exit), config, rng_seed);
}

Calibration calibrate_floor(const FloorPlan& floor, const CalibrationConfig& config,
                            std::uint64_t rng_seed) {
  return calibrate_floor(
      floor, config,
      spawn_agents(floor, floor.initial_agent_count, rng_seed, config.agents, 0, 0, 0.0), rng_seed);
}

Calibration calibrate_floor(const FloorPlan& floor, const CalibrationConfig& config,
                            std::vector<Agent> agents, std::uint64_t rng_seed) {
  Calibration out;
  if (agents.empty()) {
    out.v_f = config.agents.base.desired_speed;
    out.no_samples = true;
    return out;
  }
  World world(make_regions(floor, config.world), std::move(agents), config.world, rng_seed);
  while (world.count(AgentStatus::Evacuated) < world.spawned()) {
    if (world.sim_time() >= config.t_max) {
      throw CalibrationError(fmt::format(
          "floor calibration incomplete: {} of {} agents left after {} s",
          world.spawned() - world.count(AgentStatus::Evacuated), world.spawned(), config.t_max));
    }
    world.step(config.dt);
  }
  double speed_sum = 0.0;
  for (const Crossing& c : world.crossings()) {
    if (c.to != kBuildingExit) continue;
    out.t_f = std::max(out.t_f, c.time);
    speed_sum += c.speed;
    ++out.samples;
  }
  out.v_f = speed_sum / out.samples;
  return out;
}

}  // namespace evac
