#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "evac/flowfield.hpp"
#include "evac/metrics.hpp"
#include "evac/scenario.hpp"
#include "evac/scheduler.hpp"
#include "evac/world.hpp"

namespace evac {

struct ModeRun {
  Schedule schedule;
  ForceTrace trace;
  RunSummary summary;
};

struct ExperimentResult {
  std::optional<Calibration> calibration;
  std::optional<TimeShift> shift;
  std::optional<ModeRun> staggered;
  std::optional<ModeRun> simultaneous;
  std::optional<Comparison> comparison;
  std::string comparison_note;  // why no comparison was produced

  /// Every requested run finished before t_max.
  bool complete() const;
};

/// World configuration for a scenario, loading the override field if set.
WorldConfig world_config(const Scenario& scenario);

/// Seed used to place floor n's agents; shared by every mode.
std::uint64_t floor_seed(const Scenario& scenario, int floor);

/// Runs the building under `schedule`; everything is derived from the
/// scenario and is repeatable.
ModeRun run_schedule(const Scenario& scenario, const Building& building, const Schedule& schedule,
                     const std::function<void(const World&, std::span<const AgentForces>,
                                              const Sample&)>& on_sample = {});

/// Staggered: calibrate the exit floor, derive the time shift, build the
/// schedule, run. Simultaneous: all floors start at zero. Throws
/// CalibrationError if calibration cannot finish.
ExperimentResult run_experiment(const Scenario& scenario, ModeSelection modes);

/// `time_s,active,avg_force_N,peak_force_N,evacuated`
void export_csv(const ForceTrace& trace, const std::filesystem::path& path);
/// `x,y,vx,vy,distance`, one row per cell, x = column and y = row.
void export_field(const FlowField& field, const std::filesystem::path& path);
/// Reads the export_field format (distance column optional) onto `grid`.
/// Obstacle cells are forced to zero; missing distances are recomputed.
FlowField load_field(const std::filesystem::path& path, const CellGrid& grid);

/// staggered.csv / simultaneous.csv / comparison.csv / report.json in `dir`.
void write_outputs(const ExperimentResult& result, const Scenario& scenario,
                   const std::filesystem::path& dir);

/// gnuplot script plotting average force against time for whichever run
/// CSVs sit next to it.
std::string gnuplot_script(const std::string& title);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evac
