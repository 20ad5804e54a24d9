#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace evac {

class World;
struct AgentForces;

/// Anomaly kind -> occurrences. Ordered so reports are stable.
using AnomalyCounts = std::map<std::string, std::uint64_t>;

struct Sample {
  double time = 0.0;
  int active = 0;
  double avg_force = 0.0;   // N
  double peak_force = 0.0;  // N
  int evacuated = 0;
  int inert = 0;
  bool empty = false;  // no active agents; avg_force defined as 0

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct ForceTrace {
  double sample_interval = 0.1;
  int spawned = 0;
  std::vector<Sample> samples;

  friend bool operator==(const ForceTrace&, const ForceTrace&) = default;
};

struct RunSummary {
  double total_evacuation_time = 0.0;
  double peak_avg_force = 0.0;
  double time_of_peak = 0.0;
  bool completed = false;
  AnomalyCounts anomaly_counts;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

/// Which force magnitude is averaged per pedestrian.
enum class ForceMetric : std::uint8_t {
  Repulsive,  // |agent-agent + wall terms|
  Total,      // |repulsive plus the driving term|
  Load,       // sum of the magnitudes of every agent and wall contribution
};

/// Statistics over the agents active when `forces` was evaluated. `forces`
/// is indexed like world.agents().
Sample record_sample(const World& world, std::span<const AgentForces> forces,
                     ForceMetric metric = ForceMetric::Repulsive);

/// Sample from precomputed per-agent magnitudes of the active agents.
Sample make_sample(double time, std::span<const double> magnitudes, int evacuated, int inert);

/// Throws std::invalid_argument on an empty trace.
RunSummary summarize(const ForceTrace& trace, AnomalyCounts anomalies = {});

enum class Pattern : std::uint8_t {
  Holds,    // staggered is slower and exerts less force
  Partial,  // exactly one of the two holds
  NotHeld,
};

std::string to_string(Pattern p);

struct Comparison {
  double delta_time = 0.0;       // staggered - simultaneous, s
  double delta_peak_force = 0.0; // staggered - simultaneous, N
  double reduction_ratio = 0.0;  // 1 - staggered/simultaneous peak force
  Pattern pattern = Pattern::NotHeld;
};

/// Throws std::invalid_argument when either run is incomplete.
Comparison compare_runs(const RunSummary& staggered, const RunSummary& simultaneous);

}  // namespace evac
