#include "evac/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "evac/world.hpp"

namespace evac {

Sample make_sample(double time, std::span<const double> magnitudes, int evacuated, int inert) {
  Sample s;
  s.time = time;
  s.active = static_cast<int>(magnitudes.size());
  s.evacuated = evacuated;
  s.inert = inert;
  if (magnitudes.empty()) {
    s.empty = true;
    return s;
  }
  double sum = 0.0;
  for (const double m : magnitudes) {
    sum += m;
    s.peak_force = std::max(s.peak_force, m);
  }
  s.avg_force = sum / static_cast<double>(magnitudes.size());
  return s;
}

Sample record_sample(const World& world, std::span<const AgentForces> forces, ForceMetric metric) {
  const auto agents = world.agents();
  if (forces.size() != agents.size()) {
    throw std::invalid_argument("force vector does not match the agent count");
  }
  std::vector<double> magnitudes;
  int evacuated = 0;
  int inert = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    switch (agents[i].status) {
      case AgentStatus::Active:
        switch (metric) {
          case ForceMetric::Repulsive: magnitudes.push_back(norm(forces[i].repulsive())); break;
          case ForceMetric::Total: magnitudes.push_back(norm(forces[i].total())); break;
          case ForceMetric::Load: magnitudes.push_back(forces[i].load); break;
        }
        break;
      case AgentStatus::Evacuated: ++evacuated; break;
      case AgentStatus::Inert: ++inert; break;
    }
  }
  return make_sample(world.sim_time(), magnitudes, evacuated, inert);
}

RunSummary summarize(const ForceTrace& trace, AnomalyCounts anomalies) {
  if (trace.samples.empty()) {
    throw std::invalid_argument("cannot summarize an empty trace");
  }
  RunSummary s;
  s.anomaly_counts = std::move(anomalies);
  const Sample& last = trace.samples.back();
  s.completed = last.evacuated == trace.spawned;
  s.total_evacuation_time = last.time;
  if (s.completed) {
    for (const Sample& x : trace.samples) {
      if (x.evacuated == trace.spawned) {
        s.total_evacuation_time = x.time;
        break;
      }
    }
  }
  // First sample wins a tie.
  s.peak_avg_force = trace.samples.front().avg_force;
  s.time_of_peak = trace.samples.front().time;
  for (const Sample& x : trace.samples) {
    if (x.avg_force > s.peak_avg_force) {
      s.peak_avg_force = x.avg_force;
      s.time_of_peak = x.time;
    }
  }
  return s;
}

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::Holds: return "holds";
    case Pattern::Partial: return "partial";
    case Pattern::NotHeld: return "not-held";
  }
  return "unknown";
}

Comparison compare_runs(const RunSummary& staggered, const RunSummary& simultaneous) {
  if (!staggered.completed || !simultaneous.completed) {
    throw std::invalid_argument("comparison needs two completed runs");
  }
  Comparison c;
  c.delta_time = staggered.total_evacuation_time - simultaneous.total_evacuation_time;
  c.delta_peak_force = staggered.peak_avg_force - simultaneous.peak_avg_force;
  c.reduction_ratio = simultaneous.peak_avg_force > 0.0
                          ? 1.0 - staggered.peak_avg_force / simultaneous.peak_avg_force
                          : 0.0;
  const bool slower = c.delta_time > 0.0;
  const bool gentler = c.delta_peak_force < 0.0;
  c.pattern = (slower && gentler) ? Pattern::Holds
              : (slower || gentler) ? Pattern::Partial
                                    : Pattern::NotHeld;
  return c;
}

}  // namespace evac
