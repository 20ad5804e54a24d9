#include "evac/experiment.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "evac/random.hpp"

namespace evac {

using ordered_json = nlohmann::ordered_json;

bool ExperimentResult::complete() const {
  return (!staggered || staggered->summary.completed) &&
         (!simultaneous || simultaneous->summary.completed);
}

WorldConfig world_config(const Scenario& s) {
  WorldConfig config;
  config.forces = s.dynamics.forces;
  config.workers = s.dynamics.workers;
  config.visibility_radius = s.dynamics.visibility_radius;
  config.stair_speed_factor = s.agents.stair_speed_factor;
  config.fluctuation = s.dynamics.fluctuation;
  if (!s.field_override.empty()) {
    std::filesystem::path p = s.field_override;
    if (p.is_relative()) p = s.base_dir / p;
    config.floor_field_override = load_field(p, build_building(s).floor(0).grid);
  }
  return config;
}

std::uint64_t floor_seed(const Scenario& s, int floor) {
  return derive_seed(s.agents.seed, static_cast<std::uint64_t>(floor));
}

ModeRun run_schedule(const Scenario& s, const Building& building, const Schedule& schedule,
                     const std::function<void(const World&, std::span<const AgentForces>,
                                              const Sample&)>& on_sample) {
  const WorldConfig config = world_config(s);
  std::vector<Agent> agents;
  for (int n = 0; n < building.floor_count(); ++n) {
    const FloorPlan& plan = building.floor(n);
    auto placed = spawn_agents(plan, plan.initial_agent_count, floor_seed(s, n), s.agents.agent, n,
                               static_cast<int>(agents.size()),
                               schedule.floor_start_times.at(static_cast<std::size_t>(n)));
    agents.insert(agents.end(), placed.begin(), placed.end());
  }
  World world(make_regions(building, config), std::move(agents), config, s.agents.seed);
  RunOptions options;
  options.dt = s.dynamics.dt;
  options.t_max = s.dynamics.t_max;
  options.sample_interval = s.dynamics.sample_interval;
  options.metric = s.dynamics.metric;
  options.on_sample = on_sample;
  RunResult result = run_until_empty(world, options);

  ModeRun run;
  run.schedule = schedule;
  run.summary = summarize(result.trace, world.anomalies());
  run.trace = std::move(result.trace);
  return run;
}

ExperimentResult run_experiment(const Scenario& s, ModeSelection modes) {
  const Building building = build_building(s);
  ExperimentResult out;
  if (modes != ModeSelection::Simultaneous) {
    CalibrationConfig calib;
    calib.world = world_config(s);
    calib.agents = s.agents.agent;
    calib.dt = s.dynamics.dt;
    calib.t_max = s.dynamics.t_max;
    out.calibration = calibrate_floor(building, calib, floor_seed(s, 0));
    ContinuityInputs in;
    in.t_f = out.calibration->t_f;
    in.v_f = out.calibration->v_f;
    in.l_s = s.building.stair_length_m;
    in.c_s = s.building.stair_width_m;
    in.c_f = building.floor(0).exit_width_cf;
    out.shift = compute_time_shift(in);
    const Schedule schedule = build_schedule(out.shift->delta_t, building.floor_count(),
                                             ScheduleMode::Staggered, out.shift->clamped);
    out.staggered = run_schedule(s, building, schedule);
  }
  if (modes != ModeSelection::Staggered) {
    const Schedule schedule =
        build_schedule(0.0, building.floor_count(), ScheduleMode::Simultaneous);
    out.simultaneous = run_schedule(s, building, schedule);
  }
  if (out.staggered && out.simultaneous) {
    if (out.complete()) {
      out.comparison = compare_runs(out.staggered->summary, out.simultaneous->summary);
    } else {
      out.comparison_note = "comparison refused: a run did not finish before t_max";
    }
  }
  return out;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot write '{}'", path.string()));
  }
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) {
    throw IoError(fmt::format("failed writing '{}'", path.string()));
  }
}

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

ordered_json summary_json(const ModeRun& run) {
  ordered_json anomalies = ordered_json::object();
  for (const auto& [kind, n] : run.summary.anomaly_counts) anomalies[kind] = n;
  return {{"schedule",
           {{"mode", to_string(run.schedule.mode)},
            {"delta_t_s", run.schedule.delta_t},
            {"clamped", run.schedule.clamped},
            {"floor_start_times_s", run.schedule.floor_start_times}}},
          {"total_evacuation_time_s", run.summary.total_evacuation_time},
          {"peak_avg_force_N", run.summary.peak_avg_force},
          {"time_of_peak_s", run.summary.time_of_peak},
          {"completed", run.summary.completed},
          {"spawned", run.trace.spawned},
          {"anomalies", anomalies}};
}

}  // namespace

void export_csv(const ForceTrace& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "time_s,active,avg_force_N,peak_force_N,evacuated\n";
  for (const Sample& s : trace.samples) {
    out << fmt::format("{:.3f},{},{:.6f},{:.6f},{}\n", s.time, s.active, s.avg_force,
                       s.peak_force, s.evacuated);
  }
  close_checked(out, path);
}

void export_field(const FlowField& field, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "x,y,vx,vy,distance\n";
  for (int row = 0; row < field.height; ++row) {
    for (int col = 0; col < field.width; ++col) {
      const Cell c{col, row};
      const Vec2 v = field.vector_at(c);
      out << col << ',' << row << ',' << number(v.x) << ',' << number(v.y) << ','
          << number(field.distance_at(c)) << '\n';
    }
  }
  close_checked(out, path);
}

FlowField load_field(const std::filesystem::path& path, const CellGrid& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(fmt::format("cannot read field '{}'", path.string()));
  }
  FlowField field;
  field.width = grid.width();
  field.height = grid.height();
  field.cell_size = grid.cell_size();
  field.vectors.assign(grid.size(), Vec2{});
  field.obstacle.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    field.obstacle[i] = grid.cells()[i] == CellKind::Obstacle ? 1 : 0;
  }

  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool with_distance = line == "x,y,vx,vy,distance";
  if (!with_distance && line != "x,y,vx,vy") {
    throw IoError(fmt::format("{}: expected header 'x,y,vx,vy[,distance]'", path.string()));
  }
  std::vector<double> distance(grid.size(), kUnreachable);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) cols.push_back(item);
    if (cols.size() != (with_distance ? 5u : 4u)) {
      throw IoError(fmt::format("{}:{}: wrong column count", path.string(), lineno));
    }
    try {
      const Cell c{std::stoi(cols[0]), std::stoi(cols[1])};
      if (!grid.in_bounds(c)) {
        throw IoError(fmt::format("{}:{}: cell ({}, {}) outside the {}x{} grid", path.string(),
                                  lineno, c.col, c.row, grid.width(), grid.height()));
      }
      const std::size_t i = grid.index(c);
      if (field.obstacle[i] == 0) {
        field.vectors[i] = {std::stod(cols[2]), std::stod(cols[3])};
      }
      if (with_distance) distance[i] = std::stod(cols[4]);
    } catch (const std::logic_error&) {
      throw IoError(fmt::format("{}:{}: malformed number", path.string(), lineno));
    }
  }
  field.distance = with_distance ? std::move(distance) : compute_distance_field(grid);
  return field;
}

void write_outputs(const ExperimentResult& result, const Scenario& scenario,
                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  }
  ordered_json report;
  report["scenario"] = scenario.name;
  report["seed"] = scenario.agents.seed;
  if (result.calibration) {
    report["calibration"] = {{"t_f_s", result.calibration->t_f},
                             {"v_f_mps", result.calibration->v_f},
                             {"crossings", result.calibration->samples},
                             {"no_samples", result.calibration->no_samples}};
  }
  if (result.shift) {
    report["time_shift"] = {{"delta_t_s", result.shift->delta_t},
                            {"raw_s", result.shift->raw},
                            {"t_s_s", result.shift->t_s},
                            {"v_s_mps", result.shift->v_s},
                            {"clamped", result.shift->clamped},
                            {"narrowing_warning", result.shift->narrowing_warning}};
  }
  if (result.staggered) {
    export_csv(result.staggered->trace, dir / "staggered.csv");
    report["staggered"] = summary_json(*result.staggered);
  }
  if (result.simultaneous) {
    export_csv(result.simultaneous->trace, dir / "simultaneous.csv");
    report["simultaneous"] = summary_json(*result.simultaneous);
  }
  if (result.comparison) {
    const Comparison& c = *result.comparison;
    report["comparison"] = {{"delta_time_s", c.delta_time},
                            {"delta_peak_force_N", c.delta_peak_force},
                            {"reduction_ratio", c.reduction_ratio},
                            {"pattern", to_string(c.pattern)}};
    const std::filesystem::path path = dir / "comparison.csv";
    auto out = open_for_write(path);
    out << "key,value\n";
    out << fmt::format("staggered_total_time_s,{:.3f}\n", result.staggered->summary.total_evacuation_time);
    out << fmt::format("simultaneous_total_time_s,{:.3f}\n", result.simultaneous->summary.total_evacuation_time);
    out << fmt::format("delta_time_s,{:.3f}\n", c.delta_time);
    out << fmt::format("staggered_peak_avg_force_N,{:.6f}\n", result.staggered->summary.peak_avg_force);
    out << fmt::format("simultaneous_peak_avg_force_N,{:.6f}\n", result.simultaneous->summary.peak_avg_force);
    out << fmt::format("delta_peak_force_N,{:.6f}\n", c.delta_peak_force);
    out << fmt::format("reduction_ratio,{:.6f}\n", c.reduction_ratio);
    out << fmt::format("pattern,{}\n", to_string(c.pattern));
    close_checked(out, path);
  } else if (!result.comparison_note.empty()) {
    report["comparison_note"] = result.comparison_note;
  }
  const std::filesystem::path path = dir / "report.json";
  auto out = open_for_write(path);
  out << report.dump(2) << '\n';
  close_checked(out, path);
}

std::string gnuplot_script(const std::string& title) {
  return fmt::format(
      "# Average force per pedestrian against evacuation time.\n"
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set title '{}'\n"
      "set xlabel 'time [s]'\n"
      "set ylabel 'average force per pedestrian [N]'\n"
      "set grid\n"
      "files = system('ls staggered.csv simultaneous.csv 2>/dev/null')\n"
      "plot for [f in files] f using 1:3 with lines lw 2 title f\n",
      title);
}

}  // namespace evac
