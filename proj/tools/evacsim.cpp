// evacsim: run staggered / simultaneous evacuations from a scenario file.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <optional>
#include <system_error>

#include "evac/experiment.hpp"
#include "evac/scheduler.hpp"

namespace {

enum ExitCode : int { kOk = 0, kInvalid = 1, kIncomplete = 2, kIo = 3 };

void print_diagnostics(const std::vector<evac::Diagnostic>& diags) {
  for (const auto& d : diags) {
    fmt::print(stderr, "  [{}] {}\n", d.code, d.message);
  }
}

void print_summary(const char* label, const evac::ModeRun& run) {
  fmt::print("{:<13} T = {:8.2f} s   peak avg force = {:10.3f} N at {:.2f} s{}\n", label,
             run.summary.total_evacuation_time, run.summary.peak_avg_force,
             run.summary.time_of_peak, run.summary.completed ? "" : "   (incomplete)");
  for (const auto& [kind, n] : run.summary.anomaly_counts) {
    fmt::print("{:<13}   {}: {}\n", "", kind, n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skyscraper evacuation simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out;
  std::string mode_name;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_max;
  int region = 0;

  auto* run = app.add_subcommand("run", "Run one or both schedules and write CSVs");
  run->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode_name, "staggered | simultaneous | both")
      ->check(CLI::IsMember({"staggered", "simultaneous", "both"}));
  run->add_option("--seed", seed, "Placement seed (overrides the scenario)");
  run->add_option("--dt", dt, "Integrator step [s]")->check(CLI::PositiveNumber);
  run->add_option("--tmax", t_max, "Time limit [s]")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory")->required();

  auto* field = app.add_subcommand("field", "Export a region's flow field");
  field->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  field->add_option("--out", out, "Output CSV")->required();
  field->add_option("--region", region, "Region index (floors first, then staircases)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);

  auto* plot = app.add_subcommand("plot", "Write a gnuplot script next to run output");
  plot->add_option("--out", out, "Directory holding the run CSVs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plot) {
      std::filesystem::create_directories(out);
      const auto path = std::filesystem::path(out) / "plot.gp";
      std::ofstream f(path);
      f << evac::gnuplot_script("average force per pedestrian");
      if (!f) throw evac::IoError(fmt::format("cannot write '{}'", path.string()));
      fmt::print("wrote {}\n", path.string());
      return kOk;
    }

    evac::Scenario scenario = evac::load_scenario(scenario_path);

    if (*validate) {
      fmt::print("{}: ok\n", scenario_path);
      return kOk;
    }

    if (*field) {
      const evac::Building building = evac::build_building(scenario);
      const auto regions = evac::make_regions(building, evac::world_config(scenario));
      if (region < 0 || region >= static_cast<int>(regions.size())) {
        fmt::print(stderr, "region {} out of range (0..{})\n", region, regions.size() - 1);
        return kInvalid;
      }
      evac::export_field(regions[static_cast<std::size_t>(region)].field, out);
      fmt::print("wrote {}\n", out);
      return kOk;
    }

    if (seed) scenario.agents.seed = *seed;
    if (dt) scenario.dynamics.dt = *dt;
    if (t_max) scenario.dynamics.t_max = *t_max;
    const evac::ModeSelection modes =
        mode_name.empty() ? scenario.modes : evac::mode_selection_from_string(mode_name);

    const evac::ExperimentResult result = evac::run_experiment(scenario, modes);
    evac::write_outputs(result, scenario, out);

    if (result.shift) {
      fmt::print("time shift    dt = {:.3f} s (t_f = {:.2f} s, t_s = {:.2f} s{}{})\n",
                 result.shift->delta_t, result.calibration->t_f, result.shift->t_s,
                 result.shift->clamped ? ", clamped" : "",
                 result.shift->narrowing_warning ? ", staircase narrower than exit" : "");
    }
    if (result.staggered) print_summary("staggered", *result.staggered);
    if (result.simultaneous) print_summary("simultaneous", *result.simultaneous);
    if (result.comparison) {
      fmt::print("reduction     {:.1f}%   pattern: {}\n", 100.0 * result.comparison->reduction_ratio,
                 evac::to_string(result.comparison->pattern));
    } else if (!result.comparison_note.empty()) {
      fmt::print("{}\n", result.comparison_note);
    }
    return result.complete() ? kOk : kIncomplete;
  } catch (const evac::ScenarioValidationError& e) {
    fmt::print(stderr, "{}: {}\n", scenario_path, e.what());
    print_diagnostics(e.diagnostics());
    return kInvalid;
  } catch (const evac::ScenarioError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kInvalid;
  } catch (const evac::PlacementError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kInvalid;
  } catch (const evac::CalibrationError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kIncomplete;
  } catch (const evac::IoError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kIo;
  } catch (const std::system_error& e) {
    fmt::print(stderr, "{}: {}\n", scenario_path, e.what());
    return kIo;
  }
}
