#include "evac/scenario.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <system_error>

namespace evac {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(ModeSelection m) {
  switch (m) {
    case ModeSelection::Staggered: return "staggered";
    case ModeSelection::Simultaneous: return "simultaneous";
    case ModeSelection::Both: return "both";
  }
  return "unknown";
}

ModeSelection mode_selection_from_string(const std::string& s) {
  if (s == "staggered") return ModeSelection::Staggered;
  if (s == "simultaneous") return ModeSelection::Simultaneous;
  if (s == "both") return ModeSelection::Both;
  throw std::invalid_argument(
      fmt::format("unknown mode '{}' (expected staggered, simultaneous or both)", s));
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::string out = "scenario failed validation:";
  for (const Diagnostic& d : diagnostics) {
    out += fmt::format("\n  [{}] {}", d.code, d.message);
  }
  return out;
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be rejected.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw ScenarioError(fmt::format("{}: expected an object", label()));
    }
  }

  void read(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      out = v->get<int>();
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::vector<std::string>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "expected an array of strings");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_string()) fail(key, "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  template <class Fn>
  void object(const char* key, Fn&& fn) {
    if (const json* v = take(key)) {
      Reader child(*v, field(key));
      fn(child);
      child.finish();
    }
  }
  template <class Enum, class Parse>
  void enumeration(const char* key, Enum& out, Parse&& parse) {
    std::string text;
    read(key, text);
    if (text.empty()) return;
    try {
      out = parse(text);
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw ScenarioError(fmt::format("{}: unknown key", field(it.key())));
      }
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ScenarioError(fmt::format("{}: {}", field(key), what));
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }
  std::string label() const { return path_.empty() ? "scenario" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ScenarioError(fmt::format("{}: {}", field, what));
}

void check_ranges(const Scenario& s) {
  const auto positive = [](double v) { return v > 0.0; };
  const BuildingSpec& b = s.building;
  require(positive(b.cell_size_m), "building.cell_size_m", fmt::format("must be positive (got {})", b.cell_size_m));
  if (b.layout.empty()) {
    require(positive(b.floor.width_m), "building.floor.width_m", fmt::format("must be positive (got {})", b.floor.width_m));
    require(positive(b.floor.depth_m), "building.floor.depth_m", fmt::format("must be positive (got {})", b.floor.depth_m));
    require(positive(b.floor.exit_width_m), "building.floor.exit_width_m",
            fmt::format("must be positive (got {})", b.floor.exit_width_m));
  }
  require(positive(b.stair_length_m), "building.staircase.length_m",
          fmt::format("must be positive (got {})", b.stair_length_m));
  require(positive(b.stair_width_m), "building.staircase.width_m",
          fmt::format("must be positive (got {})", b.stair_width_m));
  require(b.stair_width_m >= 2.0 * b.cell_size_m, "building.staircase.width_m",
          fmt::format("must be at least two cells ({} m), got {}", 2.0 * b.cell_size_m, b.stair_width_m));
  require(b.floor_count >= 2, "building.floor_count", fmt::format("must be at least 2 (got {})", b.floor_count));
  require(b.mode != BuildingMode::UnitCell || b.floor_count == 2, "building.floor_count",
          "unit_cell mode fixes floor_count at 2");

  const AgentSpec& a = s.agents;
  require(a.per_floor >= 0, "agents.per_floor", fmt::format("must be nonnegative (got {})", a.per_floor));
  require(positive(a.agent.base.mass_kg), "agents.mass_kg", "must be positive");
  require(a.agent.base.desired_speed >= 0.0, "agents.desired_speed_mps", "must be nonnegative");
  require(positive(a.agent.base.relaxation_time), "agents.relaxation_time_s", "must be positive");
  require(positive(a.agent.base.radius), "agents.radius_m", "must be positive");
  require(a.agent.desired_speed_spread >= 0.0, "agents.desired_speed_spread_mps", "must be nonnegative");
  require(a.agent.radius_spread >= 0.0 && a.agent.radius_spread < a.agent.base.radius,
          "agents.radius_spread_m", "must be nonnegative and below the radius");
  require(positive(a.stair_speed_factor), "agents.stair_speed_factor", "must be positive");

  const DynamicsSpec& d = s.dynamics;
  require(positive(d.dt), "dynamics.dt_s", "must be positive");
  require(positive(d.t_max), "dynamics.t_max_s", "must be positive");
  require(d.sample_interval >= d.dt, "dynamics.sample_interval_s", "must be at least dt_s");
  require(d.workers >= 1, "dynamics.workers", "must be at least 1");
  require(d.visibility_radius >= 1, "dynamics.visibility_radius_cells", "must be at least 1");
  require(std::isfinite(d.fluctuation) && d.fluctuation >= 0.0, "dynamics.fluctuation_N",
          "must be nonnegative");
  const ForceParams& f = d.forces;
  require(positive(f.social_strength), "dynamics.forces.social_strength_N", "must be positive");
  require(positive(f.social_range), "dynamics.forces.social_range_m", "must be positive");
  require(positive(f.body_stiffness), "dynamics.forces.body_stiffness_N_per_m", "must be positive");
  require(positive(f.sliding_friction), "dynamics.forces.sliding_friction_kg_per_m_s", "must be positive");
  const double max_radius = a.agent.base.radius + a.agent.radius_spread;
  require(f.valid(max_radius), "dynamics.forces.interaction_cutoff_m",
          fmt::format("must be at least 2 * max radius + 5 * social range ({} m)",
                      2.0 * max_radius + 5.0 * f.social_range));
}

BuildingMode building_mode_from_string(const std::string& s) {
  if (s == "unit_cell") return BuildingMode::UnitCell;
  if (s == "full_stack") return BuildingMode::FullStack;
  throw std::invalid_argument(fmt::format("unknown building mode '{}'", s));
}

std::string to_string(BuildingMode m) {
  return m == BuildingMode::UnitCell ? "unit_cell" : "full_stack";
}

ForceMetric metric_from_string(const std::string& s) {
  if (s == "repulsive") return ForceMetric::Repulsive;
  if (s == "total") return ForceMetric::Total;
  if (s == "load") return ForceMetric::Load;
  throw std::invalid_argument(fmt::format("unknown force metric '{}'", s));
}

std::string to_string(ForceMetric m) {
  switch (m) {
    case ForceMetric::Repulsive: return "repulsive";
    case ForceMetric::Total: return "total";
    case ForceMetric::Load: return "load";
  }
  return "repulsive";
}

}  // namespace

ScenarioValidationError::ScenarioValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(fmt::format("malformed scenario: {}", e.what()));
  }
  Scenario s;
  s.base_dir = base_dir;
  Reader r(root, "");
  r.read("name", s.name);
  r.object("building", [&](Reader& b) {
    b.read("cell_size_m", s.building.cell_size_m);
    b.object("floor", [&](Reader& f) {
      f.read("width_m", s.building.floor.width_m);
      f.read("depth_m", s.building.floor.depth_m);
      f.read("exit_width_m", s.building.floor.exit_width_m);
    });
    b.read("layout", s.building.layout);
    b.object("staircase", [&](Reader& st) {
      st.enumeration("kind", s.building.stair_kind, staircase_kind_from_string);
      st.read("length_m", s.building.stair_length_m);
      st.read("width_m", s.building.stair_width_m);
    });
    b.read("floor_count", s.building.floor_count);
    b.enumeration("mode", s.building.mode, building_mode_from_string);
  });
  r.object("agents", [&](Reader& a) {
    a.read("per_floor", s.agents.per_floor);
    a.read("seed", s.agents.seed);
    a.read("mass_kg", s.agents.agent.base.mass_kg);
    a.read("desired_speed_mps", s.agents.agent.base.desired_speed);
    a.read("desired_speed_spread_mps", s.agents.agent.desired_speed_spread);
    a.read("relaxation_time_s", s.agents.agent.base.relaxation_time);
    a.read("radius_m", s.agents.agent.base.radius);
    a.read("radius_spread_m", s.agents.agent.radius_spread);
    a.read("stair_speed_factor", s.agents.stair_speed_factor);
  });
  r.object("dynamics", [&](Reader& d) {
    d.read("dt_s", s.dynamics.dt);
    d.read("t_max_s", s.dynamics.t_max);
    d.read("sample_interval_s", s.dynamics.sample_interval);
    d.read("workers", s.dynamics.workers);
    d.read("visibility_radius_cells", s.dynamics.visibility_radius);
    d.read("fluctuation_N", s.dynamics.fluctuation);
    d.enumeration("force_metric", s.dynamics.metric, metric_from_string);
    d.object("forces", [&](Reader& f) {
      f.read("social_strength_N", s.dynamics.forces.social_strength);
      f.read("social_range_m", s.dynamics.forces.social_range);
      f.read("body_stiffness_N_per_m", s.dynamics.forces.body_stiffness);
      f.read("sliding_friction_kg_per_m_s", s.dynamics.forces.sliding_friction);
      f.read("interaction_cutoff_m", s.dynamics.forces.interaction_cutoff);
    });
  });
  r.object("schedule", [&](Reader& sc) {
    sc.enumeration("modes", s.modes, mode_selection_from_string);
  });
  r.object("output", [&](Reader& o) { o.read("dir", s.output_dir); });
  r.read("field_override", s.field_override);
  r.finish();

  s.building.floor.cell_size_m = s.building.cell_size_m;
  check_ranges(s);
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json root;
  root["name"] = s.name;
  ordered_json b;
  b["cell_size_m"] = s.building.cell_size_m;
  if (s.building.layout.empty()) {
    b["floor"] = {{"width_m", s.building.floor.width_m},
                  {"depth_m", s.building.floor.depth_m},
                  {"exit_width_m", s.building.floor.exit_width_m}};
  } else {
    b["layout"] = s.building.layout;
  }
  b["staircase"] = {{"kind", to_string(s.building.stair_kind)},
                    {"length_m", s.building.stair_length_m},
                    {"width_m", s.building.stair_width_m}};
  b["floor_count"] = s.building.floor_count;
  b["mode"] = to_string(s.building.mode);
  root["building"] = b;
  const AgentTemplate& t = s.agents.agent;
  root["agents"] = {{"per_floor", s.agents.per_floor},
                    {"seed", s.agents.seed},
                    {"mass_kg", t.base.mass_kg},
                    {"desired_speed_mps", t.base.desired_speed},
                    {"desired_speed_spread_mps", t.desired_speed_spread},
                    {"relaxation_time_s", t.base.relaxation_time},
                    {"radius_m", t.base.radius},
                    {"radius_spread_m", t.radius_spread},
                    {"stair_speed_factor", s.agents.stair_speed_factor}};
  const DynamicsSpec& d = s.dynamics;
  root["dynamics"] = {
      {"dt_s", d.dt},
      {"t_max_s", d.t_max},
      {"sample_interval_s", d.sample_interval},
      {"workers", d.workers},
      {"visibility_radius_cells", d.visibility_radius},
      {"fluctuation_N", d.fluctuation},
      {"force_metric", to_string(d.metric)},
      {"forces",
       {{"social_strength_N", d.forces.social_strength},
        {"social_range_m", d.forces.social_range},
        {"body_stiffness_N_per_m", d.forces.body_stiffness},
        {"sliding_friction_kg_per_m_s", d.forces.sliding_friction},
        {"interaction_cutoff_m", d.forces.interaction_cutoff}}}};
  root["schedule"] = {{"modes", to_string(s.modes)}};
  root["output"] = {{"dir", s.output_dir}};
  if (!s.field_override.empty()) {
    root["field_override"] = s.field_override;
  }
  return root.dump(2) + "\n";
}

Building build_building(const Scenario& s) {
  const BuildingSpec& b = s.building;
  FloorPlan lower;
  if (b.layout.empty()) {
    FloorSpec spec = b.floor;
    spec.cell_size_m = b.cell_size_m;
    lower = make_floor(spec, s.agents.per_floor, CellKind::Exit);
  } else {
    lower = floor_from_grid(CellGrid::from_rows(b.layout, b.cell_size_m), s.agents.per_floor);
    lower = with_departure_kind(std::move(lower), CellKind::Exit);
  }
  FloorPlan upper = with_departure_kind(lower, CellKind::StairEntry);
  Staircase stair = unfold_staircase(b.stair_kind, b.stair_length_m, b.stair_width_m, b.cell_size_m);
  Building unit = Building::unit_cell(std::move(upper), std::move(stair), std::move(lower));
  if (b.mode == BuildingMode::FullStack) {
    return replicate_unit_cell(unit, b.floor_count);
  }
  return unit;
}

std::vector<Diagnostic> validate(const Scenario& s) {
  Building building;
  try {
    building = build_building(s);
  } catch (const std::invalid_argument& e) {
    return {{"geometry", e.what()}};
  }
  AgentParams largest = s.agents.agent.base;
  largest.radius += s.agents.agent.radius_spread;
  return validate_scenario(building, largest);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory),
                            fmt::format("cannot open scenario '{}'", path.string()));
  }
  std::ostringstream text;
  text << in.rdbuf();
  Scenario s;
  try {
    s = parse_scenario(text.str(), path.parent_path());
  } catch (const ScenarioError& e) {
    throw ScenarioError(fmt::format("{}: {}", path.string(), e.what()));
  }
  auto diagnostics = validate(s);
  if (!diagnostics.empty()) {
    throw ScenarioValidationError(std::move(diagnostics));
  }
  return s;
}

}  // namespace evac
