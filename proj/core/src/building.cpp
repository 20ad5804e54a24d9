#include "evac/building.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

#include "evac/flowfield.hpp"

namespace evac {

char to_char(CellKind kind) {
  switch (kind) {
    case CellKind::Obstacle: return '#';
    case CellKind::Free: return '.';
    case CellKind::Exit: return 'E';
    case CellKind::StairEntry: return '>';
    case CellKind::StairExit: return '<';
  }
  return '?';
}

CellKind cell_kind_from_char(char c) {
  switch (c) {
    case '#': return CellKind::Obstacle;
    case '.': return CellKind::Free;
    case 'E': return CellKind::Exit;
    case '>': return CellKind::StairEntry;
    case '<': return CellKind::StairExit;
    default: break;
  }
  throw std::invalid_argument(fmt::format("unknown cell character '{}'", c));
}

CellGrid::CellGrid(int width_cells, int height_cells, double cell_size, CellKind fill)
    : width_(width_cells), height_(height_cells), cell_size_(cell_size) {
  if (width_cells < 1 || height_cells < 1) {
    throw std::invalid_argument("grid needs at least one cell in each direction");
  }
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("cell size must be positive");
  }
  cells_.assign(static_cast<std::size_t>(width_cells) * static_cast<std::size_t>(height_cells),
                fill);
}

CellGrid CellGrid::from_rows(std::span<const std::string> rows_top_down, double cell_size) {
  if (rows_top_down.empty()) {
    throw std::invalid_argument("layout has no rows");
  }
  const auto width = rows_top_down.front().size();
  CellGrid grid(static_cast<int>(width), static_cast<int>(rows_top_down.size()), cell_size);
  for (std::size_t i = 0; i < rows_top_down.size(); ++i) {
    const std::string& line = rows_top_down[i];
    if (line.size() != width) {
      throw std::invalid_argument(
          fmt::format("layout row {} has {} cells, expected {}", i, line.size(), width));
    }
    const int row = grid.height() - 1 - static_cast<int>(i);
    for (std::size_t col = 0; col < width; ++col) {
      grid.set({static_cast<int>(col), row}, cell_kind_from_char(line[col]));
    }
  }
  return grid;
}

std::vector<std::string> CellGrid::to_rows() const {
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(height_));
  for (int row = height_ - 1; row >= 0; --row) {
    std::string line(static_cast<std::size_t>(width_), '#');
    for (int col = 0; col < width_; ++col) {
      line[static_cast<std::size_t>(col)] = to_char(at({col, row}));
    }
    rows.push_back(std::move(line));
  }
  return rows;
}

std::optional<Cell> CellGrid::locate(Vec2 p) const {
  const double fx = std::floor(p.x / cell_size_);
  const double fy = std::floor(p.y / cell_size_);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width_ && fy < height_)) {
    return std::nullopt;
  }
  return Cell{static_cast<int>(fx), static_cast<int>(fy)};
}

std::size_t CellGrid::count(CellKind kind) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), kind));
}

std::size_t CellGrid::walkable_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](CellKind k) { return is_walkable(k); }));
}

Cell Band::cell(const CellGrid& grid, int i) const {
  switch (side) {
    case Side::Left: return {0, first + i};
    case Side::Right: return {grid.width() - 1, first + i};
    case Side::Bottom: return {first + i, 0};
    case Side::Top: return {first + i, grid.height() - 1};
  }
  return {};
}

Vec2 Band::outward_normal() const {
  switch (side) {
    case Side::Left: return {-1.0, 0.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Bottom: return {0.0, -1.0};
    case Side::Top: return {0.0, 1.0};
  }
  return {};
}

std::pair<Vec2, Vec2> Band::outer_edge(const CellGrid& grid) const {
  const double h = grid.cell_size();
  const double lo = first * h;
  const double hi = (first + count) * h;
  switch (side) {
    case Side::Left: return {{0.0, lo}, {0.0, hi}};
    case Side::Right: return {{grid.width_m(), lo}, {grid.width_m(), hi}};
    case Side::Bottom: return {{lo, 0.0}, {hi, 0.0}};
    case Side::Top: return {{lo, grid.height_m()}, {hi, grid.height_m()}};
  }
  return {};
}

std::vector<Band> find_bands(const CellGrid& grid, CellKind kind) {
  std::vector<Band> bands;
  auto scan = [&](Side side, int begin, int end) {
    int run_start = -1;
    for (int i = begin; i <= end; ++i) {
      const bool hit = i < end && grid.at(Band{side, i, 1}.cell(grid, 0)) == kind;
      if (hit && run_start < 0) {
        run_start = i;
      } else if (!hit && run_start >= 0) {
        bands.push_back({side, run_start, i - run_start});
        run_start = -1;
      }
    }
  };
  // Corner cells are attributed to the vertical sides only.
  scan(Side::Left, 0, grid.height());
  if (grid.width() > 1) {
    scan(Side::Right, 0, grid.height());
  }
  scan(Side::Bottom, 1, grid.width() - 1);
  if (grid.height() > 1) {
    scan(Side::Top, 1, grid.width() - 1);
  }
  return bands;
}

std::string to_string(StaircaseKind kind) {
  switch (kind) {
    case StaircaseKind::LadderShort: return "ladder_short";
    case StaircaseKind::LadderLong: return "ladder_long";
    case StaircaseKind::Standard: return "standard";
    case StaircaseKind::Helical: return "helical";
  }
  return "unknown";
}

StaircaseKind staircase_kind_from_string(const std::string& s) {
  if (s == "ladder_short") return StaircaseKind::LadderShort;
  if (s == "ladder_long") return StaircaseKind::LadderLong;
  if (s == "standard") return StaircaseKind::Standard;
  if (s == "helical") return StaircaseKind::Helical;
  throw std::invalid_argument(fmt::format("unknown staircase kind '{}'", s));
}

double Staircase::centerline_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < centerline.size(); ++i) {
    total += norm(centerline[i] - centerline[i - 1]);
  }
  return total;
}

namespace {

void fill_rect(CellGrid& grid, int col0, int row0, int cols, int rows, CellKind kind) {
  for (int r = row0; r < row0 + rows; ++r) {
    for (int c = col0; c < col0 + cols; ++c) {
      grid.set({c, r}, kind);
    }
  }
}

void mark_band(CellGrid& grid, const Band& band, CellKind kind) {
  for (int i = 0; i < band.count; ++i) {
    grid.set(band.cell(grid, i), kind);
  }
}

Staircase straight_corridor(Staircase s, double h, int channel) {
  const int length_cells = std::max(2, static_cast<int>(std::lround(s.length_ls / h)));
  CellGrid grid(length_cells, channel + 2, h);
  fill_rect(grid, 0, 1, length_cells, channel, CellKind::Free);
  s.arrival = {Side::Left, 1, channel};
  s.departure = {Side::Right, 1, channel};
  mark_band(grid, s.arrival, CellKind::StairExit);
  mark_band(grid, s.departure, CellKind::StairEntry);
  const double mid = (1 + channel / 2.0) * h;
  s.centerline = {{0.0, mid}, {length_cells * h, mid}};
  s.unfolded = std::move(grid);
  return s;
}

// Two flights stacked vertically with a one-cell divider, joined on the right
// by a landing spanning both flights. Centerline length in cells is
// 2 * flight + 2 * channel + 1.
Staircase switchback(Staircase s, double h, int channel) {
  const double target_cells = s.length_ls / h;
  const int flight = static_cast<int>(std::lround((target_cells - 2.0 * channel - 1.0) / 2.0));
  if (flight < 2) {
    throw std::invalid_argument(fmt::format(
        "staircase length {} m too short for a standard switchback of width {} m", s.length_ls,
        s.width_cs));
  }
  const int width = flight + channel + 1;
  const int height = 2 * channel + 3;
  CellGrid grid(width, height, h);
  fill_rect(grid, 0, 1, flight, channel, CellKind::Free);
  fill_rect(grid, 0, channel + 2, flight, channel, CellKind::Free);
  fill_rect(grid, flight, 1, channel, 2 * channel + 1, CellKind::Free);
  s.arrival = {Side::Left, 1, channel};
  s.departure = {Side::Left, channel + 2, channel};
  mark_band(grid, s.arrival, CellKind::StairExit);
  mark_band(grid, s.departure, CellKind::StairEntry);
  const double lower = (1 + channel / 2.0) * h;
  const double upper = (channel + 2 + channel / 2.0) * h;
  const double turn = (flight + channel / 2.0) * h;
  s.centerline = {{0.0, lower}, {turn, lower}, {turn, upper}, {0.0, upper}};
  s.unfolded = std::move(grid);
  return s;
}

// Half annulus standing on the bottom edge. Agents enter on the right foot,
// sweep counter-clockwise and leave on the left foot.
Staircase half_annulus(Staircase s, double h) {
  const double mid_radius = s.length_ls / std::numbers::pi;
  const double inner = mid_radius - s.width_cs / 2.0;
  const double outer = mid_radius + s.width_cs / 2.0;
  if (inner < h) {
    throw std::invalid_argument(fmt::format(
        "staircase length {} m too short for a helical channel of width {} m", s.length_ls,
        s.width_cs));
  }
  const int reach = static_cast<int>(std::ceil(outer / h));
  const int width = 2 * reach + 2;
  const int height = reach + 2;
  CellGrid grid(width, height, h);
  const Vec2 centre{(width / 2) * h, 0.0};
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const double r = norm(grid.center({col, row}) - centre);
      if (r >= inner && r <= outer) {
        grid.set({col, row}, CellKind::Free);
      }
    }
  }
  int left_first = -1, left_last = -1, right_first = -1, right_last = -1;
  for (int col = 1; col < width - 1; ++col) {
    if (grid.at({col, 0}) != CellKind::Free) continue;
    if (col < width / 2) {
      if (left_first < 0) left_first = col;
      left_last = col;
    } else {
      if (right_first < 0) right_first = col;
      right_last = col;
    }
  }
  s.departure = {Side::Bottom, left_first, left_last - left_first + 1};
  s.arrival = {Side::Bottom, right_first, right_last - right_first + 1};
  mark_band(grid, s.arrival, CellKind::StairExit);
  mark_band(grid, s.departure, CellKind::StairEntry);
  constexpr int kArcSegments = 64;
  s.centerline.clear();
  for (int i = 0; i <= kArcSegments; ++i) {
    const double a = std::numbers::pi * i / kArcSegments;
    s.centerline.push_back(centre + Vec2{std::cos(a), std::sin(a)} * mid_radius);
  }
  s.unfolded = std::move(grid);
  return s;
}

}  // namespace

Staircase unfold_staircase(StaircaseKind kind, double length_ls, double width_cs,
                           double cell_size) {
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("cell size must be positive");
  }
  if (!(length_ls > 0.0)) {
    throw std::invalid_argument("staircase length must be positive");
  }
  if (!(width_cs >= 2.0 * cell_size)) {
    throw std::invalid_argument(fmt::format(
        "staircase width {} m is narrower than two cells ({} m)", width_cs, 2.0 * cell_size));
  }
  Staircase s;
  s.kind = kind;
  s.length_ls = length_ls;
  s.width_cs = width_cs;
  const int channel = std::max(2, static_cast<int>(std::lround(width_cs / cell_size)));
  switch (kind) {
    case StaircaseKind::LadderShort:
    case StaircaseKind::LadderLong: return straight_corridor(std::move(s), cell_size, channel);
    case StaircaseKind::Standard: return switchback(std::move(s), cell_size, channel);
    case StaircaseKind::Helical: return half_annulus(std::move(s), cell_size);
  }
  throw std::invalid_argument("unknown staircase kind");
}

FloorPlan make_floor(const FloorSpec& spec, int agent_count, CellKind departure_kind) {
  if (!is_departure(departure_kind)) {
    throw std::invalid_argument("floor departure must be Exit or StairEntry");
  }
  const double h = spec.cell_size_m;
  if (!(h > 0.0) || !(spec.width_m > 0.0) || !(spec.depth_m > 0.0) ||
      !(spec.exit_width_m > 0.0)) {
    throw std::invalid_argument("floor dimensions must be positive");
  }
  const int inner_w = std::max(1, static_cast<int>(std::lround(spec.width_m / h)));
  const int inner_h = std::max(1, static_cast<int>(std::lround(spec.depth_m / h)));
  const int exit_cells = std::max(1, static_cast<int>(std::lround(spec.exit_width_m / h)));
  if (exit_cells > inner_h || exit_cells > inner_w) {
    throw std::invalid_argument("floor exit wider than the room");
  }
  CellGrid grid(inner_w + 2, inner_h + 2, h);
  fill_rect(grid, 1, 1, inner_w, inner_h, CellKind::Free);

  FloorPlan plan;
  plan.departure = {Side::Right, 1, exit_cells};
  plan.arrival = Band{Side::Bottom, inner_w + 1 - exit_cells, exit_cells};
  mark_band(grid, plan.departure, departure_kind);
  mark_band(grid, *plan.arrival, CellKind::StairExit);
  plan.grid = std::move(grid);
  plan.exit_width_cf = exit_cells * h;
  plan.initial_agent_count = agent_count;
  return plan;
}

FloorPlan floor_from_grid(CellGrid grid, int agent_count) {
  std::vector<Band> departures = find_bands(grid, CellKind::Exit);
  for (const Band& b : find_bands(grid, CellKind::StairEntry)) {
    departures.push_back(b);
  }
  if (departures.size() != 1) {
    throw std::invalid_argument(fmt::format(
        "floor layout needs exactly one boundary exit band, found {}", departures.size()));
  }
  const auto arrivals = find_bands(grid, CellKind::StairExit);
  if (arrivals.size() > 1) {
    throw std::invalid_argument("floor layout has more than one arrival band");
  }
  FloorPlan plan;
  plan.departure = departures.front();
  if (!arrivals.empty()) {
    plan.arrival = arrivals.front();
  }
  plan.exit_width_cf = plan.departure.width(grid.cell_size());
  plan.initial_agent_count = agent_count;
  plan.grid = std::move(grid);
  return plan;
}

FloorPlan with_departure_kind(FloorPlan plan, CellKind kind) {
  if (!is_departure(kind)) {
    throw std::invalid_argument("departure kind must be Exit or StairEntry");
  }
  mark_band(plan.grid, plan.departure, kind);
  return plan;
}

Building Building::unit_cell(FloorPlan upper, Staircase staircase, FloorPlan lower) {
  Building b;
  b.floors_ = {std::move(lower), std::move(upper)};
  b.staircases_ = {std::move(staircase)};
  b.mode_ = BuildingMode::UnitCell;
  return b;
}

Building replicate_unit_cell(const Building& building, int floor_count) {
  if (building.mode_ != BuildingMode::UnitCell) {
    throw std::invalid_argument("replication needs a unit-cell building");
  }
  if (floor_count < 2) {
    throw std::invalid_argument(fmt::format("floor count {} below 2", floor_count));
  }
  Building out;
  out.mode_ = BuildingMode::FullStack;
  out.floors_.reserve(static_cast<std::size_t>(floor_count));
  out.floors_.push_back(building.floors_[0]);
  for (int n = 1; n < floor_count; ++n) {
    out.floors_.push_back(building.floors_[1]);
    out.staircases_.push_back(building.staircases_[0]);
  }
  return out;
}

namespace {

bool is_opening(CellKind k) { return is_departure(k) || k == CellKind::StairExit; }

double free_area(const CellGrid& grid) {
  const double h = grid.cell_size();
  return static_cast<double>(grid.count(CellKind::Free)) * h * h;
}

void append(std::vector<Diagnostic>& out, std::vector<Diagnostic> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()),
             std::make_move_iterator(more.end()));
}

}  // namespace

std::vector<Diagnostic> validate_grid(const CellGrid& grid, const std::string& label) {
  std::vector<Diagnostic> out;
  if (grid.width() < 1 || grid.height() < 1 || !(grid.cell_size() > 0.0)) {
    out.push_back({"grid-dimensions", fmt::format("{}: empty grid or nonpositive cell size", label)});
    return out;
  }
  std::size_t open_boundary = 0;
  bool has_departure = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Cell c = grid.cell_at(i);
    const CellKind k = grid.at(c);
    has_departure = has_departure || is_departure(k);
    if (grid.on_boundary(c) && k != CellKind::Obstacle && !is_opening(k)) {
      ++open_boundary;
    }
  }
  if (open_boundary > 0) {
    out.push_back({"open-boundary", fmt::format("{}: {} boundary cells are neither wall nor opening",
                                                label, open_boundary)});
  }
  if (!has_departure) {
    out.push_back({"no-exit", fmt::format("{}: no Exit or StairEntry cell", label)});
    return out;
  }
  const auto distance = compute_distance_field(grid);
  std::size_t unreachable = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (is_walkable(grid.cells()[i]) && distance[i] == kUnreachable) {
      ++unreachable;
    }
  }
  if (unreachable > 0) {
    out.push_back({"unreachable", fmt::format("{}: unreachable free cells ({} cells cannot reach an exit)",
                                              label, unreachable)});
  }
  return out;
}

std::vector<Diagnostic> validate_scenario(const Building& building, const AgentParams& agents) {
  std::vector<Diagnostic> out;
  if (!agents.valid()) {
    out.push_back({"agent-params", "agent mass, relaxation time and radius must be positive"});
  }
  const int floors = building.floor_count();
  if (building.mode() == BuildingMode::UnitCell && floors != 2) {
    out.push_back({"floor-count", "unit cell must have exactly two floors"});
  }
  if (floors < 2) {
    out.push_back({"floor-count", fmt::format("{} floors; at least two required", floors)});
  }
  if (building.staircase_count() != std::max(0, floors - 1)) {
    out.push_back({"staircase-count", "expected one staircase per adjacent floor pair"});
  }

  // Disc packing cannot exceed the hexagonal density.
  const double packing = std::numbers::pi / (2.0 * std::numbers::sqrt3);
  const double disc = std::numbers::pi * agents.radius * agents.radius;

  for (int n = 0; n < floors; ++n) {
    const FloorPlan& plan = building.floor(n);
    const std::string label = fmt::format("floor {}", n);
    append(out, validate_grid(plan.grid, label));
    const double h = plan.grid.cell_size();
    if (std::abs(plan.exit_width_cf - plan.departure.width(h)) > h) {
      out.push_back({"exit-width", fmt::format("{}: exit width {} m does not match {} exit cells",
                                               label, plan.exit_width_cf, plan.departure.count)});
    }
    const CellKind expected = n == 0 ? CellKind::Exit : CellKind::StairEntry;
    for (int i = 0; i < plan.departure.count; ++i) {
      const Cell c = plan.departure.cell(plan.grid, i);
      if (!plan.grid.in_bounds(c) || plan.grid.at(c) != expected) {
        out.push_back({"departure-band", fmt::format("{}: departure band cells must be {}", label,
                                                     to_char(expected))});
        break;
      }
    }
    if (n + 1 < floors && !plan.arrival) {
      out.push_back({"arrival-band", fmt::format("{}: no arrival band for the staircase above", label)});
    }
    if (plan.initial_agent_count < 0) {
      out.push_back({"agent-count", fmt::format("{}: negative agent count", label)});
    } else if (plan.initial_agent_count * disc > packing * free_area(plan.grid)) {
      out.push_back({"overcrowded",
                     fmt::format("{}: overcrowded initial placement ({} agents need {:.2f} m^2, "
                                 "{:.2f} m^2 free)",
                                 label, plan.initial_agent_count,
                                 plan.initial_agent_count * disc / packing, free_area(plan.grid))});
    }
    if (n >= 2 && !(plan == building.floor(1))) {
      out.push_back({"translational-symmetry", fmt::format("{} differs from floor 1", label)});
    }
  }

  for (int n = 0; n < building.staircase_count(); ++n) {
    const Staircase& s = building.staircase(n);
    const std::string label = fmt::format("staircase {}", n);
    append(out, validate_grid(s.unfolded, label));
    const double h = s.unfolded.cell_size();
    if (std::abs(s.arrival.width(h) - s.width_cs) > h ||
        std::abs(s.departure.width(h) - s.width_cs) > h) {
      out.push_back({"staircase-width",
                     fmt::format("{}: channel width differs from {} m by more than a cell", label,
                                 s.width_cs)});
    }
    if (std::abs(s.centerline_length() - s.length_ls) > 0.05 * s.length_ls) {
      out.push_back({"staircase-length",
                     fmt::format("{}: centerline {} m differs from {} m by more than 5%", label,
                                 s.centerline_length(), s.length_ls)});
    }
    if (n >= 1 && !(s == building.staircase(0))) {
      out.push_back({"translational-symmetry", fmt::format("{} differs from staircase 0", label)});
    }
  }
  return out;
}

}  // namespace evac
