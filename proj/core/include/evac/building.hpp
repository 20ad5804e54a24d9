#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evac/agent.hpp"
#include "evac/vec2.hpp"

namespace evac {

enum class CellKind : std::uint8_t { Obstacle, Free, Exit, StairEntry, StairExit };

/// '#' obstacle, '.' free, 'E' exit, '>' stair entry (departure), '<' stair exit (arrival).
char to_char(CellKind kind);
CellKind cell_kind_from_char(char c);

constexpr bool is_walkable(CellKind k) { return k != CellKind::Obstacle; }
/// Cells where an agent leaves its current region. Distance fields are anchored here.
constexpr bool is_departure(CellKind k) { return k == CellKind::Exit || k == CellKind::StairEntry; }

struct Cell {
  int col = 0;
  int row = 0;
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

/// Row-major grid of square cells. Row 0 is at y = 0; cell (c, r) covers
/// [c*h, (c+1)*h) x [r*h, (r+1)*h).
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(int width_cells, int height_cells, double cell_size,
           CellKind fill = CellKind::Obstacle);

  /// Rows are given top-down, as they read in a text file.
  static CellGrid from_rows(std::span<const std::string> rows_top_down, double cell_size);
  std::vector<std::string> to_rows() const;

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  double width_m() const { return width_ * cell_size_; }
  double height_m() const { return height_ * cell_size_; }
  std::size_t size() const { return cells_.size(); }
  std::span<const CellKind> cells() const { return cells_; }

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  bool on_boundary(Cell c) const {
    return c.col == 0 || c.row == 0 || c.col == width_ - 1 || c.row == height_ - 1;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell_at(std::size_t idx) const {
    return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
            static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }

  CellKind at(Cell c) const { return cells_[index(c)]; }
  void set(Cell c, CellKind kind) { cells_[index(c)] = kind; }

  Vec2 center(Cell c) const {
    return {(c.col + 0.5) * cell_size_, (c.row + 0.5) * cell_size_};
  }
  /// Containing cell of a point; nullopt outside the grid.
  std::optional<Cell> locate(Vec2 p) const;

  std::size_t count(CellKind kind) const;
  std::size_t walkable_count() const;

  friend bool operator==(const CellGrid&, const CellGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.0;
  std::vector<CellKind> cells_;
};

enum class Side : std::uint8_t { Left, Right, Bottom, Top };

/// A contiguous run of boundary cells along one side of a grid. `first` is a
/// row index on Left/Right and a column index on Bottom/Top.
struct Band {
  Side side = Side::Left;
  int first = 0;
  int count = 0;

  Cell cell(const CellGrid& grid, int i) const;
  double width(double cell_size) const { return count * cell_size; }
  /// Unit normal pointing out of the grid.
  Vec2 outward_normal() const;
  /// Endpoints of the band on the grid's outer edge.
  std::pair<Vec2, Vec2> outer_edge(const CellGrid& grid) const;

  friend bool operator==(const Band&, const Band&) = default;
};

/// Every maximal run of `kind` cells along the grid boundary.
std::vector<Band> find_bands(const CellGrid& grid, CellKind kind);

enum class StaircaseKind : std::uint8_t { LadderShort, LadderLong, Standard, Helical };

std::string to_string(StaircaseKind kind);
StaircaseKind staircase_kind_from_string(const std::string& s);

/// Escape path between two floors, flattened into the simulation plane.
/// Agents arrive through `arrival` (StairExit cells) and leave through
/// `departure` (StairEntry cells).
struct Staircase {
  StaircaseKind kind = StaircaseKind::LadderShort;
  double length_ls = 0.0;
  double width_cs = 0.0;
  CellGrid unfolded;
  Band arrival;
  Band departure;
  /// Centerline of the walkable channel as built, in metres.
  std::vector<Vec2> centerline;

  double centerline_length() const;

  friend bool operator==(const Staircase&, const Staircase&) = default;
};

inline constexpr double kDefaultCellSize = 0.3;
inline constexpr double kLadderShortLength = 6.0;
inline constexpr double kLadderLongLength = 12.0;

/// Builds the corridor for a staircase. Throws std::invalid_argument when
/// width_cs < 2 * cell_size or the length cannot host the requested shape.
Staircase unfold_staircase(StaircaseKind kind, double length_ls, double width_cs,
                           double cell_size = kDefaultCellSize);

struct FloorPlan {
  CellGrid grid;
  double exit_width_cf = 0.0;
  int initial_agent_count = 0;
  Band departure;
  std::optional<Band> arrival;

  friend bool operator==(const FloorPlan&, const FloorPlan&) = default;
};

/// Rectangular room generator. The departure band sits on the right wall just
/// above the bottom-right corner; the arrival band sits on the bottom wall
/// next to the same corner, so arrivals from above merge into the exit stream.
struct FloorSpec {
  double width_m = 8.1;
  double depth_m = 6.0;
  double exit_width_m = 1.2;
  double cell_size_m = kDefaultCellSize;

  friend bool operator==(const FloorSpec&, const FloorSpec&) = default;
};

FloorPlan make_floor(const FloorSpec& spec, int agent_count, CellKind departure_kind);

/// Wraps an explicit grid. The departure band is the single boundary run of
/// Exit or StairEntry cells; the arrival band is the StairExit run, if any.
FloorPlan floor_from_grid(CellGrid grid, int agent_count);

/// Same plan with its departure cells switched to `kind` (Exit or StairEntry).
FloorPlan with_departure_kind(FloorPlan plan, CellKind kind);

enum class BuildingMode : std::uint8_t { UnitCell, FullStack };

/// Floors are indexed bottom (0) to top. Staircase n connects floor n + 1 to
/// floor n. Floor 0's departure band is the building exit.
class Building {
 public:
  static Building unit_cell(FloorPlan upper, Staircase staircase, FloorPlan lower);

  int floor_count() const { return static_cast<int>(floors_.size()); }
  int staircase_count() const { return static_cast<int>(staircases_.size()); }
  BuildingMode mode() const { return mode_; }
  const FloorPlan& floor(int n) const { return floors_.at(static_cast<std::size_t>(n)); }
  const Staircase& staircase(int n) const { return staircases_.at(static_cast<std::size_t>(n)); }

  friend bool operator==(const Building&, const Building&) = default;
  friend Building replicate_unit_cell(const Building& building, int floor_count);

 private:
  std::vector<FloorPlan> floors_;
  std::vector<Staircase> staircases_;
  BuildingMode mode_ = BuildingMode::UnitCell;
};

/// Stacks the unit cell into `floor_count` identical floors. Throws
/// std::invalid_argument unless the input is a unit cell and floor_count >= 2.
Building replicate_unit_cell(const Building& building, int floor_count);

struct Diagnostic {
  std::string code;
  std::string message;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Empty iff the building satisfies every geometric invariant, each floor can
/// host its agents, and every walkable cell reaches a departure cell.
std::vector<Diagnostic> validate_scenario(const Building& building, const AgentParams& agents);

/// Checks a single grid in isolation: dimensions, closed boundary, a departure
/// cell present, and reachability.
std::vector<Diagnostic> validate_grid(const CellGrid& grid, const std::string& label);

}  // namespace evac
