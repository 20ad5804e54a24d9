#include "evac/flowfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <queue>

namespace evac {

namespace {

struct Step {
  int dc;
  int dr;
};

// Fixed neighbour order: E, N, W, S, NE, NW, SW, SE.
constexpr std::array<Step, 8> kNeighbors{{
    {1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

bool walkable(const CellGrid& grid, Cell c) {
  return grid.in_bounds(c) && is_walkable(grid.at(c));
}

// A diagonal move must not squeeze between two cells that touch at a corner.
bool can_step(const CellGrid& grid, Cell from, Step s) {
  const Cell to{from.col + s.dc, from.row + s.dr};
  if (!walkable(grid, to)) {
    return false;
  }
  if (s.dc != 0 && s.dr != 0) {
    return walkable(grid, {from.col + s.dc, from.row}) &&
           walkable(grid, {from.col, from.row + s.dr});
  }
  return true;
}

double step_cost(Step s) { return (s.dc != 0 && s.dr != 0) ? std::numbers::sqrt2 : 1.0; }

std::optional<Cell> steepest_descent(const CellGrid& grid, const std::vector<double>& distance,
                                     Cell cell) {
  std::optional<Cell> best;
  double best_d = distance[grid.index(cell)];
  for (const Step s : kNeighbors) {
    if (!can_step(grid, cell, s)) continue;
    const Cell n{cell.col + s.dc, cell.row + s.dr};
    const double d = distance[grid.index(n)];
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  return best;
}

double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 ab = b - a;
  const double len_sq = dot(ab, ab);
  const double t = len_sq > 0.0 ? std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0) : 0.0;
  return norm(p - (a + ab * t));
}

// Vertex (x, y) of the cell lattice, x in [0, width], y in [0, height].
class CornerMap {
 public:
  CornerMap(const CellGrid& grid) : width_(grid.width() + 1), flags_(corner_flags(grid)) {}

  // True if the segment between cell centres passes closer than `clearance`
  // to a convex corner. A doorway's own jambs are ignored when `b` is the
  // doorway cell.
  bool grazes(Cell a, Cell b, double clearance, bool skip_b_vertices) const {
    if (clearance <= 0.0) return false;
    const Vec2 pa{a.col + 0.5, a.row + 0.5};
    const Vec2 pb{b.col + 0.5, b.row + 0.5};
    const int pad = static_cast<int>(std::ceil(clearance));
    const int x0 = std::max(0, std::min(a.col, b.col) + 1 - pad);
    const int x1 = std::min(width_ - 1, std::max(a.col, b.col) + pad);
    const int height = static_cast<int>(flags_.size()) / width_;
    const int y0 = std::max(0, std::min(a.row, b.row) + 1 - pad);
    const int y1 = std::min(height - 1, std::max(a.row, b.row) + pad);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (flags_[static_cast<std::size_t>(y * width_ + x)] == 0) continue;
        if (skip_b_vertices && (x == b.col || x == b.col + 1) && (y == b.row || y == b.row + 1)) {
          continue;
        }
        if (segment_distance(pa, pb, Vec2{double(x), double(y)}) < clearance) return true;
      }
    }
    return false;
  }

  static std::vector<std::uint8_t> corner_flags(const CellGrid& grid) {
    const int w = grid.width() + 1;
    const int h = grid.height() + 1;
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(w * h), 0);
    auto solid = [&](int col, int row) {
      const Cell c{col, row};
      return !grid.in_bounds(c) || grid.at(c) == CellKind::Obstacle;
    };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int n = solid(x - 1, y - 1) + solid(x, y - 1) + solid(x - 1, y) + solid(x, y);
        flags[static_cast<std::size_t>(y * w + x)] = n == 1 ? 1 : 0;
      }
    }
    return flags;
  }

 private:
  int width_;
  std::vector<std::uint8_t> flags_;
};

}  // namespace

std::vector<Vec2> convex_corners(const CellGrid& grid) {
  const auto flags = CornerMap::corner_flags(grid);
  const int w = grid.width() + 1;
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] != 0) {
      out.push_back({double(static_cast<int>(i) % w), double(static_cast<int>(i) / w)});
    }
  }
  return out;
}

bool ray_cast(const CellGrid& grid, Cell from, Cell to) {
  // Doubled coordinates: cell centres sit on odd integers, cell edges on even.
  std::int64_t x0 = 2 * from.col + 1, y0 = 2 * from.row + 1;
  std::int64_t x1 = 2 * to.col + 1, y1 = 2 * to.row + 1;
  if (x0 > x1) {
    std::swap(x0, x1);
    std::swap(y0, y1);
  }
  auto blocked = [&](std::int64_t col, std::int64_t row) {
    const Cell c{static_cast<int>(col), static_cast<int>(row)};
    return !grid.in_bounds(c) || grid.at(c) == CellKind::Obstacle;
  };

  const std::int64_t dx = x1 - x0;
  const std::int64_t dy = y1 - y0;
  if (dx == 0) {
    const std::int64_t col = (x0 - 1) / 2;
    for (std::int64_t row = (std::min(y0, y1) - 1) / 2; row <= (std::max(y0, y1) - 1) / 2; ++row) {
      if (blocked(col, row)) return false;
    }
    return true;
  }

  // For every column the segment spans, the closed y-interval it covers (scaled
  // by dx) selects the rows whose closed extent it touches.
  for (std::int64_t col = (x0 - 1) / 2; col <= (x1 - 1) / 2; ++col) {
    const std::int64_t xa = std::max(2 * col, x0);
    const std::int64_t xb = std::min(2 * col + 2, x1);
    const std::int64_t ya = y0 * dx + (xa - x0) * dy;
    const std::int64_t yb = y0 * dx + (xb - x0) * dy;
    const std::int64_t lo = std::min(ya, yb);
    const std::int64_t hi = std::max(ya, yb);
    // Row r spans [2r, 2r + 2]; touched iff 2r*dx <= hi and (2r + 2)*dx >= lo.
    const std::int64_t row_min = -floor_div(-(lo - 2 * dx), 2 * dx);
    const std::int64_t row_max = floor_div(hi, 2 * dx);
    for (std::int64_t row = row_min; row <= row_max; ++row) {
      if (blocked(col, row)) return false;
    }
  }
  return true;
}

std::vector<double> compute_distance_field(const CellGrid& grid) {
  std::vector<double> distance(grid.size(), kUnreachable);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (is_departure(grid.cells()[i])) {
      distance[i] = 0.0;
      open.emplace(0.0, i);
    }
  }
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > distance[idx]) continue;
    const Cell c = grid.cell_at(idx);
    for (const Step s : kNeighbors) {
      if (!can_step(grid, c, s)) continue;
      const std::size_t n = grid.index({c.col + s.dc, c.row + s.dr});
      const double nd = d + step_cost(s);
      if (nd < distance[n]) {
        distance[n] = nd;
        open.emplace(nd, n);
      }
    }
  }
  return distance;
}

std::optional<Cell> aligned_neighbor(const CellGrid& grid, Cell cell, Vec2 direction) {
  std::optional<Cell> best;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (const Step s : kNeighbors) {
    if (!can_step(grid, cell, s)) continue;
    const double d = dot(direction, normalized(Vec2{double(s.dc), double(s.dr)}));
    if (d > best_dot) {
      best_dot = d;
      best = Cell{cell.col + s.dc, cell.row + s.dr};
    }
  }
  return best;
}

FlowField compute_flow_field(const CellGrid& grid, int visibility_radius,
                             double corner_clearance) {
  const CornerMap corners(grid);
  FlowField field;
  field.width = grid.width();
  field.height = grid.height();
  field.cell_size = grid.cell_size();
  field.distance = compute_distance_field(grid);
  field.vectors.assign(grid.size(), Vec2{});
  field.obstacle.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    field.obstacle[i] = grid.cells()[i] == CellKind::Obstacle ? 1 : 0;
  }

  const int radius = std::max(1, visibility_radius);
  const int radius_sq = radius * radius;
  struct Candidate {
    double distance;
    int euclid_sq;
    std::size_t index;
  };
  std::vector<Candidate> candidates;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CellKind kind = grid.cells()[i];
    const double own = field.distance[i];
    if (!is_walkable(kind) || is_departure(kind) || own == kUnreachable) continue;
    const Cell c = grid.cell_at(i);

    candidates.clear();
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        const int e = dc * dc + dr * dr;
        if (e == 0 || e > radius_sq) continue;
        const Cell t{c.col + dc, c.row + dr};
        if (!grid.in_bounds(t)) continue;
        const std::size_t ti = grid.index(t);
        if (field.distance[ti] < own) {
          candidates.push_back({field.distance[ti], e, ti});
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      if (a.euclid_sq != b.euclid_sq) return a.euclid_sq < b.euclid_sq;
      return a.index < b.index;
    });

    Vec2 direction;
    for (const Candidate& cand : candidates) {
      const Cell t = grid.cell_at(cand.index);
      if (ray_cast(grid, c, t) &&
          !corners.grazes(c, t, corner_clearance, is_departure(grid.at(t)))) {
        direction = normalized(grid.center(t) - grid.center(c));
        break;
      }
    }
    bool descends = false;
    if (direction != Vec2{}) {
      const auto next = aligned_neighbor(grid, c, direction);
      descends = next && field.distance[grid.index(*next)] < own;
    }
    if (!descends) {
      const auto next = steepest_descent(grid, field.distance, c);
      direction = next ? normalized(grid.center(*next) - grid.center(c)) : Vec2{};
    }
    field.vectors[i] = direction;
  }
  return field;
}

FieldSample field_lookup(const FlowField& field, Vec2 position) {
  const double fx = std::floor(position.x / field.cell_size);
  const double fy = std::floor(position.y / field.cell_size);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < field.width && fy < field.height)) {
    return {Vec2{}, true};
  }
  const Cell c{static_cast<int>(fx), static_cast<int>(fy)};
  const std::size_t idx = field.index(c);
  if (field.obstacle[idx] != 0) {
    return {Vec2{}, true};
  }
  return {field.vectors[idx], false};
}

}  // namespace evac
