#include "evac/forces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evac/random.hpp"

namespace evac {

Vec2 driving_force(const Agent& agent, Vec2 direction, double desired_speed) {
  const AgentParams& p = agent.params;
  return (direction * desired_speed - agent.velocity) * (p.mass_kg / p.relaxation_time);
}

namespace {

constexpr double kCoincident = 1e-6;

Vec2 pair_direction(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  const double angle = 2.0 * std::numbers::pi * unit_double(splitmix64((lo << 32) ^ hi));
  return {std::cos(angle), std::sin(angle)};
}

// Normal/tangential repulsion for a separation `d` along unit normal `n`.
Vec2 repulsion(double contact_radius, double d, Vec2 n, Vec2 relative_velocity,
               const ForceParams& params) {
  const double overlap = contact_radius - d;
  const double compression = overlap > 0.0 ? overlap : 0.0;
  const Vec2 t = perp(n);
  const double normal_mag = params.social_strength * std::exp(overlap / params.social_range) +
                            params.body_stiffness * compression;
  const double tangential_mag = params.sliding_friction * compression * dot(relative_velocity, t);
  return n * normal_mag + t * tangential_mag;
}

}  // namespace

Vec2 agent_agent_force(const Agent& i, const Agent& j, const ForceParams& params,
                       bool* coincident) {
  const Vec2 diff = i.position - j.position;
  const double d = norm(diff);
  Vec2 n;
  if (d < kCoincident) {
    const Vec2 u = pair_direction(i.id, j.id);
    n = i.id < j.id ? u : -u;
    if (coincident != nullptr) *coincident = true;
  } else {
    n = diff / d;
  }
  return repulsion(i.params.radius + j.params.radius, d, n, j.velocity - i.velocity, params);
}

WallMap::WallMap(const CellGrid& grid, double cutoff) : grid_(grid) {
  if (!(cutoff > 0.0)) {
    throw std::invalid_argument("wall cutoff must be positive");
  }
  const double h = grid.cell_size();
  const int w = grid.width();
  const int ht = grid.height();
  auto obstacle = [&](int c, int r) {
    return grid.in_bounds({c, r}) && grid.at({c, r}) == CellKind::Obstacle;
  };
  auto open = [&](int c, int r) { return grid.in_bounds({c, r}) && is_walkable(grid.at({c, r})); };

  // Horizontal edges between rows r and r + 1.
  for (int r = 0; r + 1 < ht; ++r) {
    for (const int up : {1, -1}) {
      int start = -1;
      for (int c = 0; c <= w; ++c) {
        const bool edge = c < w && (up > 0 ? (obstacle(c, r) && open(c, r + 1))
                                           : (obstacle(c, r + 1) && open(c, r)));
        if (edge && start < 0) {
          start = c;
        } else if (!edge && start >= 0) {
          const double y = (r + 1) * h;
          segments_.push_back({{start * h, y}, {c * h, y}, {0.0, double(up)}});
          start = -1;
        }
      }
    }
  }
  // Vertical edges between columns c and c + 1.
  for (int c = 0; c + 1 < w; ++c) {
    for (const int right : {1, -1}) {
      int start = -1;
      for (int r = 0; r <= ht; ++r) {
        const bool edge = r < ht && (right > 0 ? (obstacle(c, r) && open(c + 1, r))
                                               : (obstacle(c + 1, r) && open(c, r)));
        if (edge && start < 0) {
          start = r;
        } else if (!edge && start >= 0) {
          const double x = (c + 1) * h;
          segments_.push_back({{x, start * h}, {x, r * h}, {double(right), 0.0}});
          start = -1;
        }
      }
    }
  }

  // Bucket each segment into every cell whose square lies within the cutoff.
  std::vector<std::vector<std::uint32_t>> per_cell(grid.size());
  const int reach = static_cast<int>(std::ceil(cutoff / h)) + 1;
  for (std::uint32_t s = 0; s < segments_.size(); ++s) {
    const WallSegment& seg = segments_[s];
    const double sx0 = std::min(seg.a.x, seg.b.x), sx1 = std::max(seg.a.x, seg.b.x);
    const double sy0 = std::min(seg.a.y, seg.b.y), sy1 = std::max(seg.a.y, seg.b.y);
    const int c0 = std::max(0, static_cast<int>(std::floor(sx0 / h)) - reach);
    const int c1 = std::min(w - 1, static_cast<int>(std::floor(sx1 / h)) + reach);
    const int r0 = std::max(0, static_cast<int>(std::floor(sy0 / h)) - reach);
    const int r1 = std::min(ht - 1, static_cast<int>(std::floor(sy1 / h)) + reach);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double dx = std::max({0.0, sx0 - (c + 1) * h, c * h - sx1});
        const double dy = std::max({0.0, sy0 - (r + 1) * h, r * h - sy1});
        if (std::hypot(dx, dy) <= cutoff) {
          per_cell[grid.index({c, r})].push_back(s);
        }
      }
    }
  }
  offsets_.reserve(grid.size() + 1);
  offsets_.push_back(0);
  for (const auto& list : per_cell) {
    buckets_.insert(buckets_.end(), list.begin(), list.end());
    offsets_.push_back(static_cast<std::uint32_t>(buckets_.size()));
  }
}

std::span<const std::uint32_t> WallMap::near(Cell cell) const {
  if (!grid_.in_bounds(cell)) {
    return {};
  }
  const std::size_t i = grid_.index(cell);
  return std::span<const std::uint32_t>(buckets_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

namespace {

Vec2 closest_point(const WallSegment& s, Vec2 p) {
  const Vec2 ab = s.b - s.a;
  const double len_sq = dot(ab, ab);
  const double t = len_sq > 0.0 ? std::clamp(dot(p - s.a, ab) / len_sq, 0.0, 1.0) : 0.0;
  return s.a + ab * t;
}

Vec2 push_out_of_obstacle(const Agent& agent, const CellGrid& grid, Cell cell,
                          const ForceParams& params) {
  const double h = grid.cell_size();
  const Vec2 p = agent.position;
  struct Face {
    double gap;
    Vec2 normal;
    Cell beyond;
  };
  const std::array<Face, 4> faces{{
      {(cell.col + 1) * h - p.x, {1.0, 0.0}, {cell.col + 1, cell.row}},
      {(cell.row + 1) * h - p.y, {0.0, 1.0}, {cell.col, cell.row + 1}},
      {p.x - cell.col * h, {-1.0, 0.0}, {cell.col - 1, cell.row}},
      {p.y - cell.row * h, {0.0, -1.0}, {cell.col, cell.row - 1}},
  }};
  const Face* best = nullptr;
  for (const Face& f : faces) {
    const bool exits = grid.in_bounds(f.beyond) && is_walkable(grid.at(f.beyond));
    if (exits && (best == nullptr || f.gap < best->gap)) best = &f;
  }
  if (best == nullptr) {
    for (const Face& f : faces) {
      if (best == nullptr || f.gap < best->gap) best = &f;
    }
  }
  const double r = agent.params.radius;
  return repulsion(r, 0.0, best->normal, -agent.velocity, params);
}

}  // namespace

Vec2 agent_wall_force(const Agent& agent, const WallMap& walls, const ForceParams& params,
                      bool* inside_obstacle, double* load) {
  const CellGrid& grid = walls.grid();
  const Vec2 p = agent.position;
  const auto located = grid.locate(p);
  if (located && grid.at(*located) == CellKind::Obstacle) {
    if (inside_obstacle != nullptr) *inside_obstacle = true;
    const Vec2 f = push_out_of_obstacle(agent, grid, *located, params);
    if (load != nullptr) *load += norm(f);
    return f;
  }
  Cell cell;
  if (located) {
    cell = *located;
  } else {
    const double h = grid.cell_size();
    cell = {std::clamp(static_cast<int>(std::floor(p.x / h)), 0, grid.width() - 1),
            std::clamp(static_cast<int>(std::floor(p.y / h)), 0, grid.height() - 1)};
  }

  Vec2 total;
  std::array<Vec2, 64> seen{};
  std::size_t seen_count = 0;
  const auto segments = walls.segments();
  for (const std::uint32_t idx : walls.near(cell)) {
    const WallSegment& seg = segments[idx];
    const Vec2 q = closest_point(seg, p);
    const Vec2 diff = p - q;
    if (dot(diff, seg.normal) <= 0.0) continue;
    const double d = norm(diff);
    if (d > params.interaction_cutoff) continue;
    const auto end = seen.begin() + static_cast<std::ptrdiff_t>(seen_count);
    if (std::find(seen.begin(), end, q) != end) continue;
    if (seen_count < seen.size()) seen[seen_count++] = q;
    const Vec2 f = repulsion(agent.params.radius, d, diff / d, -agent.velocity, params);
    if (load != nullptr) *load += norm(f);
    total += f;
  }
  return total;
}

}  // namespace evac
