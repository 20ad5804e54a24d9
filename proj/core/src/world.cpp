#include "evac/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <fmt/format.h>
#include <thread>

#include "evac/random.hpp"

namespace evac {

namespace {

Region make_region(RegionKind kind, int index, const CellGrid& grid, const Band& departure,
                   const std::optional<Band>& arrival, int next, double speed_factor,
                   const WorldConfig& config, const FlowField* cached) {
  Region r;
  r.kind = kind;
  r.index = index;
  r.grid = grid;
  r.departure = departure;
  r.arrival = arrival;
  r.next = next;
  r.speed_factor = speed_factor;
  r.field = cached != nullptr ? *cached : compute_flow_field(grid, config.visibility_radius);
  r.walls = WallMap(grid, config.forces.interaction_cutoff);
  return r;
}

void apply_override(Region& region, const WorldConfig& config) {
  if (!config.floor_field_override) return;
  const FlowField& f = *config.floor_field_override;
  if (f.width != region.grid.width() || f.height != region.grid.height()) {
    throw std::invalid_argument(fmt::format("override field is {}x{}, floor grid is {}x{}",
                                            f.width, f.height, region.grid.width(),
                                            region.grid.height()));
  }
  region.field = f;
}

// Standard normal pair keyed on (seed, step, agent); independent of the order
// agents are processed in.
Vec2 fluctuation_force(std::uint64_t seed, std::uint64_t step, int id) {
  const std::uint64_t key = derive_seed(derive_seed(seed, step), static_cast<std::uint64_t>(id));
  const double u1 = unit_double(splitmix64(key));
  const double u2 = unit_double(splitmix64(key ^ 0xA5A5A5A5A5A5A5A5ULL));
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace

std::vector<Region> make_regions(const Building& building, const WorldConfig& config) {
  const int floors = building.floor_count();
  std::vector<Region> regions;
  regions.reserve(static_cast<std::size_t>(floors + building.staircase_count()));
  const FlowField* upper_field = nullptr;
  for (int n = 0; n < floors; ++n) {
    const FloorPlan& plan = building.floor(n);
    const int next = n == 0 ? kBuildingExit : floors + (n - 1);
    regions.push_back(make_region(RegionKind::Floor, n, plan.grid, plan.departure, plan.arrival,
                                  next, 1.0, config, n >= 2 ? upper_field : nullptr));
    apply_override(regions.back(), config);
    if (n == 1) upper_field = &regions.back().field;
  }
  const FlowField* stair_field = nullptr;
  for (int k = 0; k < building.staircase_count(); ++k) {
    const Staircase& s = building.staircase(k);
    regions.push_back(make_region(RegionKind::Staircase, k, s.unfolded, s.departure, s.arrival, k,
                                  config.stair_speed_factor, config, stair_field));
    if (k == 0) stair_field = &regions.back().field;
  }
  return regions;
}

std::vector<Region> make_regions(const FloorPlan& floor, const WorldConfig& config) {
  std::vector<Region> regions;
  regions.push_back(make_region(RegionKind::Floor, 0, floor.grid, floor.departure, floor.arrival,
                                kBuildingExit, 1.0, config, nullptr));
  apply_override(regions.back(), config);
  return regions;
}

void NeighborIndex::rebuild(std::span<const Agent> agents, std::span<const Region> regions,
                            double cell) {
  cell_ = cell;
  grids_.resize(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    Grid& g = grids_[r];
    g.nx = static_cast<int>(std::ceil(regions[r].grid.width_m() / cell)) + 1;
    g.ny = static_cast<int>(std::ceil(regions[r].grid.height_m() / cell)) + 1;
    g.offsets.assign(static_cast<std::size_t>(g.nx * g.ny) + 1, 0);
    g.entries.clear();
  }
  auto bucket = [&](const Grid& g, Vec2 p) {
    const int ix = std::clamp(static_cast<int>(std::floor(p.x / cell_)), 0, g.nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(p.y / cell_)), 0, g.ny - 1);
    return static_cast<std::size_t>(iy * g.nx + ix);
  };
  // Counting sort keeps each bucket in ascending agent index.
  for (const Agent& a : agents) {
    if (!a.active()) continue;
    Grid& g = grids_[static_cast<std::size_t>(a.region)];
    ++g.offsets[bucket(g, a.position) + 1];
  }
  for (Grid& g : grids_) {
    for (std::size_t i = 1; i < g.offsets.size(); ++i) g.offsets[i] += g.offsets[i - 1];
    g.entries.resize(g.offsets.back());
  }
  std::vector<std::vector<std::uint32_t>> fill(grids_.size());
  for (std::size_t r = 0; r < grids_.size(); ++r) {
    fill[r].assign(grids_[r].offsets.begin(), grids_[r].offsets.end() - 1);
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Agent& a = agents[i];
    if (!a.active()) continue;
    const auto r = static_cast<std::size_t>(a.region);
    Grid& g = grids_[r];
    g.entries[fill[r][bucket(g, a.position)]++] = static_cast<std::uint32_t>(i);
  }
}

void NeighborIndex::candidates(int region, Vec2 p, std::vector<std::uint32_t>& out) const {
  out.clear();
  const Grid& g = grids_[static_cast<std::size_t>(region)];
  const int ix = std::clamp(static_cast<int>(std::floor(p.x / cell_)), 0, g.nx - 1);
  const int iy = std::clamp(static_cast<int>(std::floor(p.y / cell_)), 0, g.ny - 1);
  for (int y = std::max(0, iy - 1); y <= std::min(g.ny - 1, iy + 1); ++y) {
    for (int x = std::max(0, ix - 1); x <= std::min(g.nx - 1, ix + 1); ++x) {
      const auto b = static_cast<std::size_t>(y * g.nx + x);
      out.insert(out.end(), g.entries.begin() + g.offsets[b], g.entries.begin() + g.offsets[b + 1]);
    }
  }
  std::sort(out.begin(), out.end());
}

World::World(std::vector<Region> regions, std::vector<Agent> agents, WorldConfig config,
             std::uint64_t rng_seed)
    : regions_(std::move(regions)),
      agents_(std::move(agents)),
      config_(std::move(config)),
      rng_seed_(rng_seed) {
  double max_radius = 0.0;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Agent& a = agents_[i];
    if (a.id != static_cast<int>(i)) {
      throw std::invalid_argument("agent ids must equal their index");
    }
    if (!a.params.valid()) {
      throw std::invalid_argument(fmt::format("agent {} has invalid physical parameters", a.id));
    }
    if (a.region < 0 || a.region >= static_cast<int>(regions_.size())) {
      throw std::invalid_argument(fmt::format("agent {} in unknown region {}", a.id, a.region));
    }
    max_radius = std::max(max_radius, a.params.radius);
  }
  if (!config_.forces.valid(max_radius)) {
    throw std::invalid_argument("force parameters must be positive and the cutoff must cover "
                                "two radii plus five social ranges");
  }
  if (config_.workers < 1) {
    throw std::invalid_argument("need at least one worker");
  }
  outgoing_.assign(regions_.size(), -1);
  incoming_.assign(regions_.size(), {});
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    const int next = regions_[r].next;
    if (next == kBuildingExit) continue;
    if (next < 0 || next >= static_cast<int>(regions_.size())) {
      throw std::invalid_argument(fmt::format("region {} leads to unknown region {}", r, next));
    }
    seams_.push_back(make_seam(regions_[r], regions_[static_cast<std::size_t>(next)],
                               static_cast<int>(r), next));
    outgoing_[r] = static_cast<int>(seams_.size() - 1);
    incoming_[static_cast<std::size_t>(next)].push_back(static_cast<int>(seams_.size() - 1));
  }
  activate();
  index_.rebuild(agents_, regions_, config_.forces.interaction_cutoff);
}

int World::count(AgentStatus status) const {
  return static_cast<int>(std::count_if(agents_.begin(), agents_.end(),
                                        [&](const Agent& a) { return a.status == status; }));
}

void World::activate() {
  for (Agent& a : agents_) {
    if (a.status == AgentStatus::Inert && a.start_time <= time_) {
      a.status = AgentStatus::Active;
    }
  }
}

std::optional<Agent> World::view_from(std::size_t i, std::size_t j) const {
  const Agent& a = agents_.at(i);
  const Agent& b = agents_.at(j);
  if (!a.active() || !b.active()) return std::nullopt;
  if (a.region == b.region) return b;
  const int out = outgoing_[static_cast<std::size_t>(a.region)];
  if (out >= 0 && seams_[static_cast<std::size_t>(out)].to == b.region) {
    const Seam& seam = seams_[static_cast<std::size_t>(out)];
    if (!seam.through_opening(seam.forward(a.position), b.position)) return std::nullopt;
    Agent image = b;
    image.position = seam.backward(b.position);
    image.velocity = seam.rotate_backward(b.velocity);
    return image;
  }
  for (const int k : incoming_[static_cast<std::size_t>(a.region)]) {
    const Seam& seam = seams_[static_cast<std::size_t>(k)];
    if (seam.from != b.region) continue;
    Agent image = b;
    image.position = seam.forward(b.position);
    image.velocity = seam.rotate_forward(b.velocity);
    if (!seam.through_opening(a.position, image.position)) return std::nullopt;
    return image;
  }
  return std::nullopt;
}

void World::gather(std::size_t i, std::vector<std::uint32_t>& scratch,
                   std::vector<std::pair<std::uint32_t, Agent>>& out) const {
  out.clear();
  const Agent& a = agents_[i];
  const double cutoff = config_.forces.interaction_cutoff;
  index_.candidates(a.region, a.position, scratch);
  for (const std::uint32_t j : scratch) {
    if (j == i) continue;
    if (norm(a.position - agents_[j].position) <= cutoff) out.emplace_back(j, agents_[j]);
  }
  auto across = [&](int region, Vec2 probe) {
    index_.candidates(region, probe, scratch);
    for (const std::uint32_t j : scratch) {
      auto image = view_from(i, j);
      if (image && norm(a.position - image->position) <= cutoff) out.emplace_back(j, *image);
    }
  };
  const int k_out = outgoing_[static_cast<std::size_t>(a.region)];
  if (k_out >= 0) {
    const Seam& seam = seams_[static_cast<std::size_t>(k_out)];
    if (seam.depth_from(a.position) >= -cutoff) across(seam.to, seam.forward(a.position));
  }
  for (const int k : incoming_[static_cast<std::size_t>(a.region)]) {
    const Seam& seam = seams_[static_cast<std::size_t>(k)];
    if (seam.depth_to(a.position) <= cutoff) across(seam.from, seam.backward(a.position));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
}

std::vector<std::uint32_t> World::neighbors(std::size_t i) const {
  std::vector<std::uint32_t> out;
  if (!agents_.at(i).active()) return out;
  std::vector<std::uint32_t> scratch;
  std::vector<std::pair<std::uint32_t, Agent>> found;
  gather(i, scratch, found);
  for (const auto& entry : found) out.push_back(entry.first);
  return out;
}

void World::evaluate_range(std::size_t begin, std::size_t end, std::span<AgentForces> out) const {
  std::vector<std::uint32_t> scratch;
  std::vector<std::pair<std::uint32_t, Agent>> found;
  const ForceParams& fp = config_.forces;
  for (std::size_t i = begin; i < end; ++i) {
    const Agent& a = agents_[i];
    AgentForces f;
    if (!a.active()) {
      out[i] = f;
      continue;
    }
    const Region& region = regions_[static_cast<std::size_t>(a.region)];
    const FieldSample e = field_lookup(region.field, a.position);
    if (e.anomaly) f.flags |= kFieldOnObstacle;
    f.driving = driving_force(a, e.direction, a.params.desired_speed * region.speed_factor);

    gather(i, scratch, found);
    for (const auto& [j, b] : found) {
      bool coincident = false;
      const Vec2 fij = agent_agent_force(a, b, fp, &coincident);
      f.agents += fij;
      f.load += norm(fij);
      if (coincident) f.flags |= kCoincidentAgents;
    }

    bool inside = false;
    f.walls = agent_wall_force(a, region.walls, fp, &inside, &f.load);
    if (inside) f.flags |= kInsideObstacle;
    out[i] = f;
  }
}

std::vector<AgentForces> World::evaluate_forces() const {
  std::vector<AgentForces> out(agents_.size());
  const std::size_t n = agents_.size();
  const auto workers = static_cast<std::size_t>(config_.workers);
  if (workers <= 1 || n < 2 * workers) {
    evaluate_range(0, n, out);
    return out;
  }
  // Each worker owns a contiguous slice; the per-agent result does not depend
  // on the partition.
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = std::min(n, w * chunk);
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back([this, b, e, &out] { evaluate_range(b, e, out); });
  }
  evaluate_range(0, std::min(n, chunk), out);
  pool.clear();
  return out;
}

bool World::arrival_blocked(const Agent& candidate, std::size_t self) const {
  for (std::size_t k = 0; k < agents_.size(); ++k) {
    const Agent& b = agents_[k];
    if (k == self || !b.active() || b.region != candidate.region) continue;
    if (norm(b.position - candidate.position) < b.params.radius + candidate.params.radius) {
      return true;
    }
  }
  return false;
}

void World::advance(double dt, std::span<const AgentForces> forces) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("time step must be positive");
  }
  if (forces.size() != agents_.size()) {
    throw std::invalid_argument("force vector does not match the agent count");
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const std::uint8_t flags = forces[i].flags;
    if (flags & kFieldOnObstacle) ++anomalies_["field_on_obstacle"];
    if (flags & kCoincidentAgents) ++anomalies_["coincident_agents"];
    if (flags & kInsideObstacle) ++anomalies_["inside_obstacle"];
  }

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Agent& a = agents_[i];
    if (!a.active()) continue;
    const Region& region = regions_[static_cast<std::size_t>(a.region)];
    Vec2 force = forces[i].total();
    if (config_.fluctuation > 0.0) {
      force += fluctuation_force(rng_seed_, steps_, a.id) * config_.fluctuation;
    }
    a.velocity += force * (dt / a.params.mass_kg);
    const double v_max = 1.5 * a.params.desired_speed * region.speed_factor;
    const double speed = norm(a.velocity);
    if (speed > v_max) {
      a.velocity = speed > 0.0 ? a.velocity * (v_max / speed) : Vec2{};
      ++anomalies_["speed_clamped"];
    }
    a.position += a.velocity * dt;
  }

  const double t_next = time_ + dt;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Agent& a = agents_[i];
    if (!a.active()) continue;
    const Region& region = regions_[static_cast<std::size_t>(a.region)];
    const double w = region.grid.width_m();
    const double h = region.grid.height_m();
    // A body pushed past an opening's outer edge has still crossed it.
    const Vec2 clamped{std::clamp(a.position.x, 0.0, std::nextafter(w, 0.0)),
                       std::clamp(a.position.y, 0.0, std::nextafter(h, 0.0))};
    const auto cell = region.grid.locate(clamped);
    bool deferred = false;
    if (cell && is_departure(region.grid.at(*cell))) {
      const double speed = norm(a.velocity);
      if (region.next == kBuildingExit) {
        a.status = AgentStatus::Evacuated;
        a.evacuated_at = t_next;
        crossings_.push_back({a.id, a.region, kBuildingExit, t_next, speed});
        continue;
      }
      Agent moved = transfer_agent(a, region, regions_[static_cast<std::size_t>(region.next)],
                                   region.next);
      if (arrival_blocked(moved, i)) {
        deferred = true;
        ++anomalies_["transfer_deferred"];
      } else {
        crossings_.push_back({a.id, a.region, moved.region, t_next, speed});
        a = moved;
        continue;
      }
    }
    // Only openings border the outside; hold agents that could not pass.
    if (clamped != a.position) {
      if (clamped.x != a.position.x) a.velocity.x = 0.0;
      if (clamped.y != a.position.y) a.velocity.y = 0.0;
      a.position = clamped;
      if (!deferred) ++anomalies_["position_clamped"];
    }
  }

  time_ = t_next;
  ++steps_;
  activate();
  index_.rebuild(agents_, regions_, config_.forces.interaction_cutoff);
}

std::vector<AgentForces> World::step(double dt) {
  auto forces = evaluate_forces();
  advance(dt, forces);
  return forces;
}

Seam make_seam(const Region& from, const Region& to, int from_index, int to_index) {
  if (!to.arrival) {
    throw std::invalid_argument("destination region has no arrival band");
  }
  Seam seam;
  seam.from = from_index;
  seam.to = to_index;
  seam.cell = from.grid.cell_size();
  seam.width = std::min(from.departure.width(from.grid.cell_size()),
                        to.arrival->width(to.grid.cell_size()));
  // The right-hand end of a band, for a walker passing through it, is the
  // endpoint furthest to the walker's right.
  seam.out_dir = from.departure.outward_normal();
  seam.out_left = perp(seam.out_dir);
  const auto [fa, fb] = from.departure.outer_edge(from.grid);
  seam.from_origin = dot(fa, seam.out_left) < dot(fb, seam.out_left) ? fa : fb;
  seam.in_dir = -to.arrival->outward_normal();
  seam.in_left = perp(seam.in_dir);
  const auto [ta, tb] = to.arrival->outer_edge(to.grid);
  seam.to_origin = dot(ta, seam.in_left) < dot(tb, seam.in_left) ? ta : tb;
  return seam;
}

bool Seam::through_opening(Vec2 a, Vec2 b) const {
  const double da = depth_to(a);
  const double db = depth_to(b);
  const double la = lateral_to(a);
  const double lb = lateral_to(b);
  auto inside = [&](double l) { return l >= 0.0 && l <= width; };
  if ((da < 0.0) != (db < 0.0)) {
    const double t = da / (da - db);
    return inside(la + t * (lb - la));
  }
  return inside(la) && inside(lb);
}

Agent transfer_agent(const Agent& agent, const Region& from, const Region& to, int to_region) {
  const Seam seam = make_seam(from, to, agent.region, to_region);
  const double width = to.arrival->width(to.grid.cell_size());
  const double r = agent.params.radius;
  const double offset = seam.lateral_from(agent.position);
  const double lateral = width >= 2.0 * r ? std::clamp(offset, r, width - r) : width / 2.0;
  // Keep the body just inside the destination even if it overshot the band.
  const double depth = std::clamp(seam.depth_from(agent.position), 1e-6, to.grid.cell_size());

  Agent moved = agent;
  moved.region = to_region;
  moved.position = seam.to_origin + seam.in_left * lateral + seam.in_dir * depth;
  Vec2 heading = field_lookup(to.field, moved.position).direction;
  if (heading == Vec2{}) heading = seam.in_dir;
  moved.velocity = heading * norm(agent.velocity);
  return moved;
}

namespace {

double distance_to_cell(Vec2 p, const CellGrid& grid, Cell c) {
  const double h = grid.cell_size();
  const double dx = std::max({0.0, c.col * h - p.x, p.x - (c.col + 1) * h});
  const double dy = std::max({0.0, c.row * h - p.y, p.y - (c.row + 1) * h});
  return std::hypot(dx, dy);
}

bool clear_of_walls(Vec2 p, double radius, const CellGrid& grid) {
  const double h = grid.cell_size();
  const int c0 = static_cast<int>(std::floor((p.x - radius) / h));
  const int c1 = static_cast<int>(std::floor((p.x + radius) / h));
  const int r0 = static_cast<int>(std::floor((p.y - radius) / h));
  const int r1 = static_cast<int>(std::floor((p.y + radius) / h));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const Cell cell{c, r};
      const bool solid = !grid.in_bounds(cell) || grid.at(cell) == CellKind::Obstacle;
      if (solid && distance_to_cell(p, grid, cell) < radius) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<Agent> spawn_agents(const FloorPlan& floor, int count, std::uint64_t rng_seed,
                                const AgentTemplate& agent_template, int region, int first_id,
                                double start_time) {
  if (count < 0) {
    throw std::invalid_argument("agent count must be nonnegative");
  }
  std::vector<Agent> agents;
  if (count == 0) return agents;

  const CellGrid& grid = floor.grid;
  std::vector<Cell> free_cells;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.cells()[i] == CellKind::Free) free_cells.push_back(grid.cell_at(i));
  }
  if (free_cells.empty()) {
    throw PlacementError("floor has no free cells to place agents on");
  }

  Rng rng(rng_seed);
  const double h = grid.cell_size();
  const std::uint64_t max_rejections = 10000ULL * static_cast<std::uint64_t>(count);
  agents.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Agent a;
    a.id = first_id + k;
    a.region = region;
    a.start_time = start_time;
    a.params = agent_template.base;
    if (agent_template.desired_speed_spread > 0.0) {
      a.params.desired_speed += rng.uniform(-1.0, 1.0) * agent_template.desired_speed_spread;
      a.params.desired_speed = std::max(0.0, a.params.desired_speed);
    }
    if (agent_template.radius_spread > 0.0) {
      a.params.radius += rng.uniform(-1.0, 1.0) * agent_template.radius_spread;
    }
    if (!a.params.valid()) {
      throw std::invalid_argument("agent template yields invalid parameters");
    }
    std::uint64_t rejections = 0;
    for (;;) {
      const Cell c = free_cells[rng.below(free_cells.size())];
      const Vec2 p{(c.col + rng.uniform()) * h, (c.row + rng.uniform()) * h};
      bool ok = clear_of_walls(p, a.params.radius, grid);
      for (const Agent& other : agents) {
        if (!ok) break;
        ok = norm(other.position - p) > other.params.radius + a.params.radius;
      }
      if (ok) {
        a.position = p;
        break;
      }
      if (++rejections > max_rejections) {
        throw PlacementError(fmt::format(
            "could not place agent {} of {} after {} attempts (floor overcrowded)", k + 1, count,
            max_rejections));
      }
    }
    agents.push_back(a);
  }
  return agents;
}

RunResult run_until_empty(World& world, const RunOptions& options) {
  if (!(options.dt > 0.0) || !(options.t_max > 0.0) || !(options.sample_interval > 0.0)) {
    throw std::invalid_argument("dt, t_max and sample interval must be positive");
  }
  const auto per_sample =
      std::max<std::int64_t>(1, std::llround(options.sample_interval / options.dt));
  RunResult result;
  result.trace.sample_interval = static_cast<double>(per_sample) * options.dt;
  result.trace.spawned = world.spawned();

  for (std::int64_t k = 0;; ++k) {
    const bool sample_now = k % per_sample == 0;
    if (!sample_now) {
      world.step(options.dt);
      continue;
    }
    const double t = static_cast<double>(k / per_sample) * result.trace.sample_interval;
    const bool done = world.count(AgentStatus::Evacuated) == world.spawned();
    const bool out_of_time = !done && t >= options.t_max;
    const auto forces = world.evaluate_forces();
    Sample s = record_sample(world, forces, options.metric);
    s.time = t;
    result.trace.samples.push_back(s);
    if (options.on_sample) options.on_sample(world, forces, s);
    if (done || out_of_time) {
      result.completed = done;
      break;
    }
    world.advance(options.dt, forces);
  }
  return result;
}

}  // namespace evac
