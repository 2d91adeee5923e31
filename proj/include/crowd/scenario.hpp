#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "crowd/field.hpp"
#include "crowd/geometry.hpp"
#include "crowd/interaction.hpp"
#include "crowd/potential.hpp"
#include "crowd/transport.hpp"

namespace crowd {

struct ObstacleSpec {
  CellRect rect;
  FaceCondition bc = FaceCondition::dirichlet(0.0);

  friend bool operator==(const ObstacleSpec&, const ObstacleSpec&) = default;
};

struct GeometrySpec {
  int m = 64;
  std::vector<ObstacleSpec> obstacles;
  std::vector<BoundaryRun> targets;
  std::vector<BoundaryRun> inlets;  // run id is the owning population id

  friend bool operator==(const GeometrySpec&, const GeometrySpec&) = default;
};

/// Initial density block: constant `density` on the half-open cell rectangle.
struct Blob {
  CellRect rect;
  double density = 0.0;

  friend bool operator==(const Blob&, const Blob&) = default;
};

/// Boundary injection: after every transport step in [first_step, last_step] the
/// density on `cells` is raised to at least `density`. last_step < 0 means forever.
struct InflowRun {
  BoundaryRun cells;
  double density = 0.0;
  int first_step = 0;
  int last_step = -1;

  bool active(int step) const { return step >= first_step && (last_step < 0 || step <= last_step); }

  friend bool operator==(const InflowRun&, const InflowRun&) = default;
};

struct PopulationConfig {
  int id = 1;
  std::vector<Blob> blobs;
  std::vector<int> targets;      // target runs that attract and absorb this population
  std::vector<int> exit_inlets;  // populations whose inlet cells absorb this population
  InteractionParams interaction;
  std::array<FaceCondition, 4> walls{};
  std::map<int, FaceCondition> inlet_bc;
  double target_value = 1.0;
  std::vector<InflowRun> inflows;

  friend bool operator==(const PopulationConfig&, const PopulationConfig&) = default;
};

struct PhysicsSpec {
  double alpha = 1.0;
  double dt = 0.0;
  bool retrograde_guard = false;
  double grad_eps = 0.0;  // 0 selects 1e-6 * alpha * m
  double solver_tol = 1e-8;
  int solver_max_iter = 0;  // 0 selects 200 * m^2

  friend bool operator==(const PhysicsSpec&, const PhysicsSpec&) = default;
};

struct ScheduleSpec {
  int n_steps = 0;
  int snapshot_every = 1;
  double mass_epsilon = 1e-6;  // relative to initial plus injected mass

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct OutputSpec {
  std::string directory = "out";
  bool matrices = true;
  bool images = false;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Scenario {
  std::string name = "scenario";
  GeometrySpec geometry;
  PhysicsSpec physics;
  std::vector<PopulationConfig> populations;
  ScheduleSpec schedule;
  OutputSpec output;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline Grid build_grid(const GeometrySpec& g) {
  std::vector<CellRect> rects;
  for (const auto& o : g.obstacles) rects.push_back(o.rect);
  return build_grid(g.m, rects, g.targets, g.inlets);
}

inline BoundaryConditionSet boundary_conditions(const Scenario& s, const PopulationConfig& p) {
  BoundaryConditionSet bcs;
  bcs.walls = p.walls;
  bcs.target_value = p.target_value;
  bcs.targets = p.targets;
  if (bcs.targets.empty()) bcs.targets.push_back(-1);  // attract to no run
  for (const auto& o : s.geometry.obstacles) bcs.obstacles[o.rect.id] = o.bc;
  bcs.inlets = p.inlet_bc;
  return bcs;
}

inline std::vector<CellKind> exit_labels(const PopulationConfig& p) {
  std::vector<CellKind> labels;
  for (int t : p.targets) labels.push_back({CellType::target, t});
  for (int q : p.exit_inlets) labels.push_back({CellType::inlet, q});
  return labels;
}

struct ValidationResult {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

/// Structural and physical checks; the grid is built to surface geometry conflicts.
inline ValidationResult validate(const Scenario& s) {
  ValidationResult r;
  auto err = [&](std::string msg) { r.errors.push_back(std::move(msg)); };
  const auto& g = s.geometry;
  const auto& ph = s.physics;

  if (g.m < 4) err("geometry.m must be at least 4");
  if (!(ph.dt > 0.0)) err("dt must be positive");
  if (!(ph.alpha > 0.0)) err("alpha must be positive");
  if (!(ph.solver_tol > 0.0)) err("solver_tol must be positive");
  if (ph.grad_eps < 0.0) err("grad_eps must be nonnegative");
  if (s.schedule.n_steps < 0) err("n_steps must be nonnegative");
  if (s.schedule.snapshot_every < 1) err("snapshot_every must be at least 1");
  if (!(s.schedule.mass_epsilon >= 0.0)) err("mass_epsilon must be nonnegative");
  if (s.populations.empty()) err("at least one population is required");

  std::set<int> obstacle_ids, target_ids, pop_ids;
  for (const auto& o : g.obstacles)
    if (!obstacle_ids.insert(o.rect.id).second)
      err("obstacle id " + std::to_string(o.rect.id) + " declared twice");
  for (const auto& t : g.targets)
    if (!target_ids.insert(t.id).second) err("target id " + std::to_string(t.id) + " declared twice");
  for (const auto& p : s.populations)
    if (!pop_ids.insert(p.id).second) err("population id " + std::to_string(p.id) + " declared twice");
  for (const auto& in : g.inlets)
    if (!pop_ids.contains(in.id)) err("inlet refers to unknown population " + std::to_string(in.id));

  if (!r.ok()) return r;

  Grid grid;
  try {
    grid = build_grid(g);
  } catch (const Error& e) {
    err(e.what());
    return r;
  }

  const std::size_t npop = s.populations.size();
  for (std::size_t pi = 0; pi < npop; ++pi) {
    const auto& p = s.populations[pi];
    const std::string who = "population " + std::to_string(p.id);
    const auto& ip = p.interaction;
    if (ip.beta.size() != npop)
      err(who + ": beta has " + std::to_string(ip.beta.size()) + " entries, expected " +
          std::to_string(npop));
    for (std::size_t j = 0; j < ip.beta.size() && j < npop; ++j)
      if (j != pi && ip.beta[j] < 0.0) err(who + ": cross coupling beta must be nonnegative");
    if (!(ip.spec.radius > 0.0)) err(who + ": radius must be positive");
    if (!(ip.spec.theta_max > 0.0 && ip.spec.theta_max <= std::numbers::pi / 2))
      err(who + ": theta_max must lie in (0, pi/2]");
    if (!(ip.wall_density >= 0.0)) err(who + ": wall_density must be nonnegative");
    for (int t : p.targets)
      if (!target_ids.contains(t)) err(who + ": unknown target " + std::to_string(t));
    for (int q : p.exit_inlets) {
      if (!pop_ids.contains(q)) err(who + ": exit_inlets names unknown population " + std::to_string(q));
      if (q == p.id) err(who + ": a population cannot exit through its own inlet");
    }
    for (const auto& [id, bc] : p.inlet_bc)
      if (!pop_ids.contains(id)) err(who + ": inlet_bc names unknown inlet " + std::to_string(id));
    double wall_max = -INFINITY;
    for (const auto& w : p.walls)
      if (w.type == BcType::dirichlet) wall_max = std::max(wall_max, w.value);
    for (const auto& o : g.obstacles)
      if (o.bc.type == BcType::dirichlet) wall_max = std::max(wall_max, o.bc.value);
    if (!p.targets.empty() && !(p.target_value > wall_max))
      err(who + ": target_value must exceed every wall value");

    const ExitSet exits(grid, exit_labels(p));
    for (const auto& b : p.blobs) {
      const auto& rc = b.rect;
      if (!(b.density >= 0.0)) err(who + ": blob density must be nonnegative");
      if (rc.i0 < 0 || rc.k0 < 0 || rc.i1 > g.m || rc.k1 > g.m || rc.i0 >= rc.i1 || rc.k0 >= rc.k1) {
        err(who + ": blob lies outside the grid");
        continue;
      }
      for (int k = rc.k0; k < rc.k1; ++k)
        for (int i = rc.i0; i < rc.i1; ++i) {
          if (grid.is_obstacle(i, k)) {
            err(who + ": blob covers obstacle " + std::to_string(grid.kind(i, k).id));
            k = rc.k1;
            break;
          }
          if (exits.slot(i, k) >= 0) {
            err(who + ": blob covers one of its exits");
            k = rc.k1;
            break;
          }
        }
    }
    for (const auto& f : p.inflows) {
      if (!(f.density >= 0.0)) err(who + ": inflow density must be nonnegative");
      if (f.cells.length <= 0 || f.cells.start < 0 || f.cells.start + f.cells.length > g.m) {
        err(who + ": inflow runs outside the grid");
        continue;
      }
      for (auto c : run_cells(f.cells, g.m))
        if (!(grid.kind(c) == CellKind{CellType::inlet, p.id})) {
          err(who + ": inflow cell (" + std::to_string(c.i) + "," + std::to_string(c.k) +
              ") is not an inlet of this population");
          break;
        }
    }
  }
  if (ph.alpha * ph.dt > grid.h())
    r.warnings.push_back("alpha * dt exceeds h, the first step will violate CFL");
  return r;
}

inline void require_valid(const Scenario& s) {
  const auto v = validate(s);
  if (!v.ok()) {
    std::string msg;
    for (const auto& e : v.errors) msg += (msg.empty() ? "" : "; ") + e;
    throw Error(ErrorCode::validation_error, msg);
  }
}

}  // namespace crowd
