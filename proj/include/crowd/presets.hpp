#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "crowd/scenario.hpp"

namespace crowd::presets {

/// Upper bound on |nu| used to size the time step. In mass-dependent mode the
/// half-ball moment of a density bounded by rho_ref gives (pi/3) R^2 rho_ref sum|beta|;
/// mass-independent mode is bounded by max|beta|.
inline double interaction_speed_bound(const InteractionParams& ip, double rho_ref) {
  double sum = 0.0, mx = 0.0;
  for (double b : ip.beta) {
    sum += std::abs(b);
    mx = std::max(mx, std::abs(b));
  }
  if (ip.mode == InteractionMode::mass_independent) return mx;
  return std::numbers::pi / 3 * ip.spec.radius * ip.spec.radius * rho_ref * sum;
}

/// dt = 0.5 h / (alpha + bound), the largest bound over the populations.
inline double stable_dt(const Scenario& s, double rho_ref) {
  double bound = 0.0;
  for (const auto& p : s.populations) bound = std::max(bound, interaction_speed_bound(p.interaction, rho_ref));
  return 0.5 / s.geometry.m / (s.physics.alpha + bound);
}

namespace detail {

inline int at(double fraction, int m) { return static_cast<int>(std::lround(fraction * m)); }

inline CellRect rect(int id, double x0, double y0, double x1, double y1, int m) {
  return {id, at(x0, m), at(y0, m), at(x1, m), at(y1, m)};
}

inline Blob blob(double x0, double y0, double x1, double y1, double density, int m) {
  return {rect(0, x0, y0, x1, y1, m), density};
}

inline PopulationConfig single_population(double beta, double radius, double wall_density) {
  PopulationConfig p;
  p.id = 1;
  p.interaction.beta = {beta};
  p.interaction.spec.radius = radius;
  p.interaction.spec.theta_max = std::numbers::pi / 2;
  p.interaction.spec.anisotropic = true;
  p.interaction.wall_density = wall_density;
  return p;
}

}  // namespace detail

/// A crowd in three groups heads for an exit at the end of a corridor between two
/// long thin obstacles. Corridor faces repel (u = 0), the outer faces of the
/// obstacles are zero-flux.
inline Scenario narrow_passage(int m = 128) {
  using detail::rect;
  Scenario s;
  s.name = "narrow_passage";
  s.geometry.m = m;
  const double x0 = 0.55, gap = 0.09, thick = 0.0625, mid = 0.5;
  const double lo = mid - gap / 2, hi = mid + gap / 2;
  const double skin = 1.0 / m;
  s.geometry.obstacles = {
      {rect(1, x0, lo - thick, 1.0, lo - skin, m), FaceCondition::neumann()},
      {rect(2, x0, lo - skin, 1.0, lo, m), FaceCondition::dirichlet(0.0)},
      {rect(3, x0, hi, 1.0, hi + skin, m), FaceCondition::dirichlet(0.0)},
      {rect(4, x0, hi + skin, 1.0, hi + thick, m), FaceCondition::neumann()},
  };
  s.geometry.targets = {{1, Side::right, detail::at(lo, m), detail::at(hi, m) - detail::at(lo, m)}};
  auto p = detail::single_population(60.0, 0.1, 1.0);
  p.targets = {1};
  p.blobs = {detail::blob(0.08, 0.62, 0.26, 0.84, 1.0, m), detail::blob(0.12, 0.16, 0.30, 0.38, 1.0, m),
             detail::blob(0.30, 0.42, 0.44, 0.60, 1.0, m)};
  s.populations = {p};
  s.physics.grad_eps = 1e-14;
  s.physics.dt = stable_dt(s, 1.0);
  s.schedule = {4000, 50, 1e-6};
  return s;
}

/// Two corridors side by side, each ending in its own exit. The crowd starts
/// closer to the lower one (target 1).
inline Scenario two_passages(int m = 128) {
  using detail::rect;
  Scenario s;
  s.name = "two_passages";
  s.geometry.m = m;
  const double x0 = 0.55, gap = 0.09, thick = 0.0625;
  const double skin = 1.0 / m;
  const double c1 = 0.34, c2 = 0.66;
  const double a = c1 - gap / 2, b = c1 + gap / 2, c = c2 - gap / 2, d = c2 + gap / 2;
  s.geometry.obstacles = {
      {rect(1, x0, a - thick, 1.0, a - skin, m), FaceCondition::neumann()},
      {rect(2, x0, a - skin, 1.0, a, m), FaceCondition::dirichlet(0.0)},
      {rect(3, x0, b, 1.0, b + skin, m), FaceCondition::dirichlet(0.0)},
      {rect(4, x0, b + skin, 1.0, c - skin, m), FaceCondition::neumann()},
      {rect(5, x0, c - skin, 1.0, c, m), FaceCondition::dirichlet(0.0)},
      {rect(6, x0, d, 1.0, d + skin, m), FaceCondition::dirichlet(0.0)},
      {rect(7, x0, d + skin, 1.0, d + thick, m), FaceCondition::neumann()},
  };
  s.geometry.targets = {{1, Side::right, detail::at(a, m), detail::at(b, m) - detail::at(a, m)},
                        {2, Side::right, detail::at(c, m), detail::at(d, m) - detail::at(c, m)}};
  auto p = detail::single_population(60.0, 0.1, 1.0);
  p.targets = {1, 2};
  p.blobs = {detail::blob(0.10, 0.10, 0.30, 0.32, 1.0, m), detail::blob(0.24, 0.22, 0.42, 0.40, 1.0, m)};
  s.populations = {p};
  s.physics.grad_eps = 1e-14;
  s.physics.dt = stable_dt(s, 1.0);
  s.schedule = {4000, 50, 1e-6};
  return s;
}

/// Room with two obstacles and an exit on the right wall.
inline Scenario two_obstacles(FaceCondition obstacle_bc, int m = 128) {
  using detail::rect;
  Scenario s;
  s.name = obstacle_bc.type == BcType::dirichlet ? "two_obstacles_dirichlet" : "two_obstacles_neumann";
  s.geometry.m = m;
  s.geometry.obstacles = {{rect(1, 0.35, 0.55, 0.50, 0.80, m), obstacle_bc},
                          {rect(2, 0.55, 0.20, 0.70, 0.45, m), obstacle_bc}};
  s.geometry.targets = {{1, Side::right, detail::at(0.40, m), detail::at(0.60, m) - detail::at(0.40, m)}};
  auto p = detail::single_population(60.0, 0.1, 1.0);
  p.targets = {1};
  p.blobs = {detail::blob(0.06, 0.35, 0.24, 0.65, 1.0, m)};
  s.populations = {p};
  s.physics.grad_eps = 1e-14;
  s.physics.dt = stable_dt(s, 1.0);
  s.schedule = {3000, 50, 1e-6};
  return s;
}

/// Compact group driven by u(x, y) = x: Dirichlet 0 on the left, exit along the
/// whole right wall, zero flux on top and bottom.
inline Scenario lanes(bool anisotropic = true, int m = 128) {
  Scenario s;
  s.name = anisotropic ? "lanes" : "clusters";
  s.geometry.m = m;
  s.geometry.targets = {{1, Side::right, 0, m}};
  auto p = detail::single_population(250.0, 0.1, 1.0);
  p.interaction.spec.anisotropic = anisotropic;
  p.targets = {1};
  p.walls[static_cast<std::size_t>(Side::bottom)] = FaceCondition::neumann();
  p.walls[static_cast<std::size_t>(Side::top)] = FaceCondition::neumann();
  p.blobs = {detail::blob(0.05, 0.25, 0.35, 0.75, 1.0, m)};
  s.populations = {p};
  s.physics.dt = stable_dt(s, 1.0);
  s.schedule = {1500, 20, 1e-6};
  return s;
}

/// Two opposing streams injected on the left (population 1) and right
/// (population 2) walls; each leaves through the other's inlet. Only the cross
/// couplings are nonzero. `perturbation` raises the injection density of
/// population 1 on the upper half of its inflow band.
inline Scenario crossing_flows(double perturbation = 1e-3, int m = 65) {
  Scenario s;
  s.name = perturbation != 0.0 ? "crossing_flows" : "crossing_flows_symmetric";
  s.geometry.m = m;
  s.geometry.inlets = {{1, Side::left, 0, m}, {2, Side::right, 0, m}};
  const double rho_in = 1.0, beta = 30.0;
  const int band0 = detail::at(0.25, m), band1 = m - band0;
  for (int id : {1, 2}) {
    PopulationConfig p;
    p.id = id;
    p.exit_inlets = {3 - id};
    p.interaction.beta = id == 1 ? std::vector<double>{0.0, beta} : std::vector<double>{beta, 0.0};
    p.interaction.spec = {0.1, std::numbers::pi / 2, true};
    p.interaction.wall_density = rho_in;
    p.walls[static_cast<std::size_t>(Side::bottom)] = FaceCondition::neumann();
    p.walls[static_cast<std::size_t>(Side::top)] = FaceCondition::neumann();
    p.inlet_bc = {{id, FaceCondition::dirichlet(0.0)}, {3 - id, FaceCondition::dirichlet(1.0)}};
    const Side side = id == 1 ? Side::left : Side::right;
    p.inflows = {{{id, side, band0, band1 - band0}, rho_in, 0, -1}};
    if (id == 1 && perturbation != 0.0) {
      const int half = (band0 + band1) / 2;
      p.inflows.push_back({{id, side, half, band1 - half}, rho_in * (1.0 + perturbation), 0, -1});
    }
    s.populations.push_back(p);
  }
  s.physics.dt = stable_dt(s, rho_in);
  s.schedule = {3000, 100, 1e-6};
  return s;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"narrow_passage", "two_passages", "two_obstacles_dirichlet",
                                          "two_obstacles_neumann", "lanes", "clusters", "crossing_flows"};
  return n;
}

inline std::optional<Scenario> by_name(const std::string& name) {
  if (name == "narrow_passage") return narrow_passage();
  if (name == "two_passages") return two_passages();
  if (name == "two_obstacles_dirichlet") return two_obstacles(FaceCondition::dirichlet(0.0));
  if (name == "two_obstacles_neumann") return two_obstacles(FaceCondition::neumann());
  if (name == "lanes") return lanes(true);
  if (name == "clusters") return lanes(false);
  if (name == "crossing_flows") return crossing_flows();
  return std::nullopt;
}

}  // namespace crowd::presets
