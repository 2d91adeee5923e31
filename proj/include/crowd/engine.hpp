#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowd/geometry.hpp"
#include "crowd/interaction.hpp"
#include "crowd/output.hpp"
#include "crowd/potential.hpp"
#include "crowd/scenario.hpp"
#include "crowd/transport.hpp"

namespace crowd {

struct PopulationState {
  int id = 0;
  PotentialField potential;
  DesiredVelocityField desired;
  ExitSet exits;
  double initial_mass = 0.0;
  double exited_cum = 0.0;
  double injected_cum = 0.0;
  std::vector<double> exited_by_slot;  // parallel to exits.labels()
};

struct SimulationState {
  int step = 0;
  double time = 0.0;
  Grid grid;
  std::vector<DensityField> densities;  // one per population, scenario order
  std::vector<PopulationState> populations;

  double mass(std::size_t p) const { return total_mass(densities[p], grid.h()); }
};

struct PopulationReport {
  int population = 0;
  StepReport transport;
  std::size_t guarded_cells = 0;
  double injected = 0.0;
};

/// Grid, one potential solve and desired field per population, initial densities.
inline SimulationState initialize(const Scenario& s) {
  require_valid(s);
  SimulationState st;
  st.grid = build_grid(s.geometry);
  const auto& grid = st.grid;
  const int m = grid.m();
  const double h = grid.h();

  for (const auto& p : s.populations) {
    PopulationState ps;
    ps.id = p.id;
    ps.exits = ExitSet(grid, exit_labels(p));
    ps.exited_by_slot.assign(ps.exits.size(), 0.0);

    ps.potential = solve_laplace(grid, boundary_conditions(s, p),
                                 {s.physics.solver_tol, s.physics.solver_max_iter});
    const std::string who = "population " + std::to_string(p.id);
    if (!ps.potential.ok()) {
      throw Error(*ps.potential.status, who + ": potential solve failed (residual " +
                                            format_double(ps.potential.residual) + ")");
    }
    const double eps = s.physics.grad_eps > 0.0 ? s.physics.grad_eps : default_grad_eps(s.physics.alpha, m);
    ps.desired = desired_velocity(ps.potential, grid, s.physics.alpha, eps);
    if (ps.desired.empty) throw Error(ErrorCode::no_target, who + ": potential has no usable gradient");

    DensityField rho(m, 0.0);
    std::vector<CellIndex> sources;
    for (const auto& b : p.blobs)
      for (int k = b.rect.k0; k < b.rect.k1; ++k)
        for (int i = b.rect.i0; i < b.rect.i1; ++i) {
          rho(i, k) += b.density;
          if (b.density > 0.0) sources.push_back({i, k});
        }
    for (const auto& f : p.inflows)
      for (auto c : run_cells(f.cells, m)) sources.push_back(c);
    if (ps.exits.size() > 0) {
      std::sort(sources.begin(), sources.end());
      sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
      const auto& ex = ps.exits;
      require_exit_reachable(grid, sources, [&](CellIndex c) { return ex.slot(c.i, c.k) >= 0; }, who);
    }
    ps.initial_mass = total_mass(rho, h);
    st.densities.push_back(std::move(rho));
    st.populations.push_back(std::move(ps));
  }
  return st;
}

/// Total velocity of every population against the frozen densities of the current step.
inline std::vector<TotalVelocity> step_velocities(const SimulationState& st, const Scenario& s) {
  std::vector<TotalVelocity> out;
  out.reserve(st.populations.size());
  for (std::size_t p = 0; p < st.populations.size(); ++p) {
    const auto& cfg = s.populations[p];
    const auto& desired = st.populations[p].desired;
    const bool coupled =
        std::any_of(cfg.interaction.beta.begin(), cfg.interaction.beta.end(), [](double b) { return b != 0.0; });
    const VectorField nu = coupled ? interaction_velocity(st.densities, static_cast<int>(p), desired, st.grid,
                                                          cfg.interaction)
                                   : VectorField(st.grid.m());
    out.push_back(total_velocity(desired, nu, s.physics.retrograde_guard));
  }
  return out;
}

/// One simultaneous step of all populations: interaction, CFL gate, push-forward, inflow.
inline std::vector<PopulationReport> advance(SimulationState& st, const Scenario& s) {
  const auto velocities = step_velocities(st, s);
  const double dt = s.physics.dt;
  const double h = st.grid.h();

  for (std::size_t p = 0; p < velocities.size(); ++p) {
    const double ratio = check_cfl(velocities[p].v, dt, st.grid);
    if (ratio > 1.0) {
      throw Error(ErrorCode::cfl_violation, "population " + std::to_string(st.populations[p].id) +
                                                " at step " + std::to_string(st.step) + ": CFL ratio " +
                                                format_double(ratio));
    }
  }

  std::vector<PopulationReport> reports;
  std::vector<DensityField> next;
  next.reserve(velocities.size());
  for (std::size_t p = 0; p < velocities.size(); ++p) {
    auto& ps = st.populations[p];
    auto res = push_forward_step(st.densities[p], velocities[p].v, dt, st.grid, ps.exits);

    double injected = 0.0;
    for (const auto& f : s.populations[p].inflows) {
      if (!f.active(st.step)) continue;
      for (auto c : run_cells(f.cells, st.grid.m())) {
        double& r = res.rho[c];
        if (r < f.density) {
          injected += f.density - r;
          r = f.density;
        }
      }
    }
    injected *= h * h;
    if (injected > 0.0) {
      res.report.mass_after = total_mass(res.rho, h);
      for (double r : res.rho.data()) res.report.max_density = std::max(res.report.max_density, r);
    }

    ps.exited_cum += res.report.mass_exited;
    ps.injected_cum += injected;
    for (std::size_t k = 0; k < ps.exited_by_slot.size(); ++k) ps.exited_by_slot[k] += res.report.exited_by_slot[k];
    reports.push_back({ps.id, std::move(res.report), velocities[p].guarded_cells, injected});
    next.push_back(std::move(res.rho));
  }
  st.densities = std::move(next);
  ++st.step;
  st.time = st.step * dt;
  return reports;
}

struct RunOptions {
  bool write_files = true;
  std::optional<int> steps;           // overrides schedule.n_steps
  std::optional<int> snapshot_every;  // overrides schedule.snapshot_every
  std::optional<std::filesystem::path> directory;
  std::optional<bool> images;
  std::function<void(const SimulationState&, std::span<const PopulationReport>)> observer;
};

struct RunSummary {
  SimulationState final_state;
  int steps_run = 0;
  bool drained = false;
  std::optional<std::string> truncation;
  std::vector<MetricsRow> metrics;
};

namespace detail {

inline bool inflow_pending(const Scenario& s, int step) {
  for (const auto& p : s.populations)
    for (const auto& f : p.inflows)
      if (f.last_step < 0 || f.last_step >= step) return true;
  return false;
}

inline bool drained(const SimulationState& st, const Scenario& s) {
  if (inflow_pending(s, st.step)) return false;
  double now = 0.0, ref = 0.0;
  for (std::size_t p = 0; p < st.populations.size(); ++p) {
    now += st.mass(p);
    ref += st.populations[p].initial_mass + st.populations[p].injected_cum;
  }
  return now <= s.schedule.mass_epsilon * ref;
}

}  // namespace detail

/// Full run with snapshots on the schedule and one metrics row per population per step.
/// A runtime failure keeps the outputs written so far and marks the metrics as truncated.
inline RunSummary run(const Scenario& s, const RunOptions& opts = {}) {
  RunSummary out;
  out.final_state = initialize(s);
  auto& st = out.final_state;
  const int n_steps = opts.steps.value_or(s.schedule.n_steps);
  const int every = opts.snapshot_every.value_or(s.schedule.snapshot_every);
  const bool images = opts.images.value_or(s.output.images);
  const std::filesystem::path dir = opts.directory.value_or(std::filesystem::path(s.output.directory));

  std::ofstream metrics_file;
  std::optional<MetricsWriter> metrics;
  if (opts.write_files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
    metrics_file.open(dir / "metrics.csv");
    if (!metrics_file) throw Error(ErrorCode::io_error, "cannot open " + (dir / "metrics.csv").string());
    metrics.emplace(metrics_file);
  }
  auto snapshot = [&] {
    if (!opts.write_files) return;
    for (std::size_t p = 0; p < st.populations.size(); ++p) {
      const auto stem = snapshot_stem(st.populations[p].id, st.step);
      if (s.output.matrices) write_matrix(dir / (stem + ".txt"), st.densities[p]);
      if (images) write_graymap(dir / (stem + ".pgm"), st.densities[p]);
    }
  };

  snapshot();
  out.drained = detail::drained(st, s);
  while (out.steps_run < n_steps && !out.drained) {
    std::vector<PopulationReport> reports;
    try {
      reports = advance(st, s);
    } catch (const Error& e) {
      out.truncation = e.what();
      if (metrics) {
        metrics->truncate(st.step, e.what());
        metrics_file.flush();
      }
      throw;
    }
    ++out.steps_run;
    for (std::size_t p = 0; p < reports.size(); ++p) {
      const auto& ps = st.populations[p];
      MetricsRow row{st.step, st.time, ps.id, reports[p].transport.mass_after, ps.exited_cum,
                     ps.injected_cum, reports[p].transport.max_density, reports[p].transport.cfl_ratio,
                     reports[p].guarded_cells};
      out.metrics.push_back(row);
      if (metrics) metrics->write(row);
    }
    if (opts.observer) opts.observer(st, reports);
    out.drained = detail::drained(st, s);
    if (st.step % every == 0 || out.drained || out.steps_run == n_steps) snapshot();
  }
  return out;
}

}  // namespace crowd
