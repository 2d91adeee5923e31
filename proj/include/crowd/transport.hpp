#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crowd/field.hpp"
#include "crowd/geometry.hpp"

namespace crowd {

using DensityField = ScalarField;

/// Cells that absorb a population's mass, each labeled with its exit slot.
class ExitSet {
 public:
  ExitSet() = default;

  ExitSet(const Grid& grid, std::vector<CellKind> absorbing)
      : labels_(std::move(absorbing)), slot_(grid.m(), -1) {
    for (int k = 0; k < grid.m(); ++k)
      for (int i = 0; i < grid.m(); ++i) {
        const auto& kind = grid.kind(i, k);
        for (std::size_t s = 0; s < labels_.size(); ++s)
          if (kind == labels_[s]) slot_(i, k) = static_cast<int>(s);
      }
  }

  /// Every target run of the grid, in declaration order.
  static ExitSet all_targets(const Grid& grid) {
    std::vector<CellKind> labels;
    for (const auto& t : grid.targets()) labels.push_back({CellType::target, t.id});
    return ExitSet(grid, std::move(labels));
  }

  int slot(int i, int k) const { return slot_.size() == 0 ? -1 : slot_(i, k); }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<CellKind>& labels() const noexcept { return labels_; }

 private:
  std::vector<CellKind> labels_;
  Field<int> slot_;
};

struct StepReport {
  double mass_before = 0.0;
  double mass_after = 0.0;
  double mass_exited = 0.0;
  std::vector<double> exited_by_slot;  // parallel to ExitSet::labels()
  double mass_blocked = 0.0;
  double max_density = 0.0;
  double cfl_ratio = 0.0;
};

inline double total_mass(const DensityField& rho, double h) {
  double s = 0.0;
  for (double r : rho.data()) s += r;
  return s * h * h;
}

/// dt * max over cells of max(|U1|, |U2|) / h. At most 1 is admissible.
inline double check_cfl(const VectorField& velocity, double dt, const Grid& grid) {
  double vmax = 0.0;
  for (const auto& v : velocity.data()) vmax = std::max({vmax, std::abs(v.x), std::abs(v.y)});
  return dt * vmax / grid.h();
}

/// Fractions of a cell edge that a translation by U*dt sends to offsets -1, 0, +1.
struct AxisSplit {
  std::array<double, 3> f{0.0, 1.0, 0.0};

  static AxisSplit of(double U, double dt, double h) {
    const double s = std::clamp(U * dt / h, -1.0, 1.0);
    return AxisSplit{{s < 0.0 ? -s : 0.0, 1.0 - std::abs(s), s > 0.0 ? s : 0.0}};
  }
  double to(int offset) const { return f[static_cast<std::size_t>(offset + 1)]; }
};

struct OverlapCoefficient {
  int dx = 0;
  int dy = 0;
  double area = 0.0;
};

/// Areas of the translated source cell falling into itself and its eight neighbors.
inline std::array<OverlapCoefficient, 9> overlap_coefficients(Vec2 U, double dt, double h) {
  if (std::abs(U.x) * dt > h || std::abs(U.y) * dt > h) {
    throw Error(ErrorCode::cfl_violation, "displacement exceeds one cell");
  }
  const auto sx = AxisSplit::of(U.x, dt, h);
  const auto sy = AxisSplit::of(U.y, dt, h);
  std::array<OverlapCoefficient, 9> out{};
  std::size_t n = 0;
  for (int oy = -1; oy <= 1; ++oy)
    for (int ox = -1; ox <= 1; ++ox) out[n++] = {ox, oy, (sx.to(ox) * h) * (sy.to(oy) * h)};
  return out;
}

/// Zeroes velocity components that would carry mass into a wall (obstacle or
/// outside the unit square). A blocked diagonal corner loses its smaller component.
inline Vec2 clamp_to_walls(Vec2 U, const Grid& grid, int i, int k) {
  if (U.x > 0.0 && grid.is_wall(i + 1, k)) U.x = 0.0;
  if (U.x < 0.0 && grid.is_wall(i - 1, k)) U.x = 0.0;
  if (U.y > 0.0 && grid.is_wall(i, k + 1)) U.y = 0.0;
  if (U.y < 0.0 && grid.is_wall(i, k - 1)) U.y = 0.0;
  if (U.x != 0.0 && U.y != 0.0) {
    const int sx = U.x > 0.0 ? 1 : -1;
    const int sy = U.y > 0.0 ? 1 : -1;
    if (grid.is_wall(i + sx, k + sy)) {
      if (std::abs(U.x) < std::abs(U.y)) U.x = 0.0;
      else U.y = 0.0;
    }
  }
  return U;
}

struct StepResult {
  DensityField rho;
  StepReport report;
};

namespace detail {

inline void require_nonnegative(const DensityField& rho) {
  for (double r : rho.data())
    if (!(r >= 0.0) || !std::isfinite(r))
      throw Error(ErrorCode::negative_density, "density must be finite and nonnegative");
}

}  // namespace detail

/// One step of the cell-wise push-forward under the piecewise translation x -> x + v(cell) dt.
///
/// new_rho(i) = sum_j rho(j) |E_i cap (E_j + v_j dt)| / h^2, gathered per destination
/// with left/right sources paired. Mass landing on an exit cell is removed and booked
/// under its exit slot.
inline StepResult push_forward_step(const DensityField& rho, const VectorField& velocity, double dt,
                                    const Grid& grid, const ExitSet& exits) {
  const int m = grid.m();
  const double h = grid.h();
  if (!(dt > 0.0)) throw Error(ErrorCode::cfl_violation, "time step must be positive");
  detail::require_nonnegative(rho);
  StepResult out{DensityField(m, 0.0), {}};
  auto& rep = out.report;
  rep.cfl_ratio = check_cfl(velocity, dt, grid);
  if (rep.cfl_ratio > 1.0) {
    throw Error(ErrorCode::cfl_violation, "CFL ratio " + std::to_string(rep.cfl_ratio) + " > 1");
  }
  rep.mass_before = total_mass(rho, h);
  rep.exited_by_slot.assign(exits.size(), 0.0);

  std::vector<AxisSplit> fx(static_cast<std::size_t>(m) * m);
  std::vector<AxisSplit> fy(fx.size());
  double blocked = 0.0;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      const auto c = static_cast<std::size_t>(k) * m + i;
      if (grid.is_obstacle(i, k)) continue;
      const Vec2 raw = velocity(i, k);
      const Vec2 U = clamp_to_walls(raw, grid, i, k);
      fx[c] = AxisSplit::of(U.x, dt, h);
      fy[c] = AxisSplit::of(U.y, dt, h);
      if (!(U == raw) && rho(i, k) > 0.0) {
        const auto rx = AxisSplit::of(raw.x, dt, h);
        const auto ry = AxisSplit::of(raw.y, dt, h);
        for (int oy = -1; oy <= 1; ++oy)
          for (int ox = -1; ox <= 1; ++ox)
            if ((ox != 0 || oy != 0) && grid.is_wall(i + ox, k + oy))
              blocked += rho(i, k) * rx.to(ox) * ry.to(oy);
      }
    }
  }
  rep.mass_blocked = blocked * h * h;

  auto contribution = [&](int i, int k, int ox, int oy) {
    const int si = i - ox;
    const int sk = k - oy;
    if (!grid.in_bounds(si, sk)) return 0.0;
    const auto c = static_cast<std::size_t>(sk) * m + si;
    return rho(si, sk) * fx[c].to(ox) * fy[c].to(oy);
  };
  auto row = [&](int i, int k, int oy) {
    return (contribution(i, k, -1, oy) + contribution(i, k, 1, oy)) + contribution(i, k, 0, oy);
  };

  double exited = 0.0;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      if (grid.is_obstacle(i, k)) continue;
      const double value = (row(i, k, -1) + row(i, k, 1)) + row(i, k, 0);
      const int slot = exits.slot(i, k);
      if (slot >= 0) {
        rep.exited_by_slot[static_cast<std::size_t>(slot)] += value * h * h;
        exited += value;
      } else {
        out.rho(i, k) = value;
        rep.max_density = std::max(rep.max_density, value);
      }
    }
  }
  rep.mass_exited = exited * h * h;
  rep.mass_after = total_mass(out.rho, h);
  return out;
}

inline StepResult push_forward_step(const DensityField& rho, const VectorField& velocity, double dt,
                                    const Grid& grid) {
  return push_forward_step(rho, velocity, dt, grid, ExitSet::all_targets(grid));
}

/// Monte Carlo reference for one push-forward step. Particles are allotted to
/// cells in proportion to mass and placed by jittered stratified sampling, then
/// moved rigidly with their cell's wall-clamped velocity and re-binned.
inline DensityField particle_oracle(const DensityField& rho, const VectorField& velocity, double dt,
                                    const Grid& grid, std::int64_t n_particles, std::uint64_t seed,
                                    const ExitSet& exits) {
  const int m = grid.m();
  const double h = grid.h();
  if (n_particles < 1) throw Error(ErrorCode::zero_mass, "need at least one particle");
  detail::require_nonnegative(rho);
  const double total = total_mass(rho, h);
  if (!(total > 0.0)) throw Error(ErrorCode::zero_mass, "density has no mass to sample");

  // Largest-remainder allotment of particles to cells.
  const std::size_t cells = rho.cell_count();
  std::vector<std::int64_t> count(cells, 0);
  std::vector<std::pair<double, std::size_t>> remainder;
  remainder.reserve(cells);
  std::int64_t used = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double share = static_cast<double>(n_particles) * rho.data()[c] * h * h / total;
    count[c] = static_cast<std::int64_t>(std::floor(share));
    used += count[c];
    if (rho.data()[c] > 0.0) remainder.emplace_back(share - std::floor(share), c);
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; used < n_particles && r < remainder.size(); ++r, ++used)
    ++count[remainder[r].second];

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DensityField out(m, 0.0);
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      const auto c = static_cast<std::size_t>(k) * m + i;
      const std::int64_t n = count[c];
      if (n == 0) continue;
      const double particle_mass = rho(i, k) * h * h / static_cast<double>(n);
      const Vec2 U = clamp_to_walls(velocity(i, k), grid, i, k);
      // Jittered strata: `rows` bands in y, each split evenly in x, one particle per stratum.
      const auto rows = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::sqrt(static_cast<double>(n))));
      for (std::int64_t r = 0; r < rows; ++r) {
        const std::int64_t cols = n / rows + (r < n % rows ? 1 : 0);
        for (std::int64_t q = 0; q < cols; ++q) {
          const double ux = (static_cast<double>(q) + unit(rng)) / static_cast<double>(cols);
          const double uy = (static_cast<double>(r) + unit(rng)) / static_cast<double>(rows);
          const double x = (i + ux) * h + U.x * dt;
          const double y = (k + uy) * h + U.y * dt;
          const int bi = std::clamp(static_cast<int>(std::floor(x * m)), 0, m - 1);
          const int bk = std::clamp(static_cast<int>(std::floor(y * m)), 0, m - 1);
          if (exits.slot(bi, bk) < 0) out(bi, bk) += particle_mass;
        }
      }
    }
  }
  for (auto& v : out.data()) v /= h * h;
  return out;
}

inline DensityField particle_oracle(const DensityField& rho, const VectorField& velocity, double dt,
                                    const Grid& grid, std::int64_t n_particles, std::uint64_t seed) {
  return particle_oracle(rho, velocity, dt, grid, n_particles, seed, ExitSet::all_targets(grid));
}

}  // namespace crowd
