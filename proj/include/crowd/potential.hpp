#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "crowd/field.hpp"
#include "crowd/geometry.hpp"

namespace crowd {

enum class BcType : std::uint8_t { dirichlet, neumann_zero };

struct FaceCondition {
  BcType type = BcType::dirichlet;
  double value = 0.0;

  static FaceCondition dirichlet(double v) { return {BcType::dirichlet, v}; }
  static FaceCondition neumann() { return {BcType::neumann_zero, 0.0}; }

  friend bool operator==(const FaceCondition&, const FaceCondition&) = default;
};

/// Boundary data for the navigation potential of one population.
///
/// Outer faces take the condition of their side, except faces of target runs
/// (held at `target_value`) and inlet runs (zero flux unless overridden).
/// Obstacle faces default to Dirichlet at the wall value.
struct BoundaryConditionSet {
  std::array<FaceCondition, 4> walls{};  // indexed by Side
  double target_value = 1.0;
  std::vector<int> targets;  // target runs held at target_value; empty means every run
  std::map<int, FaceCondition> obstacles;
  std::map<int, FaceCondition> inlets;

  FaceCondition wall(Side s) const { return walls[static_cast<std::size_t>(s)]; }

  bool is_target(int id) const {
    return targets.empty() || std::find(targets.begin(), targets.end(), id) != targets.end();
  }

  FaceCondition obstacle(int id) const {
    auto it = obstacles.find(id);
    return it != obstacles.end() ? it->second : FaceCondition::dirichlet(0.0);
  }

  FaceCondition inlet(int id) const {
    auto it = inlets.find(id);
    return it != inlets.end() ? it->second : FaceCondition::neumann();
  }

  friend bool operator==(const BoundaryConditionSet&, const BoundaryConditionSet&) = default;
};

struct PotentialField {
  ScalarField u;
  double residual = 0.0;  // max-norm of the discrete Laplacian on solved cells
  int iterations = 0;
  std::optional<ErrorCode> status;  // non_convergence or no_target

  bool ok() const noexcept { return !status.has_value(); }
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 0;  // 0 selects 200 * m^2
};

namespace detail {

/// Face condition seen from cell (i, k) looking toward (i+di, k+dk); nullopt for an interior neighbor.
inline std::optional<FaceCondition> face_condition(const Grid& grid, const BoundaryConditionSet& bcs,
                                                   int i, int k, int di, int dk) {
  const int ni = i + di;
  const int nk = k + dk;
  if (grid.in_bounds(ni, nk)) {
    const auto& nb = grid.kind(ni, nk);
    if (nb.type == CellType::obstacle) return bcs.obstacle(nb.id);
    return std::nullopt;
  }
  const Side side = di < 0 ? Side::left : di > 0 ? Side::right : dk < 0 ? Side::bottom : Side::top;
  // A run owns only the faces on its own side; a corner cell keeps the plain wall on the other.
  auto on_side = [&](const std::vector<BoundaryRun>& runs, int id) {
    return std::any_of(runs.begin(), runs.end(), [&](const BoundaryRun& r) { return r.id == id && r.side == side; });
  };
  const auto& self = grid.kind(i, k);
  if (self.type == CellType::target && bcs.is_target(self.id) && on_side(grid.targets(), self.id))
    return FaceCondition::dirichlet(bcs.target_value);
  if (self.type == CellType::inlet && on_side(grid.inlets(), self.id)) return bcs.inlet(self.id);
  return bcs.wall(side);
}

struct Stencil {
  std::array<int, 4> nb{-1, -1, -1, -1};  // W, E, S, N flat offsets, -1 for a boundary face
  double rhs = 0.0;                       // 2 * sum of Dirichlet face values
  double diag = 4.0;
  bool active = false;
};

}  // namespace detail

/// Five-point harmonic solve on all non-obstacle cells by red-black SOR.
/// Dirichlet faces use the ghost value 2*u_bc - u_cell, zero-flux faces the mirror u_cell.
inline PotentialField solve_laplace(const Grid& grid, const BoundaryConditionSet& bcs,
                                    SolverOptions opts = {}) {
  const int m = grid.m();
  const double h2 = grid.h() * grid.h();
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 200 * m * m;
  PotentialField out{ScalarField(m, 0.0), 0.0, 0, std::nullopt};

  std::vector<detail::Stencil> st(static_cast<std::size_t>(m) * m);
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  constexpr int di[4] = {-1, 1, 0, 0};
  constexpr int dk[4] = {0, 0, -1, 1};
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      if (grid.is_obstacle(i, k)) continue;
      auto& s = st[static_cast<std::size_t>(k) * m + i];
      s.active = true;
      std::array<double, 4> face_rhs{0.0, 0.0, 0.0, 0.0};
      for (int d = 0; d < 4; ++d) {
        const auto fc = detail::face_condition(grid, bcs, i, k, di[d], dk[d]);
        if (!fc) {
          s.nb[d] = (k + dk[d]) * m + (i + di[d]);
        } else if (fc->type == BcType::dirichlet) {
          face_rhs[d] = 2.0 * fc->value;
          s.diag += 1.0;
          dmin = std::min(dmin, fc->value);
          dmax = std::max(dmax, fc->value);
        } else {
          s.diag -= 1.0;
        }
      }
      s.rhs = (face_rhs[0] + face_rhs[1]) + (face_rhs[2] + face_rhs[3]);
    }
  }

  if (!(dmin < dmax)) {
    const double c = std::isfinite(dmin) ? dmin : 0.0;
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        if (!grid.is_obstacle(i, k)) out.u(i, k) = c;
    out.status = ErrorCode::no_target;
    return out;
  }

  auto& u = out.u.data();
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      if (grid.is_obstacle(i, k)) {
        const auto fc = bcs.obstacle(grid.kind(i, k).id);
        out.u(i, k) = fc.type == BcType::dirichlet ? fc.value : 0.0;
      } else {
        out.u(i, k) = dmin;
      }

  auto numerator = [&](const detail::Stencil& s) {
    auto at = [&](int d) { return s.nb[d] >= 0 ? u[static_cast<std::size_t>(s.nb[d])] : 0.0; };
    return ((at(0) + at(1)) + (at(2) + at(3))) + s.rhs;
  };
  auto residual = [&] {
    double r = 0.0;
    for (std::size_t c = 0; c < st.size(); ++c)
      if (st[c].active) r = std::max(r, std::abs(numerator(st[c]) - st[c].diag * u[c]));
    return r / h2;
  };

  const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi / m));
  std::vector<double> best = u;
  double best_res = residual();
  // Give up once the residual has sat at the roundoff floor for a while.
  const int patience = 10 * m + 1000;
  double progress_ref = best_res;
  int last_progress = 0;
  int it = 0;
  while (best_res > opts.tol && it < max_iter && it - last_progress < patience) {
    for (int color = 0; color < 2; ++color) {
      for (int k = 0; k < m; ++k) {
        for (int i = (k + color) % 2; i < m; i += 2) {
          const auto c = static_cast<std::size_t>(k) * m + i;
          const auto& s = st[c];
          if (!s.active || s.diag <= 0.0) continue;
          const double gs = numerator(s) / s.diag;
          u[c] += omega * (gs - u[c]);
        }
      }
    }
    ++it;
    const double r = residual();
    if (r < best_res) {
      best_res = r;
      best = u;
    }
    if (r < 0.999 * progress_ref) {
      progress_ref = r;
      last_progress = it;
    }
  }
  u = best;
  out.residual = best_res;
  out.iterations = it;
  if (best_res > opts.tol) out.status = ErrorCode::non_convergence;
  return out;
}

struct DesiredVelocityField {
  VectorField v;
  double alpha = 1.0;
  Mask degenerate;
  std::size_t degenerate_count = 0;
  bool empty = false;  // no cell had a usable gradient
  double max_difference_quotient = 0.0;

  /// Unit desired direction; zero where the field vanishes.
  Vec2 direction(int i, int k) const {
    const Vec2 w = v(i, k);
    return {w.x / alpha, w.y / alpha};
  }
};

inline double default_grad_eps(double alpha, int m) { return 1e-6 * alpha * m; }

/// Normalized potential gradient scaled to speed `alpha`. Cells with a gradient
/// below `grad_eps` take the averaged direction of their non-degenerate neighbors.
inline DesiredVelocityField desired_velocity(const PotentialField& field, const Grid& grid,
                                             double alpha, double grad_eps) {
  const int m = grid.m();
  const double h = grid.h();
  const auto& u = field.u;
  DesiredVelocityField out{VectorField(m), alpha, Mask(m, false), 0, false, 0.0};
  VectorField unit(m);
  Mask good(m, false);

  auto open = [&](int i, int k) { return grid.in_bounds(i, k) && !grid.is_obstacle(i, k); };
  auto diff = [&](int i, int k, int di, int dk) {
    const bool lo = open(i - di, k - dk);
    const bool hi = open(i + di, k + dk);
    if (lo && hi) return (u(i + di, k + dk) - u(i - di, k - dk)) / (2.0 * h);
    if (hi) return (u(i + di, k + dk) - u(i, k)) / h;
    if (lo) return (u(i, k) - u(i - di, k - dk)) / h;
    return 0.0;
  };

  std::size_t n_good = 0;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      if (!open(i, k)) continue;
      const Vec2 g{diff(i, k, 1, 0), diff(i, k, 0, 1)};
      const double n = g.norm();
      if (n >= grad_eps) {
        unit(i, k) = {g.x / n, g.y / n};
        good(i, k) = true;
        ++n_good;
      }
    }
  }
  out.empty = (n_good == 0);

  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      if (!open(i, k)) continue;
      if (good(i, k)) {
        out.v(i, k) = {alpha * unit(i, k).x, alpha * unit(i, k).y};
        continue;
      }
      out.degenerate(i, k) = true;
      ++out.degenerate_count;
      auto nb = [&](int ni, int nk) { return open(ni, nk) && good(ni, nk) ? unit(ni, nk) : Vec2{}; };
      const Vec2 sum = (nb(i - 1, k) + nb(i + 1, k)) + (nb(i, k - 1) + nb(i, k + 1));
      const double n = sum.norm();
      if (n > 0.0) out.v(i, k) = {alpha * (sum.x / n), alpha * (sum.y / n)};
    }
  }

  double q = 0.0;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) {
      if (!open(i, k)) continue;
      if (open(i + 1, k)) q = std::max(q, (out.v(i + 1, k) - out.v(i, k)).norm() / h);
      if (open(i, k + 1)) q = std::max(q, (out.v(i, k + 1) - out.v(i, k)).norm() / h);
    }
  out.max_difference_quotient = q;
  return out;
}

}  // namespace crowd
