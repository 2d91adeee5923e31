#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crowd/field.hpp"
#include "crowd/geometry.hpp"
#include "crowd/potential.hpp"

namespace crowd {

enum class InteractionMode : std::uint8_t {
  mass_dependent,    // strength grows with the mass seen in the neighborhood
  mass_independent,  // moment normalized by the seen mass, |nu| <= max |beta|
};

struct InteractionParams {
  NeighborhoodSpec spec;
  InteractionMode mode = InteractionMode::mass_dependent;
  std::vector<double> beta{0.0};  // coupling row beta_{self, j}, one entry per population
  double wall_density = 0.0;      // effective density of obstacles and the exterior

  friend bool operator==(const InteractionParams&, const InteractionParams&) = default;
};

namespace detail {

/// Extended array covering [-pad, m + pad)^2.
struct Padded {
  int m = 0;
  int pad = 0;
  int n = 0;
  std::vector<double> values;

  Padded(int m_, int pad_) : m(m_), pad(pad_), n(m_ + 2 * pad_), values(static_cast<std::size_t>(n) * n, 0.0) {}

  double& at(int i, int k) {
    return values[static_cast<std::size_t>(k + pad) * n + static_cast<std::size_t>(i + pad)];
  }
  double at(int i, int k) const {
    return values[static_cast<std::size_t>(k + pad) * n + static_cast<std::size_t>(i + pad)];
  }
};

/// Inclusive 2D prefix counts of nonzero entries, for empty-window skipping.
class NonzeroCounter {
 public:
  explicit NonzeroCounter(const Padded& a, const Padded& b) : n_(a.n), pad_(a.pad) {
    sat_.assign(static_cast<std::size_t>(n_ + 1) * (n_ + 1), 0);
    for (int r = 0; r < n_; ++r) {
      for (int c = 0; c < n_; ++c) {
        const auto idx = static_cast<std::size_t>(r) * n_ + c;
        const int nz = (a.values[idx] != 0.0 || b.values[idx] != 0.0) ? 1 : 0;
        cell(r + 1, c + 1) = nz + cell(r, c + 1) + cell(r + 1, c) - cell(r, c);
      }
    }
  }

  /// Nonzero count over grid cells [i0, i1] x [k0, k1].
  std::int64_t count(int i0, int k0, int i1, int k1) const {
    const int c0 = i0 + pad_, c1 = i1 + pad_ + 1, r0 = k0 + pad_, r1 = k1 + pad_ + 1;
    return at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0);
  }

 private:
  std::int64_t& cell(int r, int c) { return sat_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  std::int64_t at(int r, int c) const { return sat_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }

  int n_;
  int pad_;
  std::vector<std::int64_t> sat_;
};

}  // namespace detail

/// Nonlocal interaction velocity of population `self` against the frozen densities.
///
/// nu(x) = (1/R) sum_{y in B+(x)} (x - y) sum_j beta_j rho_hat_j(y) h^2, where rho_hat
/// equals the wall density on obstacle and exterior cells. In mass-independent
/// mode the sum is divided by the effective mass seen from x (populations with
/// nonzero coupling only).
inline VectorField interaction_velocity(std::span<const ScalarField> densities, int self,
                                        const DesiredVelocityField& desired, const Grid& grid,
                                        const InteractionParams& params) {
  const int m = grid.m();
  const double h = grid.h();
  const double radius = params.spec.radius;
  if (params.beta.size() != densities.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "coupling row has " + std::to_string(params.beta.size()) + " entries for " +
                    std::to_string(densities.size()) + " populations");
  }
  if (self < 0 || static_cast<std::size_t>(self) >= densities.size()) {
    throw Error(ErrorCode::dimension_mismatch, "population index out of range");
  }
  VectorField nu(m);
  const int reach = static_cast<int>(std::floor(radius * m));
  if (reach < 1) return nu;

  detail::Padded weighted(m, reach);
  detail::Padded mass(m, reach);
  for (int k = -reach; k < m + reach; ++k) {
    for (int i = -reach; i < m + reach; ++i) {
      const bool wall = grid.is_wall(i, k);
      double w = 0.0;
      double n = 0.0;
      for (std::size_t j = 0; j < densities.size(); ++j) {
        const double rho = wall ? params.wall_density : densities[j](i, k);
        w += params.beta[j] * rho;
        if (params.beta[j] != 0.0) n += rho;
      }
      weighted.at(i, k) = w;
      mass.at(i, k) = n;
    }
  }
  const detail::NonzeroCounter nonzero(weighted, mass);

  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      if (grid.is_obstacle(i, k)) continue;
      if (nonzero.count(i - reach, k - reach, i + reach, k + reach) == 0) continue;
      const VisibilityTest test(m, params.spec, desired.direction(i, k));
      double sx = 0.0, sy = 0.0, total = 0.0;
      for (int dk = -reach; dk <= reach; ++dk) {
        // Left and right offsets are paired so the sum is exactly mirror-symmetric in x.
        for (int a = 0; a <= reach; ++a) {
          double px = 0.0, py = 0.0, pm = 0.0;
          if (test.contains(a, dk)) {
            const double w = weighted.at(i + a, k + dk);
            px = -a * w;
            py = -dk * w;
            pm = mass.at(i + a, k + dk);
          }
          if (a > 0 && test.contains(-a, dk)) {
            const double w = weighted.at(i - a, k + dk);
            px += a * w;
            py += -dk * w;
            pm += mass.at(i - a, k + dk);
          }
          sx += px;
          sy += py;
          total += pm;
        }
      }
      if (params.mode == InteractionMode::mass_dependent) {
        const double scale = h * h * h / radius;
        nu(i, k) = {sx * scale, sy * scale};
      } else if (total > 0.0) {
        const double scale = h / radius;
        nu(i, k) = {sx * scale / total, sy * scale / total};
      }
    }
  }
  return nu;
}

struct TotalVelocity {
  VectorField v;
  std::size_t guarded_cells = 0;
};

/// v = v_d + nu. With the guard on, cells walking against v_d lose the backward
/// part of nu so that v . v_d_hat = 0; the sideways part is kept.
inline TotalVelocity total_velocity(const DesiredVelocityField& desired, const VectorField& nu,
                                    bool retrograde_guard) {
  const int m = nu.size();
  TotalVelocity out{VectorField(m), 0};
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      Vec2 v = desired.v(i, k) + nu(i, k);
      if (retrograde_guard) {
        const Vec2 d = desired.direction(i, k);
        const double along = v.dot(d);
        if (along < 0.0 && d.norm() > 0.0) {
          v = v - along * d;
          ++out.guarded_cells;
        }
      }
      out.v(i, k) = v;
    }
  }
  return out;
}

}  // namespace crowd
