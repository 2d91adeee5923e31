#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "crowd/field.hpp"

namespace crowd {

enum class CellType : std::uint8_t { free, obstacle, target, inlet };

/// Kind label of one cell. `id` names the obstacle, target run or inlet run; 0 for free cells.
struct CellKind {
  CellType type = CellType::free;
  int id = 0;

  friend bool operator==(CellKind, CellKind) = default;
};

/// Half-open cell rectangle [i0, i1) x [k0, k1).
struct CellRect {
  int id = 0;
  int i0 = 0;
  int k0 = 0;
  int i1 = 0;
  int k1 = 0;

  friend bool operator==(const CellRect&, const CellRect&) = default;
};

enum class Side : std::uint8_t { left, right, bottom, top };

inline const char* to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

/// A contiguous run of cells along one side of the outer ring. `start` counts
/// along the side from the lower (left/bottom) end.
struct BoundaryRun {
  int id = 0;
  Side side = Side::left;
  int start = 0;
  int length = 0;

  friend bool operator==(const BoundaryRun&, const BoundaryRun&) = default;
};

inline std::vector<CellIndex> run_cells(const BoundaryRun& run, int m) {
  std::vector<CellIndex> out;
  out.reserve(static_cast<std::size_t>(run.length > 0 ? run.length : 0));
  for (int s = run.start; s < run.start + run.length; ++s) {
    switch (run.side) {
      case Side::left: out.push_back({0, s}); break;
      case Side::right: out.push_back({m - 1, s}); break;
      case Side::bottom: out.push_back({s, 0}); break;
      case Side::top: out.push_back({s, m - 1}); break;
    }
  }
  return out;
}

struct NeighborhoodSpec {
  double radius = 0.1;
  double theta_max = std::numbers::pi / 2;
  bool anisotropic = true;

  friend bool operator==(const NeighborhoodSpec&, const NeighborhoodSpec&) = default;
};

class Grid {
 public:
  Grid() = default;
  explicit Grid(int m) : m_(m), h_(1.0 / m), kinds_(m) {}

  int m() const noexcept { return m_; }
  double h() const noexcept { return h_; }

  bool in_bounds(int i, int k) const noexcept { return kinds_.contains(i, k); }
  const CellKind& kind(int i, int k) const { return kinds_(i, k); }
  const CellKind& kind(CellIndex c) const { return kinds_[c]; }
  const Field<CellKind>& kinds() const noexcept { return kinds_; }

  bool is_obstacle(int i, int k) const { return kinds_(i, k).type == CellType::obstacle; }

  /// Outside the unit square or inside an obstacle.
  bool is_wall(int i, int k) const { return !in_bounds(i, k) || is_obstacle(i, k); }

  Vec2 center(int i, int k) const { return {(i + 0.5) * h_, (k + 0.5) * h_}; }

  std::size_t count(CellType type) const {
    std::size_t n = 0;
    for (const auto& c : kinds_.data()) n += (c.type == type) ? 1 : 0;
    return n;
  }

  const std::vector<CellRect>& obstacles() const noexcept { return obstacles_; }
  const std::vector<BoundaryRun>& targets() const noexcept { return targets_; }
  const std::vector<BoundaryRun>& inlets() const noexcept { return inlets_; }

 private:
  friend Grid build_grid(int, std::span<const CellRect>, std::span<const BoundaryRun>,
                         std::span<const BoundaryRun>);

  int m_ = 0;
  double h_ = 0.0;
  Field<CellKind> kinds_;
  std::vector<CellRect> obstacles_;
  std::vector<BoundaryRun> targets_;
  std::vector<BoundaryRun> inlets_;
};

namespace detail {

inline std::string describe(CellKind k) {
  switch (k.type) {
    case CellType::free: return "free";
    case CellType::obstacle: return "obstacle " + std::to_string(k.id);
    case CellType::target: return "target " + std::to_string(k.id);
    case CellType::inlet: return "inlet " + std::to_string(k.id);
  }
  return "?";
}

inline void claim(Field<CellKind>& kinds, CellIndex c, CellKind kind) {
  auto& slot = kinds[c];
  if (slot.type != CellType::free) {
    throw Error(ErrorCode::overlap_conflict,
                "cell (" + std::to_string(c.i) + "," + std::to_string(c.k) + ") claimed by " +
                    describe(slot) + " and " + describe(kind));
  }
  slot = kind;
}

inline void check_run(const BoundaryRun& run, int m, const char* what) {
  if (run.length <= 0 || run.start < 0 || run.start + run.length > m) {
    throw Error(ErrorCode::out_of_bounds, std::string(what) + " " + std::to_string(run.id) +
                                              " runs outside side " + to_string(run.side));
  }
}

}  // namespace detail

/// Cells reachable from `sources` through non-obstacle cells with 4-connectivity.
inline Mask reachable_from(const Grid& grid, std::span<const CellIndex> sources) {
  const int m = grid.m();
  Mask seen(m, false);
  std::deque<CellIndex> queue;
  for (auto s : sources) {
    if (grid.in_bounds(s.i, s.k) && !grid.is_obstacle(s.i, s.k) && !seen[s]) {
      seen[s] = true;
      queue.push_back(s);
    }
  }
  constexpr int di[4] = {-1, 1, 0, 0};
  constexpr int dk[4] = {0, 0, -1, 1};
  while (!queue.empty()) {
    const auto c = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      const int ni = c.i + di[d];
      const int nk = c.k + dk[d];
      if (!grid.in_bounds(ni, nk) || grid.is_obstacle(ni, nk) || seen(ni, nk)) continue;
      seen(ni, nk) = true;
      queue.push_back({ni, nk});
    }
  }
  return seen;
}

/// Throws DisconnectedDomain unless every source cell reaches a cell accepted by `is_exit`.
inline void require_exit_reachable(const Grid& grid, std::span<const CellIndex> sources,
                                   const std::function<bool(CellIndex)>& is_exit,
                                   const std::string& context) {
  for (auto s : sources) {
    const CellIndex one[1] = {s};
    const auto seen = reachable_from(grid, one);
    bool found = false;
    for (int k = 0; k < grid.m() && !found; ++k)
      for (int i = 0; i < grid.m() && !found; ++i) found = seen(i, k) && is_exit({i, k});
    if (!found) {
      throw Error(ErrorCode::disconnected_domain,
                  context + ": no free path from cell (" + std::to_string(s.i) + "," +
                      std::to_string(s.k) + ") to an exit");
    }
  }
}

inline Grid build_grid(int m, std::span<const CellRect> obstacles,
                       std::span<const BoundaryRun> targets, std::span<const BoundaryRun> inlets) {
  if (m < 4) throw Error(ErrorCode::out_of_bounds, "grid needs at least 4 cells per side");
  Grid grid(m);
  auto& kinds = grid.kinds_;

  for (const auto& r : obstacles) {
    if (r.i0 < 0 || r.k0 < 0 || r.i1 > m || r.k1 > m || r.i0 >= r.i1 || r.k0 >= r.k1) {
      throw Error(ErrorCode::out_of_bounds,
                  "obstacle " + std::to_string(r.id) + " lies outside the grid or is empty");
    }
    for (int k = r.k0; k < r.k1; ++k)
      for (int i = r.i0; i < r.i1; ++i) detail::claim(kinds, {i, k}, {CellType::obstacle, r.id});
  }
  for (const auto& t : targets) {
    detail::check_run(t, m, "target");
    for (auto c : run_cells(t, m)) detail::claim(kinds, c, {CellType::target, t.id});
  }
  for (const auto& in : inlets) {
    detail::check_run(in, m, "inlet");
    for (auto c : run_cells(in, m)) detail::claim(kinds, c, {CellType::inlet, in.id});
  }

  if (grid.count(CellType::obstacle) == static_cast<std::size_t>(m) * m) {
    throw Error(ErrorCode::disconnected_domain, "no free cells");
  }
  if (!targets.empty()) {
    std::vector<CellIndex> sources;
    for (const auto& in : inlets)
      for (auto c : run_cells(in, m)) sources.push_back(c);
    require_exit_reachable(
        grid, sources, [&](CellIndex c) { return grid.kind(c).type == CellType::target; }, "inlet");
  }

  grid.obstacles_.assign(obstacles.begin(), obstacles.end());
  grid.targets_.assign(targets.begin(), targets.end());
  grid.inlets_.assign(inlets.begin(), inlets.end());
  return grid;
}

/// Cell-center membership test for the visibility neighborhood, in integer cell offsets.
class VisibilityTest {
 public:
  // Angular slack for boundary ties. Without it a roundoff-sized component in the
  // direction (solver error in the potential) flips a whole lateral line of cells.
  static constexpr double tie_tolerance = 1e-6;

  VisibilityTest(int m, const NeighborhoodSpec& spec, Vec2 direction)
      : radius_cells_(spec.radius * m),
        radius2_(radius_cells_ * radius_cells_),
        reach_(static_cast<int>(std::floor(radius_cells_))),
        anisotropic_(spec.anisotropic),
        cos_theta_(spec.theta_max >= std::numbers::pi / 2 ? 0.0 : std::cos(spec.theta_max)),
        dir_(direction) {}

  int reach() const noexcept { return reach_; }

  bool contains(int di, int dk) const {
    const double d2 = static_cast<double>(di) * di + static_cast<double>(dk) * dk;
    if (d2 == 0.0 || d2 > radius2_) return false;
    if (!anisotropic_) return true;
    const double along = di * dir_.x + dk * dir_.y;
    return along >= std::sqrt(d2) * (cos_theta_ - tie_tolerance);
  }

 private:
  double radius_cells_;
  double radius2_;
  int reach_;
  bool anisotropic_;
  double cos_theta_;
  Vec2 dir_;
};

struct NeighborCell {
  CellIndex cell;  // may lie outside [0, m) for exterior ghost cells
  double weight = 0.0;

  friend bool operator==(const NeighborCell&, const NeighborCell&) = default;
};

/// Cells whose centers fall in the visibility neighborhood of `center`, with
/// midpoint-rule weight h^2. Exterior ghost cells are included.
inline std::vector<NeighborCell> neighborhood_cells(const Grid& grid, CellIndex center,
                                                    Vec2 direction, const NeighborhoodSpec& spec) {
  const VisibilityTest test(grid.m(), spec, direction);
  const double area = grid.h() * grid.h();
  std::vector<NeighborCell> out;
  for (int dk = -test.reach(); dk <= test.reach(); ++dk)
    for (int di = -test.reach(); di <= test.reach(); ++di)
      if (test.contains(di, dk)) out.push_back({{center.i + di, center.k + dk}, area});
  return out;
}

}  // namespace crowd
