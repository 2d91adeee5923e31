#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "crowd/geometry.hpp"

using namespace crowd;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io_error;
}

// Geometric membership from physical coordinates; nullopt when the cell center sits
// within `band` radians of the cone edge, where lattice ties are a convention.
std::optional<bool> in_cone(Vec2 offset, double radius, Vec2 dir, double theta, bool anisotropic,
                            double band = 1e-5) {
  const double r = offset.norm();
  if (r == 0.0 || r > radius * (1 + 1e-12)) return false;
  if (std::abs(r - radius) < 1e-12) return std::nullopt;
  if (!anisotropic) return true;
  const double c = std::clamp(offset.dot(dir) / r, -1.0, 1.0);
  const double angle = std::acos(c);
  if (std::abs(angle - theta) < band) return std::nullopt;
  return angle < theta;
}

}  // namespace

TEST(Grid, CorridorExample) {
  const int m = 64;
  std::vector<CellRect> obstacles{{1, 36, 26, 64, 30}, {2, 36, 34, 64, 38}};
  std::vector<BoundaryRun> targets{{1, Side::right, 30, 4}};
  const auto grid = build_grid(m, obstacles, targets, {});
  EXPECT_EQ(grid.count(CellType::obstacle), 2u * 4 * 28);
  EXPECT_EQ(grid.count(CellType::target), 4u);
  EXPECT_EQ(grid.kind(63, 31), (CellKind{CellType::target, 1}));
  EXPECT_TRUE(grid.is_obstacle(40, 27));
  EXPECT_TRUE(grid.is_wall(-1, 5));
  EXPECT_TRUE(grid.is_wall(5, 64));
  EXPECT_FALSE(grid.is_wall(40, 31));
  EXPECT_DOUBLE_EQ(grid.h(), 1.0 / 64);
  EXPECT_DOUBLE_EQ(grid.center(0, 63).y, 63.5 / 64);
}

TEST(Grid, Errors) {
  EXPECT_EQ(code_of([] { build_grid(3, {}, {}, {}); }), ErrorCode::out_of_bounds);
  std::vector<CellRect> outside{{1, 60, 0, 70, 4}};
  EXPECT_EQ(code_of([&] { build_grid(64, outside, {}, {}); }), ErrorCode::out_of_bounds);
  std::vector<BoundaryRun> long_run{{1, Side::top, 60, 10}};
  EXPECT_EQ(code_of([&] { build_grid(64, {}, long_run, {}); }), ErrorCode::out_of_bounds);

  std::vector<CellRect> overlapping{{1, 0, 0, 10, 10}, {2, 5, 5, 15, 15}};
  try {
    build_grid(32, overlapping, {}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::overlap_conflict);
    EXPECT_NE(std::string(e.what()).find("obstacle 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("obstacle 2"), std::string::npos);
  }
  std::vector<CellRect> on_target{{1, 28, 0, 32, 32}};
  std::vector<BoundaryRun> t{{1, Side::right, 0, 4}};
  EXPECT_EQ(code_of([&] { build_grid(32, on_target, t, {}); }), ErrorCode::overlap_conflict);
}

TEST(Grid, EnclosedInletIsDisconnected) {
  // A wall from top to bottom separates the inlet on the left from the target on the right.
  std::vector<CellRect> wall{{1, 10, 0, 12, 32}};
  std::vector<BoundaryRun> targets{{1, Side::right, 0, 4}};
  std::vector<BoundaryRun> inlets{{1, Side::left, 10, 4}};
  EXPECT_EQ(code_of([&] { build_grid(32, wall, targets, inlets); }), ErrorCode::disconnected_domain);
  std::vector<CellRect> gapped{{1, 10, 0, 12, 30}};
  EXPECT_NO_THROW(build_grid(32, gapped, targets, inlets));
}

TEST(Grid, Reachability) {
  std::vector<CellRect> box{{1, 4, 4, 12, 5}, {2, 4, 11, 12, 12}, {3, 4, 5, 5, 11}, {4, 11, 5, 12, 11}};
  const auto grid = build_grid(16, box, {}, {});
  const CellIndex inside[1] = {{7, 7}};
  const auto seen = reachable_from(grid, inside);
  EXPECT_TRUE(seen(6, 6));
  EXPECT_FALSE(seen(0, 0));
  EXPECT_EQ(code_of([&] {
              require_exit_reachable(grid, inside, [](CellIndex c) { return c.i == 0; }, "test");
            }),
            ErrorCode::disconnected_domain);
}

TEST(Grid, RunCells) {
  const auto cells = run_cells({7, Side::top, 2, 3}, 10);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0], (CellIndex{2, 9}));
  EXPECT_EQ(cells[2], (CellIndex{4, 9}));
  EXPECT_EQ(run_cells({7, Side::left, 5, 1}, 10)[0], (CellIndex{0, 5}));
}

TEST(Neighborhood, MatchesGeometricEnumeration) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  std::uniform_real_distribution<double> radius(0.03, 0.3);
  std::uniform_real_distribution<double> theta(0.2, std::numbers::pi / 2);
  const int m = 48;
  const auto grid = build_grid(m, {}, {}, {});
  for (int trial = 0; trial < 300; ++trial) {
    const double a = angle(rng);
    const Vec2 dir{std::cos(a), std::sin(a)};
    const NeighborhoodSpec spec{radius(rng), theta(rng), trial % 5 != 0};
    const CellIndex c{static_cast<int>(rng() % m), static_cast<int>(rng() % m)};
    const auto cells = neighborhood_cells(grid, c, dir, spec);
    std::set<std::pair<int, int>> got;
    for (const auto& nc : cells) {
      got.insert({nc.cell.i, nc.cell.k});
      EXPECT_DOUBLE_EQ(nc.weight, grid.h() * grid.h());
    }
    // Brute force over a window that surely contains the ball, ghost cells included.
    for (int k = c.k - m; k <= c.k + m; ++k)
      for (int i = c.i - m; i <= c.i + m; ++i) {
        const Vec2 off{(i - c.i) * grid.h(), (k - c.k) * grid.h()};
        const auto want = in_cone(off, spec.radius, dir, spec.theta_max, spec.anisotropic);
        if (!want) continue;
        EXPECT_EQ(got.contains({i, k}), *want) << "trial " << trial << " cell " << i << "," << k;
      }
  }
}

TEST(Neighborhood, AxisAlignedTiesAreIncludedOnBothSides) {
  const auto grid = build_grid(64, {}, {}, {});
  const NeighborhoodSpec spec{0.1, std::numbers::pi / 2, true};
  // A direction tilted by roundoff still keeps the whole lateral line.
  for (double tilt : {0.0, 1e-12, -1e-12}) {
    const auto cells = neighborhood_cells(grid, {32, 32}, Vec2{1.0, tilt}, spec);
    int above = 0, below = 0;
    for (const auto& nc : cells)
      if (nc.cell.i == 32) (nc.cell.k > 32 ? above : below) += 1;
    EXPECT_EQ(above, 6);
    EXPECT_EQ(below, 6);
  }
}

TEST(Neighborhood, MirrorImage) {
  const auto grid = build_grid(40, {}, {}, {});
  const NeighborhoodSpec spec{0.17, 1.1, true};
  const Vec2 dir{0.6, 0.8};
  auto a = neighborhood_cells(grid, {10, 20}, dir, spec);
  auto b = neighborhood_cells(grid, {29, 20}, Vec2{-0.6, 0.8}, spec);
  std::set<std::pair<int, int>> sa, sb;
  for (auto& c : a) sa.insert({39 - c.cell.i, c.cell.k});
  for (auto& c : b) sb.insert({c.cell.i, c.cell.k});
  EXPECT_EQ(sa, sb);
}

TEST(Neighborhood, ZeroReachIsEmpty) {
  const auto grid = build_grid(8, {}, {}, {});
  EXPECT_TRUE(neighborhood_cells(grid, {4, 4}, {1, 0}, {0.1, 1.0, false}).empty());
}
