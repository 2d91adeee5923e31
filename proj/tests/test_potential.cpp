#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crowd/potential.hpp"

using namespace crowd;

namespace {

BoundaryConditionSet channel_bcs() {
  BoundaryConditionSet b;
  b.walls[static_cast<int>(Side::left)] = FaceCondition::dirichlet(0.0);
  b.walls[static_cast<int>(Side::right)] = FaceCondition::dirichlet(1.0);
  b.walls[static_cast<int>(Side::bottom)] = FaceCondition::neumann();
  b.walls[static_cast<int>(Side::top)] = FaceCondition::neumann();
  return b;
}

// Five-point residual computed from scratch with explicit ghost values.
double independent_residual(const Grid& g, const BoundaryConditionSet& b, const ScalarField& u) {
  const int m = g.m();
  double worst = 0.0;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) {
      if (g.is_obstacle(i, k)) continue;
      double lap = -4.0 * u(i, k);
      const int di[4] = {-1, 1, 0, 0}, dk[4] = {0, 0, -1, 1};
      for (int d = 0; d < 4; ++d) {
        const auto fc = detail::face_condition(g, b, i, k, di[d], dk[d]);
        if (!fc) lap += u(i + di[d], k + dk[d]);
        else if (fc->type == BcType::dirichlet) lap += 2.0 * fc->value - u(i, k);
        else lap += u(i, k);
      }
      worst = std::max(worst, std::abs(lap) * m * m);
    }
  return worst;
}

}  // namespace

TEST(Laplace, MixedChannelIsLinear) {
  const auto g = build_grid(64, {}, {}, {});
  const auto f = solve_laplace(g, channel_bcs());
  ASSERT_TRUE(f.ok());
  double err = 0.0;
  for (int k = 0; k < 64; ++k)
    for (int i = 0; i < 64; ++i) err = std::max(err, std::abs(f.u(i, k) - g.center(i, k).x));
  EXPECT_LE(err, 1e-6);
  const auto v = desired_velocity(f, g, 1.3, default_grad_eps(1.3, 64));
  EXPECT_EQ(v.degenerate_count, 0u);
  for (int k = 0; k < 64; ++k)
    for (int i = 0; i < 64; ++i) {
      EXPECT_NEAR(v.v(i, k).x, 1.3, 1e-6);
      EXPECT_NEAR(v.v(i, k).y, 0.0, 1e-6);
    }
}

TEST(Laplace, TargetRunOwnsOnlyItsSide) {
  // Target along the whole right wall: corner cells keep the zero-flux top and bottom.
  const int m = 32;
  std::vector<BoundaryRun> t{{1, Side::right, 0, m}};
  const auto g = build_grid(m, {}, t, {});
  auto b = channel_bcs();
  b.walls[static_cast<int>(Side::right)] = FaceCondition::dirichlet(0.0);
  const auto f = solve_laplace(g, b);
  for (int k = 0; k < m; ++k) EXPECT_NEAR(f.u(m - 1, k), g.center(m - 1, k).x, 1e-9);
}

TEST(Laplace, MaximumPrincipleAndResidual) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const int m = 24 + 4 * trial;
    std::vector<CellRect> obs;
    for (int o = 0; o < 3; ++o) {
      const int i0 = 3 + static_cast<int>(rng() % (m - 10)), k0 = 3 + static_cast<int>(rng() % (m - 10));
      obs.push_back({o + 1, i0, k0, i0 + 3, k0 + 2});
    }
    Grid g;
    try {
      g = build_grid(m, obs, std::vector<BoundaryRun>{{1, Side::right, 2, 5}}, {});
    } catch (const Error&) {
      continue;  // random rectangles collided
    }
    BoundaryConditionSet b;
    for (int o = 1; o <= 3; ++o)
      b.obstacles[o] = (o % 2) ? FaceCondition::neumann() : FaceCondition::dirichlet(0.2);
    const auto f = solve_laplace(g, b, {1e-9, 0});
    ASSERT_TRUE(f.ok()) << f.residual;
    EXPECT_LE(independent_residual(g, b, f.u), 1e-9 * (1 + 1e-9));
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i) {
        if (g.is_obstacle(i, k)) continue;
        EXPECT_GE(f.u(i, k), -1e-9);
        EXPECT_LE(f.u(i, k), 1.0 + 1e-9);
      }
  }
}

TEST(Laplace, AllEqualDirichletHasNoTarget) {
  const auto g = build_grid(16, {}, {}, {});
  BoundaryConditionSet b;
  for (auto& w : b.walls) w = FaceCondition::dirichlet(0.4);
  const auto f = solve_laplace(g, b);
  ASSERT_TRUE(f.status.has_value());
  EXPECT_EQ(*f.status, ErrorCode::no_target);
  EXPECT_DOUBLE_EQ(f.u(3, 3), 0.4);
  const auto v = desired_velocity(f, g, 1.0, default_grad_eps(1.0, 16));
  EXPECT_TRUE(v.empty);
}

TEST(Laplace, IterationCapFlagsNonConvergence) {
  const auto g = build_grid(48, {}, {}, {});
  const auto f = solve_laplace(g, channel_bcs(), {1e-8, 5});
  ASSERT_TRUE(f.status.has_value());
  EXPECT_EQ(*f.status, ErrorCode::non_convergence);
  EXPECT_EQ(f.iterations, 5);
  EXPECT_GT(f.residual, 1e-8);
}

TEST(Laplace, MoreIterationsNeverRaiseTheResidual) {
  std::vector<CellRect> obs{{1, 10, 10, 20, 14}};
  const auto g = build_grid(32, obs, std::vector<BoundaryRun>{{1, Side::right, 12, 6}}, {});
  double prev = INFINITY;
  for (int it = 1; it <= 1024; it *= 2) {
    const auto f = solve_laplace(g, {}, {1e-30, it});
    EXPECT_LE(f.residual, prev) << it;
    prev = f.residual;
  }
}

TEST(Laplace, MirrorSymmetricOnOddGrid) {
  const int m = 33;
  std::vector<CellRect> obs{{1, 5, 10, 9, 20}, {2, 24, 10, 28, 20}};
  std::vector<BoundaryRun> t{{1, Side::top, 14, 5}};
  const auto g = build_grid(m, obs, t, {});
  const auto f = solve_laplace(g, {});
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) EXPECT_EQ(f.u(i, k), f.u(m - 1 - i, k)) << i << "," << k;
}

TEST(DesiredVelocity, UnitSpeedAndDegenerateFill) {
  const int m = 32;
  std::vector<BoundaryRun> t{{1, Side::right, 10, 6}};
  const auto g = build_grid(m, {}, t, {});
  const auto f = solve_laplace(g, {});
  const double alpha = 0.8;
  // A huge threshold makes the far-field cells degenerate.
  const auto v = desired_velocity(f, g, alpha, 0.05);
  ASSERT_FALSE(v.empty);
  EXPECT_GT(v.degenerate_count, 0u);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) {
      const double s = v.v(i, k).norm();
      if (!v.degenerate(i, k)) {
        EXPECT_NEAR(s, alpha, 1e-12);
      } else {
        EXPECT_TRUE(s == 0.0 || std::abs(s - alpha) < 1e-12);
      }
    }
}

TEST(DesiredVelocity, PointsUphill) {
  // Independent oracle: central differences of the solved potential away from walls.
  const int m = 40;
  std::vector<CellRect> obs{{1, 15, 15, 22, 25}};
  std::vector<BoundaryRun> t{{1, Side::right, 5, 8}};
  const auto g = build_grid(m, obs, t, {});
  const auto f = solve_laplace(g, {});
  const auto v = desired_velocity(f, g, 1.0, 1e-14);
  for (int k = 1; k < m - 1; ++k)
    for (int i = 1; i < m - 1; ++i) {
      bool interior = true;
      for (int d = -1; d <= 1; ++d) interior = interior && !g.is_wall(i + d, k) && !g.is_wall(i, k + d);
      if (!interior) continue;
      const Vec2 grad{f.u(i + 1, k) - f.u(i - 1, k), f.u(i, k + 1) - f.u(i, k - 1)};
      const double n = grad.norm();
      if (n < 1e-12) continue;
      EXPECT_NEAR(v.v(i, k).x, grad.x / n, 1e-9);
      EXPECT_NEAR(v.v(i, k).y, grad.y / n, 1e-9);
    }
}
