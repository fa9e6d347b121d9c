#include <gtest/gtest.h>

#include "gdl/grid.hpp"

using namespace gdl;

TEST(Axis, UniformAndGraded) {
  const Axis u = uniform_axis(-1.0, 1.0, 4);
  ASSERT_EQ(u.size(), 5u);
  EXPECT_DOUBLE_EQ(u[2], 0.0);
  const Axis g = graded_axis(-10.0, 10.0, -1.0, 1.0, 0.1, 1.2);
  EXPECT_DOUBLE_EQ(g.front(), -10.0);
  EXPECT_DOUBLE_EQ(g.back(), 10.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
}

TEST(Axis, StretchedRefinementKeepsCoarseNodes) {
  const Axis a = stretched_axis(-100.0, 100.0, 0.0, 0.1, 3.0, 1);
  const Axis b = stretched_axis(-100.0, 100.0, 0.0, 0.1, 3.0, 2);
  ASSERT_EQ(b.size(), 2 * a.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[2 * i], a[i], 1e-9 * (1.0 + std::abs(a[i])));
  EXPECT_DOUBLE_EQ(a.front(), -100.0);
  EXPECT_DOUBLE_EQ(a.back(), 100.0);
  const Axis s = subdivide_axis(a, 3);
  EXPECT_EQ(s.size(), 3 * (a.size() - 1) + 1);
}

TEST(ScalarGrid, IndexingAndInterpolation) {
  ScalarGrid g({uniform_axis(0.0, 1.0, 4), graded_axis(0.0, 3.0, 0.0, 1.0, 0.25, 1.5)});
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(g.ravel(g.unravel(k)), static_cast<long>(k));
    g[k] = 2.0 * g.coord(k, 0) - g.coord(k, 1) + 0.5;
  }
  Eigen::Vector2d x(0.37, 1.9);
  const auto v = g.interpolate(x);
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR(*v, 2.0 * 0.37 - 1.9 + 0.5, 1e-12);
  EXPECT_FALSE(g.interpolate(Eigen::Vector2d(2.0, 0.0)).has_value());
  const std::size_t k = g.nearest_node(Eigen::Vector2d(0.5, 0.5));
  const Eigen::VectorXd grad = g.gradient(k);
  EXPECT_NEAR(grad[0], 2.0, 1e-12);
  EXPECT_NEAR(grad[1], -1.0, 1e-12);
}

TEST(ScalarGrid, NodesInBoxAndCellVolumes) {
  const ScalarGrid g = ScalarGrid::uniform(Box{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)}, {11, 11});
  const auto nodes = g.nodes_in_box(Box{Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.5, 0.5)});
  EXPECT_EQ(nodes.size(), 16u);
  EXPECT_EQ(g.nodes_in_box(Box{Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.5, 0.5)}, 2).size(), 4u);
  double vol = 0;
  for (std::size_t k = 0; k < g.size(); ++k) vol += g.cell_volume(k);
  EXPECT_NEAR(vol, 1.0, 1e-12);
  EXPECT_TRUE(g.is_uniform());
  EXPECT_TRUE(g.on_boundary(0));
}
