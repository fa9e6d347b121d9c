#include <gtest/gtest.h>

#include <random>

#include "gdl/transport.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

SignedCloud random_cloud(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  SignedCloud c;
  c.points.resize(2, m);
  c.mass.resize(m);
  c.center = Eigen::VectorXd::Zero(2);
  c.radius = 1.0;
  for (int i = 0; i < m; ++i) {
    do {
      c.points(0, i) = u(rng);
      c.points(1, i) = u(rng);
    } while (c.points.col(i).norm() >= 1.0);
    c.mass[i] = u(rng);
  }
  return c;
}

}  // namespace

TEST(LipschitzDual, MatchesDenseSimplex) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const SignedCloud c = random_cloud(24, seed);
    EXPECT_NEAR(lipschitz_dual(c).value, oracle::lipschitz_dual_dense(c.points, c.mass, c.center, c.radius), 1e-9);
  }
}

TEST(LipschitzDual, PotentialIsFeasibleAndOptimal) {
  const SignedCloud c = random_cloud(300, 9);
  const DualSolution s = lipschitz_dual(c);
  EXPECT_NEAR(c.mass.dot(s.phi), s.value, 1e-9 * std::max(1.0, s.value));
  for (int i = 0; i < c.points.cols(); ++i) {
    EXPECT_LE(std::abs(s.phi[i]), c.radius - c.points.col(i).norm() + 1e-9);
    for (int j = 0; j < i; ++j) EXPECT_LE(std::abs(s.phi[i] - s.phi[j]), (c.points.col(i) - c.points.col(j)).norm() + 1e-9);
  }
}

TEST(LipschitzDual, SingleAtomAtCenter) {
  SignedCloud c;
  c.points = Eigen::MatrixXd::Zero(2, 1);
  c.mass = Eigen::VectorXd::Constant(1, 2.0);
  c.center = Eigen::VectorXd::Zero(2);
  c.radius = 0.5;
  EXPECT_NEAR(lipschitz_dual(c).value, 1.0, 1e-12);
}
