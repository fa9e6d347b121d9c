#include <gtest/gtest.h>

#include <cmath>

#include "gdl/error.hpp"
#include "gdl/potential.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

DiscreteMeasure line(int count, double half_width = 2.0, double outer = 0.0) {
  SetParams sp;
  sp.half_width = half_width;
  sp.outer_extent = outer;
  return generate_set(SetKind::plane, sp, count, 1);
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gdl::Error thrown";
  return Errc::io;
}

}  // namespace

TEST(FlatConstant, MatchesQuadrature) {
  for (double beta : {0.3, 0.5, 1.0, 1.7, 2.0, 3.5})
    EXPECT_NEAR(flat_constant(1.0, beta), oracle::line_flat_constant(beta), 1e-10) << beta;
  EXPECT_NEAR(flat_constant(2.0, 2.0), M_PI, 1e-12);
}

TEST(RieszPotential, MatchesDirectSum) {
  const DiscreteMeasure mu = line(500);
  PotentialParams p;
  p.measure = mu;
  p.alpha = 1.3;
  Eigen::Vector2d x(0.3, 0.4);
  EXPECT_NEAR(riesz_potential(p, x) / oracle::riesz_sum(mu.points(), mu.weights(), 2.3, x), 1.0, 1e-12);
  const QuadratureValue q = riesz_potential_estimate(p, x);
  EXPECT_LT(q.error_estimate, 1e-3 * q.value);
}

TEST(RieszPotential, CollarAndValidation) {
  PotentialParams p;
  p.measure = line(500);
  EXPECT_EQ(code_of([&] { riesz_potential(p, Eigen::Vector2d(0.0, 1e-6)); }), Errc::too_close_to_boundary);
  p.alpha = -1.0;
  EXPECT_EQ(code_of([&] { p.validate(); }), Errc::invalid_params);
}

TEST(SmoothDistance, FlatLineIsMultipleOfDistance) {
  PotentialParams p;
  p.measure = line(4000, 2.0, 1e8);
  p.alpha = 1.0;
  const double k = std::pow(M_PI, -1.0);
  for (double y : {0.1, 0.3, 0.9}) EXPECT_NEAR(smooth_distance(p, Eigen::Vector2d(0.1, y)) / y, k, 1e-3 * k);
}

TEST(SmoothDistance, GradientMatchesFiniteDifference) {
  PotentialParams p;
  p.measure = line(800);
  p.alpha = 0.7;
  Eigen::Vector2d x(0.2, 0.35);
  const DistanceAndGradient both = smooth_distance_with_gradient(p, x);
  EXPECT_NEAR(both.value, smooth_distance(p, x), 1e-14);
  for (int a = 0; a < 2; ++a) {
    Eigen::Vector2d xp = x, xm = x;
    xp[a] += 1e-5;
    xm[a] -= 1e-5;
    EXPECT_NEAR((smooth_distance(p, xp) - smooth_distance(p, xm)) / 2e-5, both.gradient[a], 1e-7);
  }
}

TEST(SmoothDistance, ScalesUnderDilation) {
  // D is homogeneous of degree one under X -> s X with weights scaled by s^d.
  PotentialParams p;
  p.measure = line(400);
  p.alpha = 1.0;
  PotentialParams q = p;
  q.measure = p.measure.transformed(Eigen::MatrixXd::Identity(2, 2), Point::Zero(2), 2.5);
  Eigen::Vector2d x(0.1, 0.3);
  EXPECT_NEAR(smooth_distance(q, 2.5 * x), 2.5 * smooth_distance(p, x), 1e-10);
}

TEST(MagicAlpha, ResidualChecksExponent) {
  SetParams sp;
  sp.ambient_dim = 4;
  sp.plane_dim = 1;
  PotentialParams p;
  p.measure = generate_set(SetKind::plane, sp, 200, 1);
  p.alpha = 0.5;
  const ScalarGrid g = ScalarGrid::uniform(Box{Point::Constant(4, -0.5), Point::Constant(4, 0.5)}, {5, 5, 5, 5});
  EXPECT_EQ(code_of([&] { magic_alpha_residual(p, g, 4); }), Errc::wrong_alpha);
  p.alpha = 1.0;
  EXPECT_GE(magic_alpha_residual(p, g, 4), 0.0);
}

TEST(Equivalence, ExponentZeroRejected) {
  PotentialParams p;
  SetParams sp;
  sp.ambient_dim = 3;
  sp.plane_dim = 1;
  p.measure = generate_set(SetKind::plane, sp, 200, 1);
  const ScalarGrid g = ScalarGrid::uniform(Box{Point::Constant(3, -0.5), Point::Constant(3, 0.5)}, {5, 5, 5});
  EXPECT_EQ(code_of([&] { equivalence_check_8a1(p, g, 3); }), Errc::exponent_zero);
}

TEST(Refinement, FitRecoversOrder) {
  const RefinementStudy s = fit_refinement({0.1, 0.05, 0.025, 0.0125}, {1e-2, 2.5e-3, 6.25e-4, 1.5625e-4});
  EXPECT_NEAR(s.observed_order, 2.0, 1e-12);
  EXPECT_TRUE(s.vanishes);
}
