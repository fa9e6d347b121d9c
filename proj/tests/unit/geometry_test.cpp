#include <gtest/gtest.h>

#include <cmath>

#include "gdl/error.hpp"
#include "gdl/geometry.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
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

TEST(AffinePlane, ProjectionAndDistance) {
  Eigen::MatrixXd dirs(3, 2);
  dirs << 1, 0, 1, 1, 0, 1;
  const AffinePlane p = AffinePlane::from_span(Point::Zero(3), dirs);
  EXPECT_TRUE(p.orthonormal());
  Eigen::Vector3d normal(1, -1, 1);
  normal.normalize();
  const Point x = 0.7 * normal;
  EXPECT_NEAR(p.distance(x), 0.7, 1e-12);
  EXPECT_NEAR(p.project(x).norm(), 0.0, 1e-12);
  EXPECT_NEAR((p.normal_basis().transpose() * p.frame()).norm(), 0.0, 1e-12);
}

TEST(AffinePlane, RejectsNonOrthonormalFrame) {
  Eigen::MatrixXd frame(2, 1);
  frame << 1.0, 1.0;
  EXPECT_EQ(code_of([&] { AffinePlane(Point::Zero(2), frame); }), Errc::invalid_params);
}

TEST(UnitBall, KnownVolumes) {
  EXPECT_NEAR(unit_ball_volume(1), 2.0, 1e-12);
  EXPECT_NEAR(unit_ball_volume(2), M_PI, 1e-12);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * M_PI / 3.0, 1e-12);
}

TEST(GenerateSet, PlaneHasUnitDensity) {
  SetParams sp;
  sp.half_width = 2.0;
  const DiscreteMeasure mu = generate_set(SetKind::plane, sp, 1000, 1);
  EXPECT_NEAR(mu.total_mass(), 4.0, 1e-9);
  EXPECT_NEAR(mu.mass_in_ball(Ball{Point::Zero(2), 1.0}), 2.0, 2.0 * mu.resolution_h());
  ASSERT_TRUE(mu.ar_constant().has_value());
  EXPECT_LT(*mu.ar_constant(), 1.2);
}

TEST(GenerateSet, CantorDimensionAndSelfSimilarity) {
  SetParams sp;
  sp.ratio = 0.25;
  const DiscreteMeasure mu = generate_set(SetKind::cantor_dust, sp, 4096, 1);
  EXPECT_NEAR(mu.dim_d(), 1.0, 1e-12);
  EXPECT_NEAR(mu.total_mass(), 1.0, 1e-9);
  // The unit square is centred at the origin; every first-generation corner carries a quarter of the mass.
  const Point c = pt(-0.375, -0.375);
  EXPECT_NEAR(mu.mass_in_ball(Ball{c, 0.2}), 0.25, 1e-9);
}

TEST(GenerateSet, KochBoxCountingDimension) {
  SetParams sp;
  sp.iterations = 6;
  const DiscreteMeasure mu = generate_set(SetKind::koch_snowflake, sp, 4096 * 4, 1);
  EXPECT_NEAR(mu.dim_d(), std::log(4.0) / std::log(3.0), 1e-12);
  const double dim = oracle::box_counting_dimension(mu.points(), {1.0 / 9, 1.0 / 27, 1.0 / 81, 1.0 / 243});
  EXPECT_NEAR(dim, std::log(4.0) / std::log(3.0), 0.06);
}

TEST(GenerateSet, KochPolylineEndpoints) {
  const Eigen::MatrixXd p = koch_polyline(3, 2.0, -1.0);
  ASSERT_EQ(p.cols(), 65);
  EXPECT_NEAR(p(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(p(0, 64), 1.0, 1e-12);
  EXPECT_NEAR(p(1, 64), 0.0, 1e-12);
}

TEST(GenerateSet, InvalidParameters) {
  SetParams sp;
  sp.ratio = 0.6;
  EXPECT_EQ(code_of([&] { generate_set(SetKind::cantor_dust, sp, 256, 1); }), Errc::invalid_params);
  SetParams few;
  EXPECT_EQ(code_of([&] { generate_set(SetKind::plane, few, 1, 1); }), Errc::count_too_small);
}

TEST(DiscreteMeasure, TransformedScalesMass) {
  SetParams sp;
  const DiscreteMeasure mu = generate_set(SetKind::plane, sp, 200, 1);
  const DiscreteMeasure big = mu.transformed(Eigen::MatrixXd::Identity(2, 2), Point::Zero(2), 3.0);
  EXPECT_NEAR(big.total_mass(), 3.0 * mu.total_mass(), 1e-9);
  EXPECT_NEAR(mu.with_total_mass(5.0).total_mass(), 5.0, 1e-12);
  EXPECT_NEAR(mu.half().total_mass(), mu.total_mass(), 2.0 * mu.resolution_h());
}

TEST(LocalHausdorff, PlaneAgainstItsOwnCloud) {
  SetParams sp;
  sp.half_width = 2.0;
  const DiscreteMeasure mu = generate_set(SetKind::plane, sp, 2000, 1);
  const Ball b{Point::Zero(2), 1.0};
  EXPECT_LT(local_hausdorff(mu, AffinePlane::coordinate(2, 1), b), 2.0 * mu.resolution_h());
  const AffinePlane shifted(pt(0, 0.1), AffinePlane::coordinate(2, 1).frame());
  EXPECT_NEAR(local_hausdorff(mu, shifted, b), 0.2, 0.01);
}

TEST(Domain, CorkscrewAndConditionB) {
  SetParams sp;
  sp.half_width = 2.0;
  const DiscreteMeasure mu = generate_set(SetKind::plane, sp, 800, 1);
  Domain dom{mu, Box{pt(-2, -2), pt(2, 2)}, side::halfspace(pt(0, 1), 0.0)};
  const auto a = corkscrew_point(dom, Ball{Point::Zero(2), 1.0}, 0.5);
  ASSERT_TRUE(a.has_value());
  EXPECT_GE(mu.distance(*a), 0.5);
  EXPECT_GT((*a)[1], 0.0);

  Domain both{mu, Box{pt(-2, -2), pt(2, 2)}};
  const auto w = condition_b_witness(both, Ball{Point::Zero(2), 1.0}, 0.3);
  ASSERT_TRUE(w.has_value());
  EXPECT_LT(w->first[1] * w->second[1], 0.0);

  const auto chain = harnack_chain(dom, pt(-0.5, 0.5), pt(0.5, 0.5), 0.25);
  ASSERT_TRUE(chain.has_value());
  EXPECT_GE(chain->length(), 1u);
}
