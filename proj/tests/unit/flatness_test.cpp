#include <gtest/gtest.h>

#include "gdl/error.hpp"
#include "gdl/flatness.hpp"

using namespace gdl;

namespace {

DiscreteMeasure line(int count) {
  SetParams sp;
  sp.half_width = 2.0;
  return generate_set(SetKind::plane, sp, count, 1);
}

}  // namespace

TEST(FlatMeasure, DiscretizationMass) {
  const FlatMeasure s{AffinePlane::coordinate(2, 1), 1.5};
  const WeightedPoints w = discretize_flat(s, Ball{Point::Zero(2), 1.0}, 0.01);
  EXPECT_NEAR(w.weights.sum(), 3.0, 0.02);
}

TEST(LipschitzDualDistance, ZeroForMatchingLineLargeForShift) {
  const DiscreteMeasure mu = line(2000);
  const Ball b{Point::Zero(2), 1.0};
  const FlatMeasure flat{AffinePlane::coordinate(2, 1), 1.0};
  EXPECT_LT(lipschitz_dual_distance(mu, flat, b), 1e-3);
  const FlatMeasure heavy{AffinePlane::coordinate(2, 1), 2.0};
  // The mass defect of 1 per unit length against a tent of height 1 - |x|.
  EXPECT_NEAR(lipschitz_dual_distance(mu, heavy, b), 1.0, 0.02);
}

TEST(LipschitzDualDistance, UnderResolvedBall) {
  const DiscreteMeasure mu = line(100);
  const FlatMeasure flat{AffinePlane::coordinate(2, 1), 1.0};
  try {
    lipschitz_dual_distance(mu, flat, Ball{Point::Zero(2), 0.05});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::under_resolved);
  }
}

TEST(AlphaNumber, LineFlatCantorNot) {
  const AlphaNumber a = alpha_number(line(2000), Ball{Point::Zero(2), 1.0}, 1);
  EXPECT_LT(a.value, 1e-3);
  EXPECT_NEAR(a.best_fit.density, 1.0, 0.01);
  SetParams sp;
  sp.ratio = 0.25;
  const DiscreteMeasure dust = generate_set(SetKind::cantor_dust, sp, 1024, 1);
  Point c(2);
  c << 0.5, 0.5;
  EXPECT_GT(alpha_number(dust, Ball{c, 0.7}, 1).value, 0.05);
}

TEST(BestDensity, RecoversUnitDensity) {
  const auto [value, c] =
      best_density(line(2000), AffinePlane::coordinate(2, 1), Ball{Point::Zero(2), 1.0});
  EXPECT_NEAR(c, 1.0, 0.01);
  EXPECT_LT(value, 1e-3);
}

TEST(FlatFit, ConsequencesOnExactLine) {
  const DiscreteMeasure mu = line(4000);
  const FlatMeasure flat{AffinePlane::coordinate(2, 1), 1.0};
  const FlatFitReport r = flat_fit_consequences(mu, Ball{Point::Zero(2), 1.5}, flat, 0.01, 3.0);
  EXPECT_TRUE(r.support_dist_ok);
  EXPECT_TRUE(r.plane_meets_quarter_ball);
  EXPECT_TRUE(r.density_bounds_ok);
  EXPECT_LT(r.support_to_plane, 1e-9);
}
