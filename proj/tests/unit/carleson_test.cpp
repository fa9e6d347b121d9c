#include <gtest/gtest.h>

#include <cmath>

#include "gdl/carleson.hpp"
#include "gdl/error.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

DiscreteMeasure line(int count, double half_width = 2.0) {
  SetParams sp;
  sp.half_width = half_width;
  return generate_set(SetKind::plane, sp, count, 1);
}

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST(DyadicPairs, TotalWeightIsLevelsTimesLog2) {
  const DiscreteMeasure mu = line(2000);
  const Ball root{Point::Zero(2), 1.0};
  const ScalePairSet set = dyadic_pairs(mu, root, 5, 200, 1);
  EXPECT_EQ(set.pairs.size(), 1000u);
  const double all = packing_integral(set, [](const ScalePair&) { return true; });
  EXPECT_NEAR(all, mu.mass_in_ball(root) * 5.0 * std::log(2.0), 1e-9);
  for (const ScalePair& p : set.pairs) {
    EXPECT_LE(p.radius, std::ldexp(1.0, -p.level) + 1e-12);
    EXPECT_GE(p.radius, std::ldexp(1.0, -p.level - 1) - 1e-12);
    EXPECT_LT(p.center.norm(), 1.0);
  }
}

TEST(DyadicPairs, BelowResolutionThrows) {
  try {
    dyadic_pairs(line(100), Ball{Point::Zero(2), 1.0}, 12, 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::level_below_resolution);
  }
}

TEST(GoodUr, LineIsFlatCantorIsNot) {
  const UrVerdict v = good_ur(line(2000), Ball{Point::Zero(2), 0.5}, 0.05, 1);
  EXPECT_TRUE(v.good);
  EXPECT_LT(v.value, 0.01);
  SetParams sp;
  sp.ratio = 0.25;
  const DiscreteMeasure dust = generate_set(SetKind::cantor_dust, sp, 1024, 1);
  EXPECT_FALSE(good_ur(dust, Ball{pt(0.5, 0.5), 0.7}, 0.05, 1).good);
}

TEST(ChebyshevFit, ExactForProportionalData) {
  const ChebyshevFit f = chebyshev_scale_fit({1, 2, 3, 4}, {2, 4, 6, 8});
  EXPECT_NEAR(f.c, 2.0, 1e-6);
  EXPECT_NEAR(f.sup, 0.0, 1e-6);
  // t = g + (+-1) alternating: the best c is 1 with sup 1.
  const ChebyshevFit g = chebyshev_scale_fit({1, 2, 3, 4}, {2, 1, 4, 3});
  EXPECT_NEAR(g.sup, 1.0, 1e-6);
}

TEST(OscillatingBands, SolutionMatchesOracle) {
  for (double y : {0.01, 0.3, 1.0, 1.5, 3.0, 7.9, 40.0}) {
    EXPECT_NEAR(oscillating_band_solution(y), oracle::band_solution(y), 1e-12 * (1 + y)) << y;
  }
  EXPECT_EQ(oscillating_band_coefficient(1.5), 1.0);
  EXPECT_EQ(oscillating_band_coefficient(3.0), 2.0);
}

TEST(GoodCc, ConstantCoefficientIsGood) {
  const DiscreteMeasure mu = line(2000, 6.0);
  const ScalarGrid layout({uniform_axis(-5.0, 5.0, 100), uniform_axis(-1.0, 5.0, 60)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0)};
  const CoefficientField id = [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2));
  };
  const CcVerdict v = good_cc(id, 1.0, dom, layout, Ball{Point::Zero(2), 1.0}, 0.01, 4.0);
  EXPECT_TRUE(v.good);
  EXPECT_NEAR(v.defect, 0.0, 1e-12);
  EXPECT_TRUE(v.a0_elliptic);
  EXPECT_GT(v.nodes, 0u);
}

TEST(GreenPlane, LinearFieldIsGoodAndScaleFree) {
  const DiscreteMeasure mu = line(2000, 3.0);
  ScalarGrid G({uniform_axis(-2.0, 2.0, 80), uniform_axis(-0.5, 2.0, 50)});
  for (std::size_t k = 0; k < G.size(); ++k) G[k] = std::max(0.0, 3.0 * G.coord(k, 1));
  const Domain dom{mu, G.box(), side::halfspace(pt(0, 1), 0.0)};
  const Ball pair{Point::Zero(2), 0.5};
  const GreenPlaneVerdict v = good_green_plane(G, dom, pair, 0.01, 2.0, 1);
  EXPECT_TRUE(v.good);
  EXPECT_NEAR(v.c, 1.0 / 3.0, 1e-6);
  ScalarGrid G2 = G;
  G2.values() *= 10.0;
  const GreenPlaneVerdict w = good_green_plane(G2, dom, pair, 0.01, 2.0, 1);
  EXPECT_EQ(w.good, v.good);
  EXPECT_NEAR(w.c * 10.0 / v.c, 1.0, 1e-7);
}

TEST(Prevalence, LineAuditIsConsistent) {
  const DiscreteMeasure mu = line(4000);
  PrevalenceOptions o;
  o.windows = 16;
  o.samples_per_level = 8;
  const PrevalenceReport r = prevalence_audit(
      mu, Ball{Point::Zero(2), 1.0}, 4,
      [&](const ScalePair& p) { return good_ur(mu, Ball{p.center, p.radius}, 0.05, 1).good; }, o);
  EXPECT_EQ(r.windows.size(), 16u);
  EXPECT_TRUE(r.consistent);
  EXPECT_NEAR(r.max_deep_bad_fraction, 0.0, 1e-12);
}
