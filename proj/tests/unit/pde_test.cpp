#include <gtest/gtest.h>

#include <cmath>

#include "gdl/error.hpp"
#include "gdl/pde.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

DiscreteMeasure line(int count, double half_width) {
  SetParams sp;
  sp.half_width = half_width;
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

TEST(Assemble, SymmetricLaplacianWithPositiveDiagonal) {
  const DiscreteMeasure mu = line(400, 2.0);
  const ScalarGrid layout({uniform_axis(-1.0, 1.0, 16), uniform_axis(0.0, 1.0, 8)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 0.01};
  const LinearSystem sys = assemble(OperatorSpec::laplacian(), dom, layout);
  EXPECT_TRUE(sys.symmetric);
  EXPECT_EQ(sys.unknowns(), 15u * 7u);
  const Eigen::SparseMatrix<double> m = sys.matrix;
  EXPECT_NEAR((Eigen::MatrixXd(m) - Eigen::MatrixXd(m).transpose()).norm(), 0.0, 1e-12);
  for (std::size_t u = 0; u < sys.unknowns(); ++u) EXPECT_GT(m.coeff(u, u), 0.0);
}

TEST(Assemble, EllipticityViolation) {
  const DiscreteMeasure mu = line(400, 2.0);
  const ScalarGrid layout({uniform_axis(-1.0, 1.0, 8), uniform_axis(0.0, 1.0, 4)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 0.01};
  OperatorSpec op;
  op.coeff = [](const Eigen::Ref<const Eigen::VectorXd>&) { return Eigen::MatrixXd(5.0 * Eigen::MatrixXd::Identity(2, 2)); };
  op.ellipticity = 2.0;
  EXPECT_EQ(code_of([&] { assemble(op, dom, layout); }), Errc::ellipticity_violation);
}

TEST(SolveDirichlet, ReproducesLinearData) {
  const DiscreteMeasure mu = line(800, 2.0);
  const ScalarGrid layout({uniform_axis(-1.0, 1.0, 20), uniform_axis(0.0, 1.0, 10)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 0.01};
  BoundarySetup b;
  b.outer_value = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return x[1]; };
  const GreenField g = solve_dirichlet(OperatorSpec::laplacian(), dom, layout, b, pt(0, 0.5));
  for (std::size_t k = 0; k < layout.size(); ++k) EXPECT_NEAR(g.values[k], 2.0 * layout.coord(k, 1), 1e-9);
}

TEST(PeriodicStrip, FlatStripIsAffineAndFluxBalances) {
  const DiscreteMeasure mu = line(800, 2.0);
  const ScalarGrid layout({uniform_axis(-1.0, 1.0, 256), uniform_axis(-4.0 / 128, 2.0, 260)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 0.25 / 128};
  const GreenField g = green_periodic_strip(OperatorSpec::laplacian(), dom, layout, pt(0, 0.5), 1);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const double y = layout.coord(k, 1);
    EXPECT_NEAR(g.values[k], std::max(y, 0.0) / 0.5, 1e-9);
  }
  ASSERT_EQ(static_cast<std::size_t>(g.flux.size()), layout.size());
  // Slope 1 / 0.5 across a period of width 2 enters E and leaves through the lifted face.
  double into_e = 0;
  for (std::size_t k = 0; k < layout.size(); ++k)
    if (layout.coord(k, 1) < 1.0) into_e += g.flux[static_cast<Eigen::Index>(k)];
  EXPECT_NEAR(into_e, 2.0 / 0.5, 1e-6);
  EXPECT_NEAR(g.flux.sum(), 0.0, 1e-9);
  const HolderEnvelope env = holder_envelope(g, dom, Ball{pt(0, 0.0), 1.0});
  // dist is measured to the discrete cloud, so small distances differ slightly from y.
  EXPECT_NEAR(env.gamma, 1.0, 1e-2);
}

TEST(PointSource, MassLandsOnUnknowns) {
  const DiscreteMeasure mu = line(400, 2.0);
  const ScalarGrid layout({uniform_axis(-1.0, 1.0, 16), uniform_axis(0.0, 2.0, 16)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 0.01};
  const LinearSystem sys = assemble(OperatorSpec::laplacian(), dom, layout);
  EXPECT_NEAR(point_source(sys, pt(0.03, 1.01), 2.0).sum(), 2.0, 1e-12);
}

TEST(FinitePole, MatchesImagesAndRejectsCollar) {
  const DiscreteMeasure mu = line(2000, 40.0);
  ScalarGrid layout({stretched_axis(-4096, 4096, 0, 1.0 / 16, 3.0, 2), stretched_axis(0, 4096, 0, 1.0 / 16, 3.0, 2)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 1.0 / 128};
  const Point y = layout.node(layout.nearest_node(pt(0, 2.0)));
  const GreenField g = green_finite_pole(OperatorSpec::laplacian(), dom, layout, y, pt(0, 0.5));
  const double ref = oracle::half_plane_green(y[1], 0.0, 0.5);
  for (double x : {-0.5, 0.0, 0.7})
    for (double h : {0.25, 0.5, 1.0})
      EXPECT_NEAR(g.at(pt(x, h)), oracle::half_plane_green(y[1], x, h) / ref, 2e-3);
  EXPECT_EQ(code_of([&] { green_finite_pole(OperatorSpec::laplacian(), dom, layout, mu.point(1000) + pt(0, 0.001), pt(0, 0.5)); }),
            Errc::pole_in_collar);
}

TEST(Proxy, CorkscrewValueOnFlatStrip) {
  const DiscreteMeasure mu = line(800, 2.0);
  const ScalarGrid layout({uniform_axis(-1.0, 1.0, 64), uniform_axis(-4.0 / 32, 2.0, 68)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 0.25 / 32};
  const GreenField g = green_periodic_strip(OperatorSpec::laplacian(), dom, layout, pt(0, 1.0), 1);
  const ProxyValue p = harmonic_measure_proxy(g, dom, Ball{Point::Zero(2), 0.5}, 0.25);
  EXPECT_NEAR(p.value, p.corkscrew[1], 1e-9);
  EXPECT_GE(p.corkscrew[1], 0.125);
}

TEST(Extraction, ExactHalfPlanePasses) {
  const DiscreteMeasure mu = line(6144, 12.0);
  const double h = 1.0 / 64;
  const ScalarGrid layout({uniform_axis(-3.0, 3.0, 384), uniform_axis(-0.5, 3.0, 224)});
  const Domain dom{mu, layout.box(), side::halfspace(pt(0, 1), 0.0), 0.25 * h};
  GreenField g;
  g.values = layout;
  for (std::size_t k = 0; k < layout.size(); ++k) g.values[k] = std::max(layout.coord(k, 1), 0.0);
  const HolderEnvelope env = holder_envelope(g, dom, Ball{Point::Zero(2), 2.0});
  const ExtractionVerdict v =
      theorem61_extract(g, dom, Ball{Point::Zero(2), 1.0}, 0.05, AffinePlane::coordinate(2, 1), 1.0, env);
  EXPECT_TRUE(v.step_e_near_plane);
  EXPECT_TRUE(v.step_corkscrew);
  EXPECT_TRUE(v.step_slab);
  EXPECT_TRUE(v.pass);
  EXPECT_NEAR(v.tau, 0.05, 1e-12);
  // A plane tilted by 0.2 leaves E far from it inside B(x, 10 r).
  const AffinePlane tilted = AffinePlane::from_span(Point::Zero(2), pt(1.0, 0.2));
  EXPECT_FALSE(theorem61_extract(g, dom, Ball{Point::Zero(2), 1.0}, 0.05, tilted, 1.0, env).pass);
}
