#include "gdl/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "gdl/carleson.hpp"
#include "gdl/error.hpp"
#include "gdl/flatness.hpp"
#include "gdl/pde.hpp"
#include "gdl/potential.hpp"

namespace gdl {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

CheckResult check(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    CheckResult r = body();
    r.name = name;
    return r;
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

DiscreteMeasure line(double half_width, int count, double outer = 0.0) {
  SetParams sp;
  sp.ambient_dim = 2;
  sp.plane_dim = 1;
  sp.half_width = half_width;
  sp.outer_extent = outer;
  return generate_set(SetKind::plane, sp, count, 1);
}

void potentials(bool quick, std::vector<CheckResult>& out) {
  out.push_back(check("flat line D_1 / dist", [&] {
    const DiscreteMeasure mu = line(4.0, 4000, 1e5);
    PotentialParams p;
    p.measure = mu;
    p.alpha = 1.0;
    const double want = 1.0 / flat_constant(1.0, 1.0);
    double worst = 0;
    for (double y : {0.05, 0.2, 0.5, 1.0}) {
      Point x(2);
      x << 0.1, y;
      worst = std::max(worst, std::abs(smooth_distance(p, x) / y / want - 1.0));
    }
    return CheckResult{"", worst < 5e-3, "max relative error " + num(worst)};
  }));
  out.push_back(check("gradient vs central differences", [&] {
    SetParams sp;
    sp.ambient_dim = 2;
    sp.ratio = 0.25;
    const DiscreteMeasure mu = generate_set(SetKind::cantor_dust, sp, 256, 2);
    PotentialParams p;
    p.measure = mu;
    p.alpha = 1.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    double worst = 0;
    const int m = quick ? 10 : 50;
    for (int i = 0; i < m; ++i) {
      Point x(2);
      x << U(rng), U(rng);
      if (mu.distance(x) < 0.1) continue;
      const Eigen::VectorXd g = smooth_distance_gradient(p, x);
      Eigen::VectorXd fd(2);
      const double h = 1e-5;
      for (int a = 0; a < 2; ++a) {
        Point xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        fd[a] = (smooth_distance(p, xp) - smooth_distance(p, xm)) / (2 * h);
      }
      worst = std::max(worst, (g - fd).norm() / g.norm());
    }
    return CheckResult{"", worst < 1e-5, "max relative error " + num(worst)};
  }));
  out.push_back(check("magic alpha residual vanishes (n = 4, line)", [&] {
    SetParams sp;
    sp.ambient_dim = 4;
    sp.plane_dim = 1;
    sp.half_width = 4.0;
    const DiscreteMeasure mu = generate_set(SetKind::plane, sp, 2000, 1);
    PotentialParams p;
    p.measure = mu;
    p.alpha = 1.0;
    Eigen::MatrixXd nodes(4, 3);
    nodes << 0.0, 0.3, -0.5, 0.5, 0.2, 0.1, 0.3, 0.4, 0.6, 0.0, 0.3, -0.2;
    const RefinementStudy s = magic_refinement(p, nodes, 0.05, 3, 0.1);
    return CheckResult{"", s.vanishes, "observed order " + num(s.observed_order)};
  }));
}

void flatness(bool quick, std::vector<CheckResult>& out) {
  out.push_back(check("empty ball contributes zero", [&] {
    const DiscreteMeasure mu = line(1.0, 200);
    Point c(2);
    c << 0.0, 5.0;
    const double v = local_hausdorff(mu, mu, Ball{c, 1.0});
    return CheckResult{"", v == 0.0, "value " + num(v)};
  }));
  out.push_back(check("alpha number of a line", [&] {
    const DiscreteMeasure mu = line(2.0, quick ? 800 : 2000);
    const AlphaNumber a = alpha_number(mu, Ball{Point::Zero(2), 1.0}, 1);
    return CheckResult{"", a.value <= 1e-3, "alpha " + num(a.value)};
  }));
  out.push_back(check("alpha number of a four-corner Cantor set", [&] {
    SetParams sp;
    sp.ambient_dim = 2;
    sp.ratio = 0.25;
    const DiscreteMeasure mu = generate_set(SetKind::cantor_dust, sp, 1024, 3);
    const AlphaNumber a = alpha_number(mu, Ball{mu.centroid(), 0.5}, 1);
    return CheckResult{"", a.value >= 0.05, "alpha " + num(a.value)};
  }));
}

void carleson(bool quick, std::vector<CheckResult>& out) {
  out.push_back(check("bad strip packing on a line", [&] {
    const DiscreteMeasure mu = line(2.0, 4000);
    const double a = 0.125;
    const ScalePairSet set = dyadic_pairs(mu, Ball{Point::Zero(2), 1.0}, 6, quick ? 500 : 2000, 3);
    const PackingEstimate est = packing_estimate(
        set, [&](const ScalePair& p) { return p.radius > a && p.radius < 0.5 && p.center.norm() < 0.5; });
    const double want = *mu.ar_constant() * std::log(1.0 / (2 * a));
    return CheckResult{"", std::abs(est.value / want - 1.0) < 0.1,
                       "estimate " + num(est.value) + " vs " + num(want)};
  }));
  out.push_back(check("oscillating coefficient keeps a distance gap", [&] {
    std::vector<double> g, t;
    for (int i = 1; i <= 20000; ++i) {
      const double y = 4.0 * i / 20000.0;
      g.push_back(oscillating_band_solution(y));
      t.push_back(y);
    }
    const ChebyshevFit f = chebyshev_scale_fit(g, t);
    return CheckResult{"", f.sup >= 0.02 * 4.0, "sup / M " + num(f.sup / 4.0)};
  }));
  out.push_back(check("Chebyshev fit is scale covariant", [&] {
    std::vector<double> g{0.1, 0.5, 0.9, 1.3}, t{0.12, 0.48, 0.95, 1.28}, g2;
    for (double v : g) g2.push_back(10.0 * v);
    const ChebyshevFit a = chebyshev_scale_fit(g, t), b = chebyshev_scale_fit(g2, t);
    const bool ok = std::abs(a.c / (10.0 * b.c) - 1.0) < 1e-6 && std::abs(a.sup - b.sup) < 1e-9;
    return CheckResult{"", ok, "c ratio " + num(a.c / (10.0 * b.c))};
  }));
}

void pde(bool quick, std::vector<CheckResult>& out) {
  out.push_back(check("strip Green function above a line is affine", [&] {
    const DiscreteMeasure mu = line(1.5, 600);
    const int cells = quick ? 32 : 64;
    const ScalarGrid layout({uniform_axis(-0.5, 0.5, cells), uniform_axis(-4.0 / cells, 1.0, cells + 4)});
    Domain dom{mu, layout.box(), side::halfspace((Point(2) << 0.0, 1.0).finished(), 0.0), 0.25 / cells};
    Point a0(2);
    a0 << 0.0, 0.5;
    const GreenField g = green_periodic_strip(OperatorSpec::laplacian(), dom, layout, a0, 1);
    double worst = 0;
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const Point x = layout.node(k);
      if (x[1] <= 0) continue;
      worst = std::max(worst, std::abs(g.values[k] - x[1] / a0[1]));
    }
    const Eigen::VectorXd f = g.flux;
    double below = 0, above = 0;
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const double v = f[static_cast<Eigen::Index>(k)];
      if (layout.node(k)[1] < 0.5) below += v;
      else above += v;
    }
    const bool ok = worst < 1e-8 && std::abs(below + above) < 1e-8 * std::abs(below);
    return CheckResult{"", ok, "sup error " + num(worst) + ", flux balance " + num(below + above)};
  }));
  out.push_back(check("finite-pole Green function is positive and vanishes on E", [&] {
    const DiscreteMeasure mu = line(2.0, 800);
    const ScalarGrid layout({uniform_axis(-1.0, 1.0, 40), uniform_axis(-0.1, 1.0, 22)});
    Domain dom{mu, layout.box(), side::halfspace((Point(2) << 0.0, 1.0).finished(), 0.0), 0.02};
    Point y(2), a0(2);
    y << 0.0, 0.6;
    a0 << 0.3, 0.3;
    const GreenField g = green_finite_pole(OperatorSpec::laplacian(), dom, layout, y, a0);
    double mn = 1e300, on_e = 0;
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const Point x = layout.node(k);
      if (dom.contains(x) && !layout.on_boundary(k)) mn = std::min(mn, g.values[k]);
      if (!dom.contains(x)) on_e = std::max(on_e, std::abs(g.values[k]));
    }
    return CheckResult{"", mn > 0 && on_e == 0.0, "min interior " + num(mn)};
  }));
}

}  // namespace

std::vector<CheckResult> run_suite(const std::string& suite, bool quick) {
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  if (!all && suite != "potentials" && suite != "flatness" && suite != "carleson" && suite != "pde")
    throw Error(Errc::validation, "unknown suite '" + suite + "'", "suite");
  if (all || suite == "potentials") potentials(quick, out);
  if (all || suite == "flatness") flatness(quick, out);
  if (all || suite == "carleson") carleson(quick, out);
  if (all || suite == "pde") pde(quick, out);
  return out;
}

}  // namespace gdl
