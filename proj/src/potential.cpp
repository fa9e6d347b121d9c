#include "gdl/potential.hpp"

#include <cmath>
#include <numbers>

#include "gdl/error.hpp"
#include "gdl/parallel.hpp"

namespace gdl {

PotentialParams PotentialParams::with_alpha(double a) const {
  PotentialParams q = *this;
  q.alpha = a;
  return q;
}

void PotentialParams::validate() const {
  if (!(alpha > 0)) throw Error(Errc::invalid_params, "alpha must be positive", "alpha");
  if (!(beta > 0)) throw Error(Errc::invalid_params, "beta must be positive", "beta");
  if (measure.size() == 0) throw Error(Errc::invalid_params, "empty measure", "measure");
}

double flat_constant(double d, double beta) {
  if (!(beta > 0) || !(d > 0)) throw Error(Errc::invalid_params, "flat constant needs d, beta > 0", "beta");
  return std::pow(std::numbers::pi, d / 2.0) * std::exp(std::lgamma(beta / 2.0) - std::lgamma((d + beta) / 2.0));
}

namespace {

void check_collar(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (p.measure.distance(x) <= p.collar_width())
    throw Error(Errc::too_close_to_boundary, "evaluation point lies inside the collar of E", "X");
}

// Fixed summation order (cloud order) keeps results bit-reproducible.
double raw_potential(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w, double expo,
                     const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = pts.rows();
  double sum = 0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    double r2 = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
      const double t = x[a] - pts(a, i);
      r2 += t * t;
    }
    sum += w[i] * std::pow(r2, -0.5 * expo);
  }
  return sum;
}

void raw_potential_gradient(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w, double expo,
                            const Eigen::Ref<const Eigen::VectorXd>& x, double& value, Eigen::VectorXd& grad) {
  const Eigen::Index n = pts.rows();
  value = 0;
  grad = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diff(n);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    diff = x - pts.col(i);
    const double r2 = diff.squaredNorm();
    const double k = w[i] * std::pow(r2, -0.5 * expo);
    value += k;
    grad -= (expo * k / r2) * diff;
  }
}

}  // namespace

double riesz_potential(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_collar(p, x);
  return raw_potential(p.measure.points(), p.measure.weights(), p.measure.dim_d() + p.alpha, x);
}

QuadratureValue riesz_potential_estimate(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  QuadratureValue q;
  q.value = riesz_potential(p, x);
  const DiscreteMeasure coarse = p.measure.half();
  const double v2 = raw_potential(coarse.points(), coarse.weights(), p.measure.dim_d() + p.alpha, x);
  q.error_estimate = std::abs(q.value - v2);
  return q;
}

Eigen::VectorXd riesz_gradient(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_collar(p, x);
  double v;
  Eigen::VectorXd g;
  raw_potential_gradient(p.measure.points(), p.measure.weights(), p.measure.dim_d() + p.alpha, x, v, g);
  return g;
}

double smooth_distance(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return std::pow(riesz_potential(p, x), -1.0 / p.alpha);
}

DistanceAndGradient smooth_distance_with_gradient(const PotentialParams& p,
                                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_collar(p, x);
  double r;
  Eigen::VectorXd gr;
  raw_potential_gradient(p.measure.points(), p.measure.weights(), p.measure.dim_d() + p.alpha, x, r, gr);
  DistanceAndGradient out;
  out.value = std::pow(r, -1.0 / p.alpha);
  out.gradient = (-1.0 / p.alpha) * std::pow(r, -1.0 / p.alpha - 1.0) * gr;
  return out;
}

Eigen::VectorXd smooth_distance_gradient(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return smooth_distance_with_gradient(p, x).gradient;
}

ScalarGrid sample_smooth_distance(const PotentialParams& p, const ScalarGrid& layout) {
  ScalarGrid g = layout.like();
  const double expo = p.measure.dim_d() + p.alpha;
  parallel_for(g.size(), [&](std::size_t k) {
    const Point x = g.node(k);
    g[k] = p.measure.distance(x) <= p.collar_width()
               ? std::numeric_limits<double>::quiet_NaN()
               : std::pow(raw_potential(p.measure.points(), p.measure.weights(), expo, x), -1.0 / p.alpha);
  });
  return g;
}

Eigen::MatrixXd interior_nodes(const ScalarGrid& grid, const DiscreteMeasure& mu, double margin) {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!grid.on_boundary(k) && mu.distance(grid.node(k)) > margin) keep.push_back(k);
  Eigen::MatrixXd out(grid.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = grid.node(keep[j]);
  return out;
}

ResidualSample laplacian_residual(const PotentialParams& p, const Eigen::MatrixXd& nodes, double h, double collar) {
  const double expo = p.measure.dim_d() + p.alpha;
  const auto& pts = p.measure.points();
  const auto& w = p.measure.weights();
  const Eigen::Index n = nodes.rows();
  std::vector<double> res(static_cast<std::size_t>(nodes.cols()), -1.0);
  parallel_for(res.size(), [&](std::size_t j) {
    const Eigen::VectorXd x = nodes.col(static_cast<Eigen::Index>(j));
    const double dist = p.measure.distance(x);
    if (dist <= collar + h) return;
    const double f0 = raw_potential(pts, w, expo, x);
    double lap = 0;
    Eigen::VectorXd y = x;
    for (Eigen::Index a = 0; a < n; ++a) {
      y[a] = x[a] + h;
      const double fp = raw_potential(pts, w, expo, y);
      y[a] = x[a] - h;
      const double fm = raw_potential(pts, w, expo, y);
      y[a] = x[a];
      lap += (fp - 2.0 * f0 + fm) / (h * h);
    }
    res[j] = std::abs(lap) * std::pow(dist, expo + 2.0);
  });
  ResidualSample out;
  for (double r : res)
    if (r >= 0) {
      out.max_residual = std::max(out.max_residual, r);
      ++out.nodes;
    }
  return out;
}

double magic_alpha_residual(const PotentialParams& p, const ScalarGrid& grid, int n) {
  p.validate();
  const double magic = n - p.measure.dim_d() - 2.0;
  if (std::abs(p.alpha - magic) > 1e-12)
    throw Error(Errc::wrong_alpha, "alpha must equal n - d - 2 for the magic residual", "alpha");
  if (!grid.is_uniform()) throw Error(Errc::invalid_params, "magic residual needs a uniform grid", "grid");
  const double h = grid.min_spacing();
  const double collar = std::max(p.measure.resolution_h(), 2.0 * h);
  return laplacian_residual(p, interior_nodes(grid, p.measure, collar), h, collar).max_residual;
}

EquivalenceReport equivalence_residuals(const PotentialParams& p, const Eigen::MatrixXd& nodes, double h,
                                        double collar, int n) {
  const double d = p.measure.dim_d();
  const double e = d + 2.0 - n;
  if (std::abs(e) < 1e-12) throw Error(Errc::exponent_zero, "d = n - 2 makes the exponent d + 2 - n vanish", "dim_d");
  const double expo = d + p.alpha;
  const auto& pts = p.measure.points();
  const auto& w = p.measure.weights();
  auto D = [&](const Eigen::VectorXd& x) { return std::pow(raw_potential(pts, w, expo, x), -1.0 / p.alpha); };
  std::vector<std::pair<double, double>> res(static_cast<std::size_t>(nodes.cols()), {-1.0, -1.0});
  parallel_for(res.size(), [&](std::size_t j) {
    const Eigen::VectorXd x = nodes.col(static_cast<Eigen::Index>(j));
    const double dist = p.measure.distance(x);
    if (dist <= collar + h) return;
    const double d0 = D(x);
    double lhs = 0, rhs = 0;
    Eigen::VectorXd y = x;
    for (int a = 0; a < n; ++a) {
      y[a] = x[a] + h;
      const double dp = D(y);
      y[a] = x[a] - h;
      const double dm = D(y);
      y[a] = x[a] + 0.5 * h;
      const double wp = std::pow(D(y), e - 1.0);
      y[a] = x[a] - 0.5 * h;
      const double wm = std::pow(D(y), e - 1.0);
      y[a] = x[a];
      lhs += (std::pow(dp, e) - 2.0 * std::pow(d0, e) + std::pow(dm, e)) / (h * h);
      rhs += (wp * (dp - d0) - wm * (d0 - dm)) / (h * h);
    }
    const double scale = std::pow(dist, 2.0 - e);
    res[j] = {std::abs(lhs) * scale, std::abs(rhs) * scale};
  });
  EquivalenceReport out;
  for (auto [l, r] : res)
    if (l >= 0) {
      out.lhs_residual = std::max(out.lhs_residual, l);
      out.rhs_residual = std::max(out.rhs_residual, r);
      ++out.nodes;
    }
  return out;
}

EquivalenceReport equivalence_check_8a1(const PotentialParams& p, const ScalarGrid& grid, int n) {
  p.validate();
  if (std::abs(p.measure.dim_d() + 2.0 - n) < 1e-12)
    throw Error(Errc::exponent_zero, "d = n - 2 makes the exponent d + 2 - n vanish", "dim_d");
  const double h = grid.min_spacing();
  const double collar = std::max(p.measure.resolution_h(), 2.0 * h);
  return equivalence_residuals(p, interior_nodes(grid, p.measure, collar), h, collar, n);
}

RefinementStudy fit_refinement(std::vector<double> h, std::vector<double> residual) {
  RefinementStudy s;
  s.h = std::move(h);
  s.residual = std::move(residual);
  const std::size_t m = s.h.size();
  const std::size_t first = m >= 3 ? m - 3 : 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = first; i < m; ++i) {
    const double lx = std::log(s.h[i]);
    const double ly = std::log(std::max(s.residual[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  const double den = cnt * sxx - sx * sx;
  s.observed_order = den > 0 ? (cnt * sxy - sx * sy) / den : 0.0;
  s.vanishes = s.observed_order >= 1.5;
  return s;
}

RefinementStudy magic_refinement(const PotentialParams& p, const Eigen::MatrixXd& nodes, double h0, int levels,
                                 double collar) {
  std::vector<double> hs, rs;
  double h = h0;
  for (int l = 0; l < levels; ++l, h *= 0.5) {
    hs.push_back(h);
    // Fixed collar + h0 so every level sees the same node set.
    rs.push_back(laplacian_residual(p, nodes, h, collar + h0 - h).max_residual);
  }
  return fit_refinement(std::move(hs), std::move(rs));
}

}  // namespace gdl
