#include "gdl/plane_search.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "gdl/error.hpp"

namespace gdl {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& step, const NelderMeadOptions& opts) {
  const Eigen::Index m = x0.size();
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(m) + 1, x0);
  std::vector<double> fs(xs.size());
  NelderMeadResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    return f(x);
  };
  for (Eigen::Index i = 0; i < m; ++i) xs[static_cast<std::size_t>(i) + 1][i] += step[i];
  for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = eval(xs[i]);
  // Adaptive coefficients (Gao and Han) behave better in higher dimension.
  const double dm = static_cast<double>(std::max<Eigen::Index>(m, 1));
  const double alpha = 1.0, beta = 1.0 + 2.0 / dm, gamma = 0.75 - 0.5 / dm, delta = 1.0 - 1.0 / dm;
  std::vector<std::size_t> order(xs.size());
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    double diam = 0;
    for (const auto& x : xs) diam = std::max(diam, (x - xs[best]).cwiseAbs().maxCoeff());
    if (fs[worst] - fs[best] <= opts.f_tol + opts.f_rel * std::abs(fs[best]) && diam <= opts.x_tol) break;
    if (diam <= 1e-3 * opts.x_tol) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (i != worst) centroid += xs[i];
    centroid /= dm;
    const Eigen::VectorXd xr = centroid + alpha * (centroid - xs[worst]);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid)) : Eigen::VectorXd(centroid - gamma * (centroid - xs[worst]));
    const double fc = eval(xc);
    if (fc < std::min(fr, fs[worst])) {
      xs[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i == best) continue;
      xs[i] = xs[best] + delta * (xs[i] - xs[best]);
      fs[i] = eval(xs[i]);
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  res.x = xs[best];
  res.value = fs[best];
  return res;
}

AffinePlane pca_plane(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights, int d_int) {
  const Eigen::Index n = points.rows();
  if (d_int < 1 || d_int >= n) throw Error(Errc::invalid_params, "plane dimension must lie in [1, n-1]", "d_int");
  if (points.cols() == 0) throw Error(Errc::under_resolved, "no points to fit a plane to", "ball");
  const double W = weights.sum();
  const Eigen::VectorXd c = points * weights / W;
  const Eigen::MatrixXd centered = points.colwise() - c;
  const Eigen::MatrixXd cov = centered * weights.asDiagonal() * centered.transpose() / W;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues ascend; take the top d_int eigenvectors.
  Eigen::MatrixXd frame = eig.eigenvectors().rightCols(d_int).rowwise().reverse();
  return AffinePlane::from_span(c, frame);
}

PlaneChart::PlaneChart(const AffinePlane& reference, double scale)
    : base_(reference.base()),
      tangent_(reference.frame()),
      normal_(reference.normal_basis()),
      dim_(reference.dim()),
      codim_(reference.ambient() - reference.dim()),
      scale_(scale) {}

AffinePlane PlaneChart::plane(const Eigen::VectorXd& params) const {
  Eigen::MatrixXd B = Eigen::Map<const Eigen::MatrixXd>(params.data(), codim_, dim_);
  const Eigen::VectorXd o = params.tail(codim_);
  const Eigen::MatrixXd dirs = tangent_ + normal_ * B;
  return AffinePlane::from_span(base_ + scale_ * (normal_ * o), dirs);
}

PlaneSearchResult search_plane(const std::function<double(const AffinePlane&)>& objective,
                               const AffinePlane& seed_plane, double scale, const PlaneSearchOptions& opts) {
  PlaneSearchOptions o = opts;
  o.extra = 0;
  return search_plane([&](const AffinePlane& p, const Eigen::VectorXd&) { return objective(p); }, seed_plane, scale,
                      o);
}

PlaneSearchResult search_plane(const std::function<double(const AffinePlane&, const Eigen::VectorXd&)>& objective,
                               const AffinePlane& seed_plane, double scale, const PlaneSearchOptions& opts) {
  const PlaneChart chart(seed_plane, scale);
  const int m = chart.parameters();
  const int e = std::max(0, opts.extra);
  const int codim = seed_plane.ambient() - seed_plane.dim();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> angle(-0.45 * std::numbers::pi, 0.45 * std::numbers::pi);
  std::uniform_real_distribution<double> offset(-opts.offset_spread, opts.offset_spread);

  PlaneSearchResult best;
  best.value = std::numeric_limits<double>::infinity();
  auto f = [&](const Eigen::VectorXd& x) {
    // Tilts beyond ~85 degrees are reached from a different restart; keep the chart well conditioned.
    const double tilt = x.head(m - codim).cwiseAbs().maxCoeff();
    const double penalty = tilt > 12.0 ? (tilt - 12.0) * 1e3 : 0.0;
    return objective(chart.plane(x.head(m)), x.tail(e)) + penalty;
  };
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(m + e);
    if (r > 0) {
      for (int i = 0; i < m - codim; ++i) x0[i] = std::tan(angle(rng));
      for (int i = m - codim; i < m; ++i) x0[i] = offset(rng);
    }
    Eigen::VectorXd step = Eigen::VectorXd::Constant(m + e, r == 0 ? 0.05 : 0.2);
    step.tail(e).setConstant(opts.extra_step);
    const NelderMeadResult nm = nelder_mead(f, x0, step, opts.nm);
    best.evaluations += nm.evaluations;
    if (nm.value < best.value) {
      best.value = nm.value;
      best.plane = chart.plane(nm.x.head(m));
      best.extra = nm.x.tail(e);
    }
  }
  return best;
}

double plane_angle(const AffinePlane& a, const AffinePlane& b) {
  const Eigen::MatrixXd m = a.frame().transpose() * b.frame();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double smin = std::clamp(svd.singularValues().minCoeff(), 0.0, 1.0);
  return std::acos(smin);
}

}  // namespace gdl
