#include "gdl/flatness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gdl/error.hpp"
#include "gdl/potential.hpp"
#include "gdl/transport.hpp"

namespace gdl {

namespace {

constexpr int kMinPoints = 32;

double chord_radius(const AffinePlane& plane, const Ball& ball) {
  const double off = plane.distance(ball.center);
  return off < ball.radius ? std::sqrt(ball.radius * ball.radius - off * off) : 0.0;
}

// Cloud-in-cell assignment: each point spreads its mass over the 2^n corners of its lattice cell
// with multilinear weights. The lattice has step s along the columns of `frame` and a node at
// `center`, so it moves with the data under rigid motions. Constant densities are reproduced
// exactly, which keeps matched measures matched after coarse-graining.
using LatticeMass = std::map<std::vector<long>, double>;

void cic_assign(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w, double sign, const Point& center,
                const Eigen::MatrixXd& frame, double s, LatticeMass& out) {
  const Eigen::Index n = pts.rows();
  std::vector<long> base(static_cast<std::size_t>(n)), key(static_cast<std::size_t>(n));
  std::vector<double> frac(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Eigen::VectorXd local = frame.transpose() * (pts.col(i) - center) / s;
    for (Eigen::Index a = 0; a < n; ++a) {
      const double fl = std::floor(local[a]);
      base[static_cast<std::size_t>(a)] = static_cast<long>(fl);
      frac[static_cast<std::size_t>(a)] = local[a] - fl;
    }
    for (long corner = 0; corner < (1L << n); ++corner) {
      double wt = 1.0;
      for (Eigen::Index a = 0; a < n; ++a) {
        const bool up = corner & (1L << a);
        wt *= up ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
        key[static_cast<std::size_t>(a)] = base[static_cast<std::size_t>(a)] + (up ? 1 : 0);
      }
      if (wt > 0) out[key] += sign * wt * w[i];
    }
  }
}

struct Prepared {
  Ball ball;
  int d = 1;
  WeightedPoints mu;  // fine mode
  LatticeMass mu_lattice;  // coarse mode
  double mu_mass = 0;
  bool coarse = false;
  Eigen::MatrixXd frame;  // lattice frame (coarse mode)
  double lattice_step = 0;
  double sigma_spacing = 0;
  int max_nodes = 0;
};

Prepared prepare(const DiscreteMeasure& mu, const Ball& ball, int d, const LpOptions& opts) {
  const auto idx = mu.indices_in_ball(ball);
  if (static_cast<int>(idx.size()) < kMinPoints)
    throw Error(Errc::under_resolved, "fewer than 32 points of mu in the ball", "ball");
  Prepared p;
  p.ball = ball;
  p.d = d;
  p.max_nodes = opts.max_nodes;
  const Eigen::Index n = mu.ambient_dim();
  WeightedPoints raw;
  raw.points.resize(n, static_cast<Eigen::Index>(idx.size()));
  raw.weights.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    raw.points.col(static_cast<Eigen::Index>(j)) = mu.point(idx[j]);
    raw.weights[static_cast<Eigen::Index>(j)] = mu.weight(idx[j]);
  }
  p.mu_mass = raw.weights.sum();
  p.sigma_spacing = opts.sigma_spacing > 0 ? opts.sigma_spacing : mu.resolution_h();
  const double expected_sigma = unit_ball_volume(d) * std::pow(ball.radius / p.sigma_spacing, d);
  if (opts.atomic && static_cast<double>(idx.size()) + expected_sigma <= opts.max_nodes) {
    p.mu = std::move(raw);
    return p;
  }
  p.coarse = true;
  // Principal axes of the in-ball cloud: the partition then moves with the data under rigid motions.
  const Eigen::VectorXd c = raw.points * raw.weights / p.mu_mass;
  const Eigen::MatrixXd centered = raw.points.colwise() - c;
  const Eigen::MatrixXd cov = centered * raw.weights.asDiagonal() * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  p.frame = eig.eigenvectors();
  const int budget = std::max(8, (2 * opts.max_nodes) / 3);
  double s = std::max(2.0 * mu.resolution_h(), ball.radius * std::pow(3.0 * unit_ball_volume(d) / budget, 1.0 / d));
  for (;;) {
    p.mu_lattice.clear();
    cic_assign(raw.points, raw.weights, 1.0, ball.center, p.frame, s, p.mu_lattice);
    if (static_cast<int>(p.mu_lattice.size()) <= budget) break;
    s *= 1.15;
  }
  p.lattice_step = s;
  p.sigma_spacing = std::min(p.sigma_spacing, s / 4.0);
  return p;
}

double solve(const Prepared& p, const FlatMeasure& sigma) {
  const double rho = chord_radius(sigma.plane, p.ball);
  WeightedPoints sig;
  if (rho > 0) {
    const double vol = unit_ball_volume(p.d);
    double s = std::min(p.sigma_spacing, rho * std::pow(vol / kMinPoints, 1.0 / p.d));
    s = std::max(s, rho * std::pow(vol / 20000.0, 1.0 / p.d));
    sig = discretize_flat(sigma, p.ball, s);
  }
  SignedCloud cloud;
  cloud.center = p.ball.center;
  cloud.radius = p.ball.radius;
  if (p.coarse) {
    LatticeMass net = p.mu_lattice;
    if (sig.points.cols() > 0) cic_assign(sig.points, sig.weights, -1.0, p.ball.center, p.frame, p.lattice_step, net);
    const Eigen::Index n = p.ball.center.size();
    cloud.points.resize(n, static_cast<Eigen::Index>(net.size()));
    cloud.mass.resize(static_cast<Eigen::Index>(net.size()));
    Eigen::Index j = 0;
    Eigen::VectorXd key(n);
    for (const auto& [k, mass] : net) {
      for (Eigen::Index a = 0; a < n; ++a) key[a] = static_cast<double>(k[static_cast<std::size_t>(a)]) * p.lattice_step;
      cloud.points.col(j) = p.ball.center + p.frame * key;
      cloud.mass[j] = mass;
      ++j;
    }
    return lipschitz_dual(cloud).value / std::pow(p.ball.radius, p.d + 1);
  }
  const Eigen::Index a = p.mu.points.cols(), b = sig.points.cols();
  cloud.points.resize(p.mu.points.rows(), a + b);
  cloud.mass.resize(a + b);
  cloud.points.leftCols(a) = p.mu.points;
  cloud.mass.head(a) = p.mu.weights;
  if (b > 0) {
    cloud.points.rightCols(b) = sig.points;
    cloud.mass.tail(b) = -sig.weights;
  }
  return lipschitz_dual(cloud).value / std::pow(p.ball.radius, p.d + 1);
}

double density_guess(const Prepared& p, const AffinePlane& plane) {
  const double rho = chord_radius(plane, p.ball);
  return p.mu_mass / (unit_ball_volume(p.d) * std::pow(std::max(rho, 0.5 * p.ball.radius), p.d));
}

std::pair<double, double> golden_density(const Prepared& p, const AffinePlane& plane, double log_c_tol, int& solves) {
  const double rho = chord_radius(plane, p.ball);
  auto f = [&](double t) {
    ++solves;
    return solve(p, FlatMeasure{plane, std::exp(t)});
  };
  if (rho <= 0) return {f(0.0), 1.0};
  const double c0 = density_guess(p, plane);
  double lo = std::log(c0) - std::log(4.0), hi = std::log(c0) + std::log(4.0);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double best_t = 0, best_v = std::numeric_limits<double>::infinity();
  int direction = 0;
  for (int expand = 0; expand < 4; ++expand) {
    const double lo0 = lo, hi0 = hi;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > log_c_tol) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = f(x2);
      }
    }
    const double t = f1 <= f2 ? x1 : x2;
    const double v = std::min(f1, f2);
    if (v < best_v) {
      best_v = v;
      best_t = t;
    }
    // Minimizer pinned to an end of the bracket: slide the bracket outwards.
    if (t - lo0 < 4 * log_c_tol && direction <= 0) {
      direction = -1;
      hi = lo0;
      lo = lo0 - std::log(16.0);
    } else if (hi0 - t < 4 * log_c_tol && direction >= 0) {
      direction = 1;
      lo = hi0;
      hi = hi0 + std::log(16.0);
    } else {
      break;
    }
  }
  return {best_v, std::exp(best_t)};
}

}  // namespace

WeightedPoints discretize_flat(const FlatMeasure& sigma, const Ball& ball, double spacing) {
  WeightedPoints out;
  out.points = plane_lattice(sigma.plane, ball, spacing);
  out.weights = Eigen::VectorXd::Constant(out.points.cols(), sigma.density * std::pow(spacing, sigma.plane.dim()));
  return out;
}

DualDistance lipschitz_dual_detail(const DiscreteMeasure& mu, const FlatMeasure& sigma, const Ball& ball,
                                   const LpOptions& opts) {
  if (!(sigma.density > 0)) throw Error(Errc::invalid_params, "flat density must be positive", "density");
  const Prepared p = prepare(mu, ball, sigma.plane.dim(), opts);
  DualDistance out;
  out.value = solve(p, sigma);
  out.mu_nodes = static_cast<int>(p.coarse ? p.mu_lattice.size() : static_cast<std::size_t>(p.mu.points.cols()));
  out.coarse = p.coarse;
  const double rho = chord_radius(sigma.plane, ball);
  out.sigma_nodes = rho > 0 ? static_cast<int>(plane_lattice(sigma.plane, ball, p.sigma_spacing).cols()) : 0;
  return out;
}

double lipschitz_dual_distance(const DiscreteMeasure& mu, const FlatMeasure& sigma, const Ball& ball,
                               const LpOptions& opts) {
  return lipschitz_dual_detail(mu, sigma, ball, opts).value;
}

std::pair<double, double> best_density(const DiscreteMeasure& mu, const AffinePlane& plane, const Ball& ball,
                                       const LpOptions& opts, double log_c_tol) {
  const Prepared p = prepare(mu, ball, plane.dim(), opts);
  int solves = 0;
  return golden_density(p, plane, log_c_tol, solves);
}

AlphaNumber alpha_number(const DiscreteMeasure& mu, const Ball& ball, int d_int, const AlphaOptions& opts) {
  const int n = mu.ambient_dim();
  if (d_int < 1 || d_int > n - 1) throw Error(Errc::invalid_params, "d_int must lie in [1, n-1]", "d_int");
  AlphaNumber out;
  out.ball = ball;
  LpOptions coarse_opts = opts.fine;
  coarse_opts.max_nodes = opts.coarse_nodes;
  const Prepared coarse = prepare(mu, ball, d_int, coarse_opts);
  const Prepared fine = prepare(mu, ball, d_int, opts.fine);

  const auto idx = mu.indices_in_ball(ball);
  Eigen::MatrixXd pts(n, static_cast<Eigen::Index>(idx.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    pts.col(static_cast<Eigen::Index>(j)) = mu.point(idx[j]);
    w[static_cast<Eigen::Index>(j)] = mu.weight(idx[j]);
  }
  const AffinePlane seed = pca_plane(pts, w, d_int);

  int solves = 0;
  // The density enters the coarse search as one more simplex coordinate, log c relative to the
  // chord-based guess; golden section on c is kept for the final evaluation.
  auto coarse_objective = [&](const AffinePlane& plane, const Eigen::VectorXd& t) {
    ++solves;
    return solve(coarse, FlatMeasure{plane, density_guess(coarse, plane) * std::exp(t[0])});
  };
  PlaneSearchOptions search = opts.search;
  search.extra = 1;
  const PlaneSearchResult found = search_plane(coarse_objective, seed, ball.radius, search);
  out.coarse_value = found.value;
  AffinePlane plane = found.plane;
  if (opts.polish_iterations > 0) {
    const PlaneChart chart(plane, ball.radius);
    NelderMeadOptions nm = opts.search.nm;
    nm.max_iterations = opts.polish_iterations;
    auto fine_objective = [&](const Eigen::VectorXd& x) {
      return golden_density(fine, chart.plane(x), opts.log_c_tol, solves).first;
    };
    const NelderMeadResult r = nelder_mead(fine_objective, Eigen::VectorXd::Zero(chart.parameters()),
                                           Eigen::VectorXd::Constant(chart.parameters(), 0.01), nm);
    plane = chart.plane(r.x);
  }
  const auto [value, c] = golden_density(fine, plane, opts.log_c_tol, solves);
  out.value = value;
  out.best_fit = FlatMeasure{plane, c};
  out.lp_solves = solves;
  return out;
}

FlatFitReport flat_fit_consequences(const DiscreteMeasure& mu, const Ball& ball_Nr, const FlatMeasure& sigma,
                                    double eta, double N, const LpOptions& opts) {
  if (!(eta > 0) || !(N >= 1)) throw Error(Errc::invalid_params, "need eta > 0 and N >= 1", "eta");
  FlatFitReport rep;
  rep.eta = eta;
  rep.N = N;
  rep.dual_distance = lipschitz_dual_distance(mu, sigma, ball_Nr, opts);
  if (rep.dual_distance > 2.0 * eta)
    throw Error(Errc::hypothesis_violated, "D_{x,Nr}(mu, sigma) exceeds 2 eta", "sigma");
  const double d = sigma.plane.dim();
  const double r = ball_Nr.radius / N;
  const double C = mu.ar_constant().value_or(estimate_ar_constant(mu, mu.seed()).constant);
  rep.c1 = 2.0 * std::pow(10.0 * C / unit_ball_volume(d), 1.0 / (d + 1.0));
  const double base = N * std::pow(eta, 1.0 / (d + 1.0));
  rep.eta1 = rep.c1 * base;

  const Ball third = ball_Nr.scaled(1.0 / 3.0);
  for (auto i : mu.indices_in_ball(third))
    rep.support_to_plane = std::max(rep.support_to_plane, sigma.plane.distance(mu.point(i)) / r);
  const Eigen::MatrixXd lat = plane_lattice(sigma.plane, third, 0.5 * mu.resolution_h());
  for (Eigen::Index j = 0; j < lat.cols(); ++j)
    rep.plane_to_support = std::max(rep.plane_to_support, mu.distance(lat.col(j)) / r);
  rep.c1_measured = std::max(rep.support_to_plane, rep.plane_to_support) / base;
  rep.support_dist_ok = std::max(rep.support_to_plane, rep.plane_to_support) <= rep.eta1;

  // Radial bump tests on the same discretization as the LP.
  const double R = ball_Nr.radius;
  auto bump = [&](const Eigen::VectorXd& z, double inner, double outer) {
    const double t = (z - ball_Nr.center).norm();
    return t <= inner ? 1.0 : (t >= outer ? 0.0 : (outer - t) / (outer - inner));
  };
  const double spacing = opts.sigma_spacing > 0 ? opts.sigma_spacing : mu.resolution_h();
  const WeightedPoints sig = discretize_flat(sigma, ball_Nr, spacing);
  double i1 = 0, i2 = 0;
  for (auto i : mu.indices_in_ball(ball_Nr)) {
    i1 += mu.weight(i) * bump(mu.point(i), R / 8, R / 4);
    i2 += mu.weight(i) * bump(mu.point(i), R / 2, R);
  }
  for (Eigen::Index j = 0; j < sig.points.cols(); ++j) {
    i1 -= sig.weights[j] * bump(sig.points.col(j), R / 8, R / 4);
    i2 -= sig.weights[j] * bump(sig.points.col(j), R / 2, R);
  }
  rep.psi1_integral = std::abs(i1);
  rep.psi_integral = std::abs(i2);
  rep.psi1_bound = 16.0 * eta * std::pow(N * r, d);
  rep.psi_bound = 4.0 * eta * std::pow(N * r, d);
  rep.plane_meets_quarter_ball = sigma.plane.distance(ball_Nr.center) < R / 4;
  rep.density_bounds_ok =
      rep.plane_meets_quarter_ball && rep.psi1_integral <= rep.psi1_bound && rep.psi_integral <= rep.psi_bound;
  return rep;
}

DbetaReport dbeta_vs_plane_bound(const DiscreteMeasure& mu, const Ball& ball_Nr, const FlatMeasure& sigma,
                                 double beta, double eta, double N, const Eigen::MatrixXd& sample_points) {
  DbetaReport rep;
  const double d = sigma.plane.dim();
  const double r = ball_Nr.radius / N;
  const double k = std::pow(sigma.density * flat_constant(d, beta), -1.0 / beta);
  PotentialParams p;
  p.alpha = beta;
  p.beta = beta;
  p.measure = mu;
  const double near = N * std::pow(eta, 1.0 / (d + 2.0 + beta)) * r;
  for (Eigen::Index j = 0; j < sample_points.cols(); ++j) {
    const Eigen::VectorXd x = sample_points.col(j);
    const double dist = sigma.plane.distance(x);
    const double lhs = std::abs(smooth_distance(p, x) - k * dist);
    const double br = near + std::pow(dist, 1.0 + beta) * std::pow(N, -beta) * std::pow(r, -beta);
    rep.lhs.push_back(lhs);
    rep.bracket.push_back(br);
    rep.c2 = std::max(rep.c2, lhs / br);
    rep.max_violation = std::max(rep.max_violation, lhs - br);
  }
  return rep;
}

double gradient_vs_plane_constant(const DiscreteMeasure& mu, const Ball& ball_Nr, const FlatMeasure& sigma,
                                  double beta, double N, const Eigen::MatrixXd& sample_points) {
  const double d = sigma.plane.dim();
  const double r = ball_Nr.radius / N;
  const double k = std::pow(sigma.density * flat_constant(d, beta), -1.0 / beta);
  PotentialParams p;
  p.alpha = beta;
  p.measure = mu;
  double worst = 0;
  for (Eigen::Index j = 0; j < sample_points.cols(); ++j) {
    const Eigen::VectorXd x = sample_points.col(j);
    const Eigen::VectorXd foot = sigma.plane.project(x);
    const double dist = (x - foot).norm();
    const Eigen::VectorXd flat_grad = k * (x - foot) / dist;
    const double lhs = (smooth_distance_gradient(p, x) - flat_grad).norm();
    const double rhs = std::pow(dist, 2.0 + beta) * std::pow(N, -beta - 1.0) * std::pow(r, -beta - 2.0);
    worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

}  // namespace gdl
