#pragma once

// Reference computations used only by the tests. Nothing here calls into the library.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

/// Adaptive Simpson on [a, b] to absolute tolerance tol.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int left) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double l = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double r = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (left <= 0 || std::abs(l + r - whole) <= 15.0 * eps) return l + r + (l + r - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, l, 0.5 * eps, left - 1) + rec(mid, hi, fmid, frm, fhi, r, 0.5 * eps, left - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// a_alpha = int_R (1 + u^2)^{-(1 + alpha)/2} du for a line. With u = sinh t the integrand becomes
/// cosh(t)^{-alpha}, which decays exponentially.
inline double line_flat_constant(double alpha) {
  auto f = [alpha](double t) { return std::pow(std::cosh(t), -alpha); };
  double total = 0;
  for (int k = -10; k < 10; ++k) total += simpson(f, 10.0 * k, 10.0 * (k + 1), 1e-14);
  return total;
}

/// Green function of the upper half-plane with pole (0, H), for -Delta G = delta.
inline double half_plane_green(double H, double x, double y) {
  return std::log((x * x + (y + H) * (y + H)) / (x * x + (y - H) * (y - H))) / (4.0 * std::numbers::pi);
}

/// Box-counting dimension: slope of log N(s) against log(1/s) over the given box sizes.
inline double box_counting_dimension(const Eigen::MatrixXd& pts, const std::vector<double>& sizes) {
  std::vector<double> lx, ly;
  for (double s : sizes) {
    std::set<std::vector<long long>> boxes;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      std::vector<long long> key(static_cast<std::size_t>(pts.rows()));
      for (Eigen::Index a = 0; a < pts.rows(); ++a) key[a] = static_cast<long long>(std::floor(pts(a, j) / s));
      boxes.insert(key);
    }
    lx.push_back(std::log(1.0 / s));
    ly.push_back(std::log(static_cast<double>(boxes.size())));
  }
  const double m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// Dense two-phase simplex for min c^T x, A x = b, x >= 0 (b >= 0 after row sign flips).
/// Bland's rule throughout. Returns NaN when infeasible or unbounded.
inline double simplex_min(Eigen::MatrixXd A, Eigen::VectorXd b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  for (int i = 0; i < m; ++i)
    if (b[i] < 0) {
      A.row(i) *= -1.0;
      b[i] = -b[i];
    }
  // Tableau columns: n structural, m artificial, rhs.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, n + m + 1);
  T.leftCols(n) = A;
  T.block(0, n, m, m).setIdentity();
  T.col(n + m) = b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  const double tol = 1e-11;

  auto run = [&](const Eigen::VectorXd& cost, int allowed) {
    for (int it = 0; it < 200000; ++it) {
      // Reduced costs.
      Eigen::RowVectorXd y(m);
      for (int i = 0; i < m; ++i) y[i] = cost[basis[i]];
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        const double rc = cost[j] - y * T.col(j);
        if (rc < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i)
        if (T(i, enter) > tol) {
          const double ratio = T(i, n + m) / T(i, enter);
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      if (leave < 0) return false;
      T.row(leave) /= T(leave, enter);
      for (int i = 0; i < m; ++i)
        if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
      basis[leave] = enter;
    }
    return false;
  };

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  if (!run(phase1, n + m)) return std::numeric_limits<double>::quiet_NaN();
  double infeas = 0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= n) infeas += T(i, n + m);
  if (infeas > 1e-9) return std::numeric_limits<double>::quiet_NaN();
  // Drive remaining (zero-level) artificials out of the basis where possible.
  for (int i = 0; i < m; ++i)
    if (basis[i] >= n)
      for (int j = 0; j < n; ++j)
        if (std::abs(T(i, j)) > 1e-9) {
          T.row(i) /= T(i, j);
          for (int k = 0; k < m; ++k)
            if (k != i && T(k, j) != 0.0) T.row(k) -= T(k, j) * T.row(i);
          basis[i] = j;
          break;
        }
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  if (!run(phase2, n)) return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  for (int i = 0; i < m; ++i) v += phase2[basis[i]] * T(i, n + m);
  return v;
}

/// sup { sum m_i phi_i : phi 1-Lipschitz, phi = 0 off B(center, radius) } through its transport dual:
/// flows f_ij >= 0 between points at cost |x_i - x_j| plus flows to and from a ground node at cost
/// radius - |x_i - center|, with net outflow m_i at each point.
inline double lipschitz_dual_dense(const Eigen::MatrixXd& pts, const Eigen::VectorXd& mass,
                                   const Eigen::VectorXd& center, double radius) {
  const int N = static_cast<int>(pts.cols());
  const int cols = N * (N - 1) + 2 * N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, cols);
  Eigen::VectorXd c(cols);
  int col = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      A(i, col) = 1.0;
      A(j, col) = -1.0;
      c[col++] = (pts.col(i) - pts.col(j)).norm();
    }
  for (int i = 0; i < N; ++i) {
    const double g = radius - (pts.col(i) - center).norm();
    A(i, col) = 1.0;  // point -> ground
    c[col++] = g;
    A(i, col) = -1.0;  // ground -> point
    c[col++] = g;
  }
  return simplex_min(A, mass, c);
}

/// g(y) = int_0^y ds / a(s) for a(s) = 1 on [4^k, 2 4^k) and 2 elsewhere, summed band by band.
inline double band_solution(double y) {
  if (y <= 0) return 0;
  // Bands below 4^-40 contribute less than 1e-24.
  double g = 0.5 * y;  // a = 2 everywhere, then add the a = 1 surplus 1/2 per unit length
  for (int k = -40; k < 40; ++k) {
    const double lo = std::pow(4.0, k), hi = 2.0 * lo;
    if (lo >= y) break;
    g += 0.5 * (std::min(hi, y) - lo);
  }
  return g;
}

/// inf_c sup_{[0, M]} |y - c g(y)|. Both y and g are piecewise linear with breakpoints at the band
/// edges, so the sup is a max over breakpoints; the max is convex in c and minimized by ternary search.
inline double band_chebyshev_defect(double M) {
  std::vector<double> ys{M};
  for (int k = -40; k < 40; ++k)
    for (double e : {std::pow(4.0, k), 2.0 * std::pow(4.0, k)})
      if (e < M) ys.push_back(e);
  std::vector<double> gs;
  for (double y : ys) gs.push_back(band_solution(y));
  auto sup = [&](double c) {
    double s = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) s = std::max(s, std::abs(ys[i] - c * gs[i]));
    return s;
  };
  double lo = 1.0, hi = 2.0;
  for (int it = 0; it < 300; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (sup(m1) < sup(m2))
      hi = m2;
    else
      lo = m1;
  }
  return sup(0.5 * (lo + hi));
}

/// Riesz sum sum_i w_i |x - y_i|^{-s} in long double.
inline double riesz_sum(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w, double s, const Eigen::VectorXd& x) {
  long double acc = 0;
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    acc += static_cast<long double>(w[j]) * std::pow(static_cast<long double>((pts.col(j) - x).norm()),
                                                   static_cast<long double>(-s));
  return static_cast<double>(acc);
}

}  // namespace oracle
