#pragma once

#include <Eigen/Core>
#include <vector>

namespace gdl {

/// Signed masses at points of a ball B(center, radius).
struct SignedCloud {
  Eigen::MatrixXd points;  // n x m, all inside the closed ball
  Eigen::VectorXd mass;    // m, any sign
  Eigen::VectorXd center;
  double radius = 1.0;
};

struct DualSolution {
  /// sup { sum_i mass_i phi_i : phi 1-Lipschitz on R^n, phi = 0 off the ball } (unnormalized).
  double value = 0;
  /// Optimal phi at the points (1-Lipschitz, |phi_i| <= radius - |x_i - center|).
  Eigen::VectorXd phi;
  int pivots = 0;
};

/// Exact solution of the finite Lipschitz-dual problem.
///
/// The constraint "phi = 0 off the ball" is encoded by a ground node at cost radius - |x_i - center|
/// from every point, which is exact for finitely many points (McShane extension). The problem is
/// solved as its dual, an uncapacitated min-cost transport from positive to negative points with the
/// ground as an extra source and sink, by network simplex. Large instances start from nearest
/// neighbour arcs and add violated pairs until the potentials are feasible on every pair.
DualSolution lipschitz_dual(const SignedCloud& cloud);

}  // namespace gdl
