#pragma once

#include <Eigen/Core>
#include <vector>

#include "gdl/geometry.hpp"
#include "gdl/grid.hpp"

namespace gdl {

struct PotentialParams {
  double alpha = 1.0;
  /// Alternate exponent for comparison distances D_beta.
  double beta = 1.0;
  DiscreteMeasure measure;
  /// Evaluation collar; 0 means the cloud's resolution_h.
  double collar = 0.0;

  double collar_width() const { return collar > 0 ? collar : measure.resolution_h(); }
  /// Same measure, exponent beta in the alpha slot.
  PotentialParams with_alpha(double a) const;
  void validate() const;
};

/// a_beta = int_{R^d} (1 + |u|^2)^{-(d+beta)/2} du = pi^{d/2} Gamma(beta/2) / Gamma((d+beta)/2).
double flat_constant(double d, double beta);

struct QuadratureValue {
  double value = 0;
  /// |full cloud - half cloud| (every other point, doubled weight).
  double error_estimate = 0;
};

/// sum_i w_i |X - y_i|^{-d-alpha}. Throws too-close-to-boundary inside the collar.
double riesz_potential(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x);
QuadratureValue riesz_potential_estimate(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd riesz_gradient(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x);

/// D_alpha = R^{-1/alpha}.
double smooth_distance(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd smooth_distance_gradient(const PotentialParams& p, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Both at once (one pass over the cloud).
struct DistanceAndGradient {
  double value = 0;
  Eigen::VectorXd gradient;
};
DistanceAndGradient smooth_distance_with_gradient(const PotentialParams& p,
                                                  const Eigen::Ref<const Eigen::VectorXd>& x);

/// D_alpha on every node; NaN inside the collar.
ScalarGrid sample_smooth_distance(const PotentialParams& p, const ScalarGrid& layout);

/// Max over nodes of |Delta_h R| dist^{d+alpha+2}, the Laplacian taken with the axis stencil of
/// step h. Nodes with dist(., E) <= collar + h are skipped.
struct ResidualSample {
  double max_residual = 0;
  std::size_t nodes = 0;
};
ResidualSample laplacian_residual(const PotentialParams& p, const Eigen::MatrixXd& nodes, double h, double collar);

/// Magic-alpha residual on the interior nodes of a uniform grid (stencil = grid spacing, collar =
/// max(resolution_h, 2 spacing)). Throws wrong-alpha unless alpha = n - d - 2.
double magic_alpha_residual(const PotentialParams& p, const ScalarGrid& grid, int n);

struct EquivalenceReport {
  /// max |Delta_h (D^{d+2-n})| dist^{2-(d+2-n)}
  double lhs_residual = 0;
  /// max |div_h (D^{d+1-n} grad_h D)| dist^{2-(d+2-n)}, face weights at midpoints
  double rhs_residual = 0;
  std::size_t nodes = 0;
};
EquivalenceReport equivalence_residuals(const PotentialParams& p, const Eigen::MatrixXd& nodes, double h,
                                        double collar, int n);
/// Throws exponent-zero when d = n - 2.
EquivalenceReport equivalence_check_8a1(const PotentialParams& p, const ScalarGrid& grid, int n);

/// Residual of a quantity at fixed nodes under stencil refinement h0, h0/2, ...
struct RefinementStudy {
  std::vector<double> h;
  std::vector<double> residual;
  /// Least-squares slope of log residual vs log h over the last three levels.
  double observed_order = 0;
  /// observed_order >= 1.5
  bool vanishes = false;
};
RefinementStudy fit_refinement(std::vector<double> h, std::vector<double> residual);
RefinementStudy magic_refinement(const PotentialParams& p, const Eigen::MatrixXd& nodes, double h0, int levels,
                                 double collar);

/// Interior nodes of the grid that are at least `margin` away from E, as an n x m matrix.
Eigen::MatrixXd interior_nodes(const ScalarGrid& grid, const DiscreteMeasure& mu, double margin);

}  // namespace gdl
