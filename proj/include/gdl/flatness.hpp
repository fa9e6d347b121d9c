#pragma once

#include <Eigen/Core>
#include <vector>

#include "gdl/geometry.hpp"
#include "gdl/plane_search.hpp"

namespace gdl {

/// sigma = c H^d restricted to a plane.
struct FlatMeasure {
  AffinePlane plane;
  double density = 1.0;
};

/// Weighted lattice sample of sigma inside a ball (cell mass c * spacing^d).
struct WeightedPoints {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
};
WeightedPoints discretize_flat(const FlatMeasure& sigma, const Ball& ball, double spacing);

struct LpOptions {
  /// Both measures are spread onto a common lattice (cloud-in-cell) of step at least 2 h, coarsened
  /// until it has at most about max_nodes nodes.
  int max_nodes = 1024;
  /// Transport the atoms themselves instead (when they fit in max_nodes). Offsets between the cloud and
  /// the sampled plane then leave a floor of about h / r in the value.
  bool atomic = false;
  /// sigma lattice spacing; 0 picks the mu resolution.
  double sigma_spacing = 0.0;
};

struct DualDistance {
  /// r^{-d-1} sup |int phi d(mu - sigma)| over 1-Lipschitz phi vanishing off the ball.
  double value = 0;
  int mu_nodes = 0;
  int sigma_nodes = 0;
  bool coarse = false;
};

/// Throws under-resolved when fewer than 32 points of mu lie in the ball.
DualDistance lipschitz_dual_detail(const DiscreteMeasure& mu, const FlatMeasure& sigma, const Ball& ball,
                                   const LpOptions& opts = {});
double lipschitz_dual_distance(const DiscreteMeasure& mu, const FlatMeasure& sigma, const Ball& ball,
                               const LpOptions& opts = {});

struct AlphaOptions {
  PlaneSearchOptions search;
  /// Node budget of the coarse lattice problem used while searching planes.
  int coarse_nodes = 256;
  /// Final evaluation at the best plane.
  LpOptions fine;
  /// Golden-section tolerance on log c.
  double log_c_tol = 1e-4;
  /// Nelder-Mead iterations of the fine-resolution polish (0 disables it).
  int polish_iterations = 0;
};

struct AlphaNumber {
  Ball ball;
  double value = 0;
  FlatMeasure best_fit;
  /// Best value of the coarse search (diagnostic).
  double coarse_value = 0;
  int lp_solves = 0;
};

/// inf over flat measures of the Lipschitz-dual distance in the ball.
AlphaNumber alpha_number(const DiscreteMeasure& mu, const Ball& ball, int d_int, const AlphaOptions& opts = {});

/// Minimizes D(mu, c H^d|P) over c for a fixed plane; returns (value, c).
std::pair<double, double> best_density(const DiscreteMeasure& mu, const AffinePlane& plane, const Ball& ball,
                                       const LpOptions& opts = {}, double log_c_tol = 1e-4);

struct FlatFitReport {
  /// D_{x,Nr}(mu, sigma) measured by the LP.
  double dual_distance = 0;
  double eta = 0;
  double N = 1;
  /// C1 = 2 (10 C_AR / omega_d)^{1/(d+1)}, the constant produced by the mass-counting argument.
  double c1 = 0;
  /// C1 N eta^{1/(d+1)}
  double eta1 = 0;
  /// sup dist(z, P) / r over E cap B(x, Nr/3) and sup dist(z, E) / r over P cap B(x, Nr/3).
  double support_to_plane = 0;
  double plane_to_support = 0;
  /// Smallest C1 for which both inclusions hold on this instance.
  double c1_measured = 0;
  bool support_dist_ok = false;
  /// |int psi_1 (dmu - dsigma)| and |int psi (dmu - dsigma)| (bump test integrals) and their bounds
  /// 16 eta N^d r^d and 4 eta N^d r^d.
  double psi1_integral = 0, psi1_bound = 0;
  double psi_integral = 0, psi_bound = 0;
  bool plane_meets_quarter_ball = false;
  bool density_bounds_ok = false;
};

/// ball_Nr = B(x, N r). Throws hypothesis-violated when D_{x,Nr}(mu, sigma) > 2 eta.
FlatFitReport flat_fit_consequences(const DiscreteMeasure& mu, const Ball& ball_Nr, const FlatMeasure& sigma,
                                    double eta, double N, const LpOptions& opts = {});

struct DbetaReport {
  /// Smallest C2 with |D_beta - (c a_beta)^{-1/beta} dist(., P)| <= C2 (N eta^{1/(d+2+beta)} r
  /// + dist^{1+beta} N^{-beta} r^{-beta}) at every sample.
  double c2 = 0;
  double max_violation = 0;
  std::vector<double> lhs;
  std::vector<double> bracket;
};

/// Sample points must lie in B(x, Nr/5) outside the collar.
DbetaReport dbeta_vs_plane_bound(const DiscreteMeasure& mu, const Ball& ball_Nr, const FlatMeasure& sigma,
                                 double beta, double eta, double N, const Eigen::MatrixXd& sample_points);

/// Smallest C with |grad D_beta - grad D| <= C dist^{2+beta} N^{-beta-1} r^{-beta-2} on the samples.
double gradient_vs_plane_constant(const DiscreteMeasure& mu, const Ball& ball_Nr, const FlatMeasure& sigma,
                                  double beta, double N, const Eigen::MatrixXd& sample_points);

}  // namespace gdl
