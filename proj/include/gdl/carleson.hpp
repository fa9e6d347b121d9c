#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gdl/geometry.hpp"
#include "gdl/grid.hpp"
#include "gdl/pde.hpp"
#include "gdl/plane_search.hpp"

namespace gdl {

/// One sample (y, t) of E x (0, r) with its share of the measure mu (x) dt / t.
struct ScalePair {
  Point center;
  double radius = 0;
  double weight = 0;
  int level = 0;
};

struct ScalePairSet {
  Ball root;
  int levels = 0;
  double r_min = 0, r_max = 0;
  /// r^d of the root ball (the packing normalization).
  double normalization = 1;
  std::vector<ScalePair> pairs;
  /// Optional per-pair label (1 = good, 0 = bad, or a defect value).
  std::vector<double> labels;
};

using PairPredicate = std::function<bool(const ScalePair&)>;

/// Stratified samples: per dyadic level j < levels, radii log-uniform in [2^{-j-1} r, 2^{-j} r] and
/// centers drawn from E cap B(x, r) proportionally to mu. Every pair carries mu(E cap B) ln 2 / samples.
/// Throws level-below-resolution when 2^{-levels} r < 10 h.
ScalePairSet dyadic_pairs(const DiscreteMeasure& mu, const Ball& root, int levels, int samples_per_level,
                          std::uint64_t seed);

struct PackingEstimate {
  double value = 0;
  /// Monte-Carlo standard error (per-level binomial variance, summed).
  double std_error = 0;
};

/// sum of weights over pairs with predicate true, divided by r^d.
double packing_integral(const ScalePairSet& set, const PairPredicate& predicate);
PackingEstimate packing_estimate(const ScalePairSet& set, const PairPredicate& predicate);

struct UrVerdict {
  bool good = false;
  double value = 0;
  AffinePlane plane;
};

/// inf over d-planes of the bilateral local Hausdorff distance, compared with eps.
/// Throws under-resolved with fewer than 32 cloud points in the ball.
UrVerdict good_ur(const DiscreteMeasure& mu, const Ball& pair, double eps, int d_int,
                  const PlaneSearchOptions& search = {});

/// Grid nodes X in Omega cap B(x, K r) with dist(X, E) >= r / K.
struct WhitneyRegion {
  Ball ball;
  double K = 1;
  std::vector<std::size_t> member_nodes;
};
WhitneyRegion whitney_region(const Domain& dom, const ScalarGrid& layout, const Ball& pair, double K);

struct CcVerdict {
  bool good = false;
  /// r^{-n} sum over W_K of |A(X) - A_0| dX (operator norm, Riemann sum with dual cell volumes).
  double defect = 0;
  Eigen::MatrixXd a0;
  /// A_0 satisfies the ellipticity bounds with the operator's constant.
  bool a0_elliptic = false;
  std::size_t nodes = 0;
};

/// A_0 = entrywise mean over W_K. Throws empty-whitney.
CcVerdict good_cc(const CoefficientField& coeff, double ellipticity, const Domain& dom, const ScalarGrid& layout,
                  const Ball& pair, double tau, double K);

/// Minimizes max_i |t_i - c g_i| over c > 0 by golden section on log c over
/// [0.01, 100] x median(t_i / g_i), to relative tolerance 1e-8. Only the vertices of the upper and
/// lower convex hulls of the points (g_i, t_i) can be active, so the search runs on those.
struct ChebyshevFit {
  double c = 0;
  double sup = 0;
};
ChebyshevFit chebyshev_scale_fit(const std::vector<double>& g, const std::vector<double>& target);

struct GreenPlaneOptions {
  /// Fit against this plane only (no plane search).
  std::optional<AffinePlane> plane;
  PlaneSearchOptions search = [] {
    PlaneSearchOptions o;
    o.restarts = 1;
    return o;
  }();
};

struct GreenPlaneVerdict {
  bool good = false;
  AffinePlane plane;
  double c = 0;
  /// sup over grid nodes of Omega cap B(x, M r) outside the collar of |dist(X, P) - c G(X)|, over r.
  double defect = 0;
  /// Bound on the collar's contribution from the Hoelder envelope (NaN when the envelope could not
  /// be fitted).
  double collar_bound = 0;
  std::size_t nodes = 0;
};

/// Throws no-interior-nodes.
GreenPlaneVerdict good_green_plane(const ScalarGrid& G, const Domain& dom, const Ball& pair, double eps, double M,
                                   int d_int, const GreenPlaneOptions& opts = {});

struct GreenScaleVerdict {
  bool good = false;
  double c = 0;
  double defect = 0;
  std::size_t nodes = 0;
};

/// Same Chebyshev fit with D (sampled on the same layout; NaN entries skipped) in place of dist(., P).
GreenScaleVerdict good_green_dbeta(const ScalarGrid& G, const ScalarGrid& D, const Domain& dom, const Ball& pair,
                                   double eps, double M);

using VectorField = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// c = <target, grad G> / <grad G, grad G> over W_M; residual r^{-n} int_{W_M} |target - c grad G|^2
/// compared with eps. grad G uses central differences on the grid. Throws empty-whitney.
GreenScaleVerdict good_grad_green(const ScalarGrid& G, const VectorField& target_grad, const Domain& dom,
                                  const Ball& pair, double eps, double M);
/// Residual of the gradient fit at a given c.
double grad_green_residual(const ScalarGrid& G, const VectorField& target_grad, const Domain& dom, const Ball& pair,
                           double M, double c);

struct PrevalenceOptions {
  int windows = 16;
  int samples_per_level = 64;
  std::uint64_t seed = 0;
  /// Density extraction: look for a good pair with t >= a r in every window.
  double a = 0.125;
  /// Verdict threshold on the bad fraction of the deeper half of the levels.
  double deep_fraction_threshold = 0.25;
  /// Number of bad pairs kept per window as examples.
  int examples = 3;
};

struct WindowAudit {
  Ball window;
  /// Bad-set packing contribution of each level, per unit r^d.
  std::vector<double> per_level;
  /// Running sums of per_level.
  std::vector<double> cumulative;
  double good_fraction = 0;
  /// Weighted bad fraction over levels >= levels / 2.
  double deep_bad_fraction = 0;
  bool good_pair_above_a = false;
  std::vector<ScalePair> bad_examples;
};

struct PrevalenceReport {
  std::vector<WindowAudit> windows;
  /// Mean over windows of the cumulative constant after each level.
  std::vector<double> packing_constant_per_level;
  double max_deep_bad_fraction = 0;
  bool consistent = false;
  std::string verdict;
};

/// Audits the bad set of `good` over windows of radius root.radius / 2 centred on cloud points of
/// B(x, root.radius / 2). The verdict is a heuristic: uniformly bounded constants show up as a bad
/// fraction that dies out with depth, while a non-Carleson bad set keeps a fixed share at every level.
PrevalenceReport prevalence_audit(const DiscreteMeasure& mu, const Ball& root, int levels, const PairPredicate& good,
                                  const PrevalenceOptions& opts = {});

/// One-dimensional oscillating coefficient a(y) = 1 on [4^k, 2 4^k) and 2 elsewhere (y > 0), and the
/// solution g(y) = int_0^y ds / a(s) of (a g')' = 0 with g(0) = 0.
double oscillating_band_coefficient(double y);
double oscillating_band_solution(double y);

}  // namespace gdl
