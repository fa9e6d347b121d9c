#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gdl/geometry.hpp"
#include "gdl/grid.hpp"
#include "gdl/potential.hpp"

namespace gdl {

enum class OperatorCase { classical, degenerate };
enum class WeightSource { euclid_dist, smooth_D_alpha };

/// Matrix-valued coefficient A(X) (n x n, not necessarily symmetric).
using CoefficientField = std::function<Eigen::MatrixXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// L u = -div(w A grad u), with w = 1 (classical) or w = base^{weight_exponent} where base is
/// dist(X, E) or D_alpha(X).
struct OperatorSpec {
  OperatorCase kind = OperatorCase::classical;
  /// Empty means the identity.
  CoefficientField coeff;
  double weight_exponent = 0.0;
  WeightSource weight_source = WeightSource::euclid_dist;
  /// Measure and alpha for the smooth_D_alpha weight.
  PotentialParams potential;
  double ellipticity = 1.0;

  static OperatorSpec laplacian();
  /// weight exponent d + 1 - n with d the measure's dimension.
  static OperatorSpec degenerate(const DiscreteMeasure& mu, int n, WeightSource source, double alpha = 1.0);

  Eigen::MatrixXd coefficient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double weight(const Domain& dom, const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Boundary data beyond the zero Dirichlet condition on the collar and outside Omega.
struct BoundarySetup {
  /// Axes whose last node is identified with the first (the axis spans exactly one period).
  std::vector<int> periodic_axes;
  /// Dirichlet value on the upper face of `lift_axis` (-1: none). Used for strip problems.
  int lift_axis = -1;
  double lift_value = 1.0;
  /// Dirichlet data on the outer faces of non-periodic axes (empty: zero).
  std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)> outer_value;
};

/// Two-point edge between a Dirichlet node and an unknown, with its flux coefficient.
struct BoundaryEdge {
  std::size_t dirichlet_node = 0;
  std::size_t interior_node = 0;
  double coefficient = 0;
};

/// Finite-volume discretization of -div(w A grad u) on the nodes of a tensor grid.
///
/// Diagonal fluxes use two-point differences with w A_aa at face midpoints (an M-matrix for
/// diagonal A); off-diagonal entries of A enter through the multilinear element form on each
/// cell, so the matrix is symmetric whenever A is. Rows are integrated over dual cells: the
/// equation at node k reads sum of outward fluxes = source mass in the dual cell.
struct LinearSystem {
  ScalarGrid layout;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  /// Unknown number per node (-1: Dirichlet).
  std::vector<long> unknown;
  /// Node per unknown.
  std::vector<std::size_t> node;
  /// Dirichlet value per node (0 except on a lifted face).
  Eigen::VectorXd dirichlet;
  /// Contribution of nonzero Dirichlet values to the right-hand side.
  Eigen::VectorXd lift;
  /// Nodes folded into the Dirichlet set because w exceeded 1e12.
  std::vector<std::size_t> clamped;
  BoundarySetup boundary;
  bool symmetric = true;
  /// Edges from unknowns into the Dirichlet set (cross terms are not included).
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t unknowns() const { return node.size(); }
  /// Row k of the operator divided by the dual cell volume (pointwise form).
  Eigen::SparseVector<double> pointwise_row(std::size_t unknown_index) const;
};

/// Throws ellipticity-violation, degenerate-weight-overflow.
LinearSystem assemble(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout,
                      const BoundarySetup& boundary = {});

/// Symmetric systems are factorized by sparse Cholesky (AMD ordering) while the unknown count stays
/// below cholesky_limit for the grid dimension; otherwise CG with incomplete Cholesky. Non-symmetric
/// systems use BiCGSTAB with incomplete LU. Either iterative path falls back to sparse LU up to
/// direct_limit unknowns.
struct SolverOptions {
  /// Relative residual target.
  double tolerance = 1e-10;
  /// Sparse LU is allowed up to this many unknowns.
  std::size_t direct_limit = 100000;
  /// Cholesky limits for 2-D, 3-D and higher-dimensional grids (0 disables).
  std::size_t cholesky_limit_2d = 3000000;
  std::size_t cholesky_limit_3d = 250000;
  std::size_t cholesky_limit_high = 30000;
  /// Use sparse LU first when allowed.
  bool prefer_direct = false;
  int max_iterations = 0;
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  double relative_residual = 0;
};

/// Factorizes or preconditions once; reusable for many right-hand sides.
class SystemSolver {
 public:
  SystemSolver(const LinearSystem& sys, const SolverOptions& opts = {});
  ~SystemSolver();
  SystemSolver(const SystemSolver&) = delete;
  SystemSolver& operator=(const SystemSolver&) = delete;
  /// Throws solver-divergence when neither the iterative nor the direct path reaches the tolerance.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, SolveReport* report = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Right-hand side of a point source of the given mass at y, spread over the corners of its cell
/// with multilinear weights (corners in the Dirichlet set drop their share).
Eigen::VectorXd point_source(const LinearSystem& sys, const Point& y, double mass = 1.0);
/// Unknown vector -> full grid (Dirichlet values filled in).
ScalarGrid to_grid(const LinearSystem& sys, const Eigen::VectorXd& u);
/// Two-point flux of u into each Dirichlet node, sum over its boundary edges of coef (u_in - u_D).
/// Zero on every other node. For a Green function this is the discrete harmonic measure density.
Eigen::VectorXd boundary_flux(const LinearSystem& sys, const ScalarGrid& u);

struct GreenField {
  ScalarGrid values;
  /// Finite pole, or nothing for a pole at infinity.
  std::optional<Point> pole;
  Point normalization_point;
  double normalization_value = 1.0;
  /// Value at the normalization point before scaling.
  double raw_value = 0;
  SolveReport solve;
  /// boundary_flux of the normalized values (empty when the solver did not keep it).
  Eigen::VectorXd flux;

  double at(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Green function with pole y normalized to 1 at a0. Throws pole-in-collar.
GreenField green_finite_pole(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout, const Point& y,
                             const Point& a0, const SolverOptions& opts = {});
/// Same with an existing assembly and solver.
GreenField green_finite_pole(const LinearSystem& sys, SystemSolver& solver, const Domain& dom, const Point& y,
                             const Point& a0);

struct FarPoleOptions {
  /// Pole distances from the window centre, in window radii.
  std::vector<double> distances{8.0, 16.0, 32.0};
  /// Unit direction from the window centre towards the poles.
  Point direction;
  SolverOptions solver;
};

struct FarPoleReport {
  /// Actual pole distances in window radii: each pole sits on the grid node nearest to its nominal
  /// position, so the discrete source is an exact unit mass at a node.
  std::vector<double> distances;
  std::vector<GreenField> fields;
  /// sup over window nodes of |g_k - g_{k+1}|.
  std::vector<double> pairwise_sup;
  /// Raw G^{Y_k}(A_0), i.e. the factor lambda_k relating each finite-pole field to its normalized form.
  std::vector<double> lambda;
  /// Richardson extrapolation in 1/|Y_k| (Lagrange weights at 0), renormalized at A_0.
  GreenField limit;
  std::vector<double> weights;
};

/// Throws non-convergence when the pairwise differences do not decrease.
FarPoleReport green_far_pole_sequence(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout,
                                      const Ball& window, const Point& a0, const FarPoleOptions& opts);

/// Pole at infinity in a domain periodic along every axis but `vertical`: zero on E and on the
/// lower face, 1 on the upper face of the vertical axis, normalized at a0. Away from E the
/// solution is affine in the vertical coordinate up to terms decaying like exp(-2 pi t / period).
GreenField green_periodic_strip(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout, const Point& a0,
                                int vertical, const SolverOptions& opts = {});

/// L u = 0 with the Dirichlet data of `boundary` (zero on E), normalized to 1 at a0.
GreenField solve_dirichlet(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout,
                           const BoundarySetup& boundary, const Point& a0, const SolverOptions& opts = {});

/// r^{n-2} G(A^B) at a corkscrew point of the ball. Throws no-corkscrew, pole-too-close.
struct ProxyValue {
  double value = 0;
  Point corkscrew;
};
ProxyValue harmonic_measure_proxy(const GreenField& g, const Domain& dom, const Ball& ball, double c_corkscrew);

struct HolderEnvelope {
  /// Least-squares exponent of log G against log(dist / r).
  double gamma = 1.0;
  /// c_lower (dist/r)^gamma <= G <= c_upper (dist/r)^gamma on (about) 95% of the window nodes.
  double c_lower = 0;
  double c_upper = 0;
  double fraction_inside = 0;
  std::size_t nodes = 0;
  /// log10 of max dist / min dist over the fitted nodes.
  double decades = 0;
  /// Window radius r the distances were scaled by.
  double radius = 1.0;
};
/// Throws insufficient-dynamic-range (fewer than two decades of dist values).
HolderEnvelope holder_envelope(const GreenField& g, const Domain& dom, const Ball& window);

struct ExtractionOptions {
  /// Pass threshold on the extracted bilateral flatness (0 means 2 eps).
  double tau_target = 0.0;
  /// Lattice spacing for sampling P; 0 picks the grid spacing.
  double spacing = 0.0;
};

struct ExtractionVerdict {
  /// Step (i): sup over E cap B(x, 10r) of dist(y, P) / r and whether it is <= eps.
  double e_to_plane = 0;
  bool step_e_near_plane = false;
  /// Step (ii): offset corkscrew A_1 and u(A_1) / r, u = c G.
  Point a1;
  double u_a1 = 0;
  bool step_corkscrew = false;
  /// Step (iii): u <= 3 eps r on the slab H = {dist(., P) <= 2 eps r} cap B(x, 2r) cap Omega,
  /// and the Hoelder-certified sup of dist(X, E) / r over H.
  double slab_u_max = 0;
  bool step_slab = false;
  double slab_dist_bound = 0;
  /// Step (iv): certified sup over P cap B(x, r) of dist(X, E) / r.
  double plane_to_e = 0;
  bool codim_shortcut = false;
  /// Bilateral flatness max(eps, 2 plane_to_e) and the verdict tau <= tau_target.
  double tau = 0;
  bool pass = false;
};

/// Runs the flatness-extraction chain for u = c G on the pair (x, r). Requires d_int = dim P.
/// Throws no-offset-corkscrew when step (ii) finds no admissible point.
ExtractionVerdict theorem61_extract(const GreenField& g, const Domain& dom, const Ball& pair, double eps,
                                   const AffinePlane& plane, double c, const HolderEnvelope& env,
                                   const ExtractionOptions& opts = {});

}  // namespace gdl
