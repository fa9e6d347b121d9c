#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gdl/kdtree.hpp"

namespace gdl {

using Point = Eigen::VectorXd;

/// Volume of the unit ball of (possibly fractional) dimension d.
double unit_ball_volume(double d);

struct Ball {
  Point center;
  double radius = 1.0;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x - center).norm() < radius;
  }
  Ball scaled(double factor) const { return Ball{center, radius * factor}; }
};

/// Axis-aligned box [lo, hi].
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Point extent() const { return hi - lo; }
  static Box around(const Ball& b) {
    return Box{b.center.array() - b.radius, b.center.array() + b.radius};
  }
};

/// d-dimensional affine plane: base point plus an n x d orthonormal frame.
class AffinePlane {
 public:
  AffinePlane() = default;
  /// `frame` must already be orthonormal to 1e-12; throws invalid-params otherwise.
  AffinePlane(Point base, Eigen::MatrixXd frame);
  /// Orthonormalizes the given spanning directions (QR).
  static AffinePlane from_span(Point base, const Eigen::MatrixXd& directions);
  /// The span of the first d coordinate axes through the origin of R^n.
  static AffinePlane coordinate(int n, int d);

  int dim() const { return static_cast<int>(frame_.cols()); }
  int ambient() const { return static_cast<int>(frame_.rows()); }
  const Point& base() const { return base_; }
  const Eigen::MatrixXd& frame() const { return frame_; }

  Point project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double distance(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Orthonormal basis of the orthogonal complement (n x (n-d)).
  Eigen::MatrixXd normal_basis() const;
  bool orthonormal(double tol = 1e-12) const;

 private:
  Point base_;
  Eigen::MatrixXd frame_;
};

/// Weighted point cloud approximating an Ahlfors-regular measure.
///
/// Immutable; copies share the underlying storage and spatial index.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// points: n x N, weights: N (all > 0), dim_d in (0, n), resolution_h > 0.
  DiscreteMeasure(Eigen::MatrixXd points, Eigen::VectorXd weights, double dim_d, double resolution_h);

  std::size_t size() const { return impl_ ? static_cast<std::size_t>(impl_->points.cols()) : 0; }
  int ambient_dim() const { return impl_ ? static_cast<int>(impl_->points.rows()) : 0; }
  const Eigen::MatrixXd& points() const { return impl_->points; }
  const Eigen::VectorXd& weights() const { return impl_->weights; }
  auto point(std::size_t i) const { return impl_->points.col(static_cast<Eigen::Index>(i)); }
  double weight(std::size_t i) const { return impl_->weights[static_cast<Eigen::Index>(i)]; }
  double dim_d() const { return impl_->dim_d; }
  double resolution_h() const { return impl_->resolution_h; }
  double total_mass() const { return impl_->weights.sum(); }
  const KdTree& index() const { return impl_->tree; }

  /// AR constant measured when the set was generated (if any) and generator seed.
  std::optional<double> ar_constant() const { return impl_->ar_constant; }
  std::uint64_t seed() const { return impl_->seed; }
  DiscreteMeasure with_metadata(std::optional<double> ar_constant, std::uint64_t seed) const;

  double distance(const Eigen::Ref<const Eigen::VectorXd>& x) const { return impl_->tree.distance(x); }
  std::vector<std::size_t> indices_in_ball(const Ball& b) const { return impl_->tree.radius(b.center, b.radius); }
  double mass_in_ball(const Ball& b) const;
  Point centroid() const;
  /// Radius of the smallest centroid-centered ball containing the cloud.
  double radius_about_centroid() const;

  /// Image under X -> scale * R X + t; weights are multiplied by scale^d (pushforward dilation).
  DiscreteMeasure transformed(const Eigen::MatrixXd& rotation, const Point& translation, double scale) const;
  /// Every other point with doubled weight (coarse quadrature for error estimates).
  DiscreteMeasure half() const;
  DiscreteMeasure with_total_mass(double mass) const;

 private:
  struct Impl {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;
    double dim_d = 1.0;
    double resolution_h = 1.0;
    KdTree tree;
    std::optional<double> ar_constant;
    std::uint64_t seed = 0;
  };
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Set generation

enum class SetKind { plane, lipschitz_graph, koch_snowflake, cantor_dust, custom_points };

SetKind parse_set_kind(const std::string& name);
std::string to_string(SetKind kind);

struct SetParams {
  int ambient_dim = 2;
  /// Dimension of the plane (kind plane). Graphs always have ambient_dim - 1.
  int plane_dim = 1;
  /// Plane / graph: nodes cover [-half_width, half_width]^d.
  double half_width = 1.0;
  /// Plane: if > half_width, continue with geometrically growing cells out to this extent.
  double outer_extent = 0.0;
  double grading = 1.05;
  /// Graph: f(x) = lipschitz / frequency * mean_i sin(frequency x_i + phase_i) * sqrt(d).
  double lipschitz = 0.1;
  double frequency = 6.283185307179586;
  /// Cantor dust: contraction ratio in (0, 1/2) and number of retained corners.
  double ratio = 0.25;
  int branches = 0;  // 0 means all 2^n corners
  /// Fractals: refinement depth (0 picks it from target_count).
  int iterations = 0;
  /// Cantor cube side / Koch edge length.
  double side = 1.0;
  /// Koch: number of consecutive edges laid out along the x axis.
  int copies = 1;
  /// Koch: left end of the first edge; NaN centers the layout on x = 0.
  double x_origin = std::numeric_limits<double>::quiet_NaN();
  /// Total mass; <= 0 selects the natural normalization (unit density for planes and graphs,
  /// side^d for fractals).
  double total_mass = 0.0;
  /// custom_points only.
  Eigen::MatrixXd custom_points;
  Eigen::VectorXd custom_weights;
  double custom_dim = 1.0;
  double custom_resolution = 0.0;
};

struct ArScale {
  double radius = 0;
  double min_ratio = 0;
  double max_ratio = 0;
};

struct ArEstimate {
  /// Smallest C with C^{-1} <= mu(B(x,r)) / (omega_d r^d) <= C on every sample.
  double constant = 1.0;
  std::vector<ArScale> scales;
};

/// Samples (x, r) pairs per dyadic scale between 10 h and diam/4 with centers drawn from the cloud.
/// interior_only keeps B(x, r) inside the centroid ball of the cloud (finite pieces of planes).
ArEstimate estimate_ar_constant(const DiscreteMeasure& mu, std::uint64_t seed, int samples_per_scale = 64,
                                bool interior_only = false);

/// Builds the cloud and records the measured AR constant in its metadata.
DiscreteMeasure generate_set(SetKind kind, const SetParams& params, int target_count, std::uint64_t seed);

/// The Koch edge polyline (2 x (4^iterations + 1) vertices) from (x0, 0) to (x0 + side, 0).
Eigen::MatrixXd koch_polyline(int iterations, double side, double x0 = 0.0);
/// The graph profile used by lipschitz_graph (ambient_dim - 1 inputs).
double lipschitz_profile(const SetParams& params, const Eigen::Ref<const Eigen::VectorXd>& x);

// ---------------------------------------------------------------------------
// Metric primitives

/// Local bilateral Hausdorff distance: (1/r)(sup_{E cap B} dist(., F) + sup_{F cap B} dist(., E)),
/// with an empty side contributing 0.
double local_hausdorff(const DiscreteMeasure& e, const DiscreteMeasure& f, const Ball& ball);
/// Same, with F a plane sampled on a lattice of spacing `spacing` inside the ball (0 = h_E / 2).
double local_hausdorff(const DiscreteMeasure& e, const AffinePlane& plane, const Ball& ball,
                       double spacing = 0.0);

/// Lattice points of plane ∩ ball (the plane's own frame, anchored at the projection of the center).
Eigen::MatrixXd plane_lattice(const AffinePlane& plane, const Ball& ball, double spacing);

// ---------------------------------------------------------------------------
// Domains

using SideSelector = std::function<bool(const Eigen::Ref<const Eigen::VectorXd>&)>;

namespace side {
SideSelector everywhere();
/// <normal, X> > offset
SideSelector halfspace(Point normal, double offset);
/// X_n > f(X_1..X_{n-1})
SideSelector above_graph(std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)> f);
/// Planar points above a polyline whose x-range spans one period (period <= 0: not periodic).
SideSelector above_polyline(Eigen::MatrixXd polyline, double period = 0.0);
}  // namespace side

struct Domain {
  DiscreteMeasure boundary;
  Box box;
  SideSelector side = side::everywhere();
  /// Points closer than this to the cloud are treated as lying on E. Zero means resolution_h.
  double collar = 0.0;

  int ambient() const { return box.dim(); }
  double collar_width() const { return collar > 0 ? collar : boundary.resolution_h(); }
  double dist_to_boundary(const Eigen::Ref<const Eigen::VectorXd>& x) const { return boundary.distance(x); }
  /// Discrete membership: inside the box, off the collar, and accepted by the side rule.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Deepest lattice point A of Omega ∩ B with dist(A, E) >= c_target * r, or nothing.
std::optional<Point> corkscrew_point(const Domain& dom, const Ball& ball, double c_target,
                                     int lattice_per_radius = 0);

struct HarnackChain {
  std::vector<Ball> balls;
  double radius_floor = 0;
  std::size_t length() const { return balls.size(); }
};

/// Chain of balls B_i with 2B_i ⊂ Omega joining X to Y, found by shortest path on a lattice
/// restricted to points that are deep enough. `spacing` <= 0 picks a lattice automatically.
std::optional<HarnackChain> harnack_chain(const Domain& dom, const Point& x, const Point& y,
                                          double step_factor, double spacing = 0.0);

/// Two points of B at distance >= c r from E lying in different lattice components of
/// box \ E-neighborhood. Requires d = n - 1.
std::optional<std::pair<Point, Point>> condition_b_witness(const Domain& dom, const Ball& ball, double c,
                                                            double spacing = 0.0);

}  // namespace gdl
