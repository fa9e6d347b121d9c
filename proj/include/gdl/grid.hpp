#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <vector>

#include "gdl/geometry.hpp"

namespace gdl {

/// Strictly increasing node coordinates along one axis.
using Axis = std::vector<double>;

/// n+1 nodes evenly spaced on [lo, hi].
Axis uniform_axis(double lo, double hi, int cells);

/// Nodes with spacing h on [fine_lo, fine_hi] (snapped so both ends are nodes) continued by
/// spacings growing by `grading` per cell out to lo and hi. The outermost nodes sit exactly on lo, hi.
Axis graded_axis(double lo, double hi, double fine_lo, double fine_hi, double h, double grading);

/// Smoothly stretched nodes x = center + sinh(kappa t) / kappa on a uniform t-lattice of step about h
/// (spacing h near center, growing by roughly a factor 1 + kappa h per cell). `refine` multiplies the
/// cell count, so refine = 2 splits every t-interval in half and the coarse nodes stay nodes.
Axis stretched_axis(double lo, double hi, double center, double h, double kappa, int refine = 1);

/// Splits every interval of the axis into `factor` equal parts (uniform refinement of any layout).
Axis subdivide_axis(const Axis& axis, int factor);

/// Scalar samples on a tensor-product grid over a box.
///
/// Nodes are numbered with axis 0 varying fastest. Uniform grids are the special case of evenly
/// spaced axes; spacing(a) then is the common step.
class ScalarGrid {
 public:
  ScalarGrid() = default;
  explicit ScalarGrid(std::vector<Axis> axes);
  /// shape[a] nodes on [box.lo[a], box.hi[a]] (shape >= 2 per axis).
  static ScalarGrid uniform(const Box& box, const std::vector<int>& shape);
  /// Same node layout, zero values.
  ScalarGrid like() const;

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  int shape(int a) const { return static_cast<int>(axes_[a].size()); }
  std::vector<int> shape() const;
  const Axis& axis(int a) const { return axes_[a]; }
  Box box() const;
  /// Smallest node gap along axis a.
  double spacing(int a) const;
  double min_spacing() const;
  bool is_uniform(double rel_tol = 1e-9) const;

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  double& operator[](std::size_t k) { return values_[static_cast<Eigen::Index>(k)]; }
  double operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }

  std::vector<int> unravel(std::size_t k) const;
  /// Linear index, or -1 when the multi-index is off the grid.
  long ravel(const std::vector<int>& idx) const;
  Point node(std::size_t k) const;
  /// Position of node k along axis a.
  double coord(std::size_t k, int a) const;
  /// Linear index of the neighbour one step along axis a (sign = +-1), or -1.
  long neighbor(std::size_t k, int a, int sign) const;
  bool on_boundary(std::size_t k) const;

  /// Dual cell volume: product over axes of half the distance between the two neighbours.
  double cell_volume(std::size_t k) const;
  /// Nodes inside the closed box, taking every stride-th node per axis from the first one inside.
  std::vector<std::size_t> nodes_in_box(const Box& box, int stride = 1) const;
  /// Nearest node (per-axis rounding), clamped to the grid.
  std::size_t nearest_node(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Multilinear interpolation; nothing if x lies outside the box.
  std::optional<double> interpolate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Three-point (possibly non-uniform) central difference gradient at an interior node; one-sided
  /// differences on the boundary.
  Eigen::VectorXd gradient(std::size_t k) const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  Eigen::VectorXd values_;
};

}  // namespace gdl
