#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>

#include "gdl/geometry.hpp"

namespace gdl {

struct NelderMeadOptions {
  int max_iterations = 200;
  /// Stop when the simplex values spread less than f_tol + f_rel * |f_best| and its diameter is below x_tol.
  double f_tol = 1e-7;
  double f_rel = 1e-3;
  double x_tol = 1e-3;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0;
  int iterations = 0;
  int evaluations = 0;
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& step, const NelderMeadOptions& opts = {});

/// Weighted PCA plane of dimension d_int through the weighted centroid.
AffinePlane pca_plane(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights, int d_int);

/// Local chart around a reference plane P0 = base + span(T), with normal frame N:
/// params (B, o) with B an (n-d) x d matrix and o in R^{n-d} map to the plane through
/// base + scale * N o spanned by T + N B.
class PlaneChart {
 public:
  PlaneChart(const AffinePlane& reference, double scale);
  int parameters() const { return static_cast<int>(codim_ * dim_ + codim_); }
  AffinePlane plane(const Eigen::VectorXd& params) const;

 private:
  Point base_;
  Eigen::MatrixXd tangent_, normal_;
  Eigen::Index dim_, codim_;
  double scale_;
};

struct PlaneSearchOptions {
  NelderMeadOptions nm;
  int restarts = 5;
  std::uint64_t seed = 0;
  /// Restart offsets are drawn uniformly in [-offset_spread, offset_spread] (units of the chart scale).
  double offset_spread = 0.5;
  /// Extra scalar parameters optimized jointly with the plane (start 0, initial step extra_step).
  int extra = 0;
  double extra_step = 0.3;
};

struct PlaneSearchResult {
  AffinePlane plane;
  Eigen::VectorXd extra;
  double value = 0;
  int evaluations = 0;
};

/// Minimizes objective(plane) by Nelder-Mead in the chart around `seed_plane`. The first start is the
/// seed itself; further restarts draw tilts with uniformly random angles and random offsets.
PlaneSearchResult search_plane(const std::function<double(const AffinePlane&)>& objective,
                               const AffinePlane& seed_plane, double scale, const PlaneSearchOptions& opts);
PlaneSearchResult search_plane(const std::function<double(const AffinePlane&, const Eigen::VectorXd&)>& objective,
                               const AffinePlane& seed_plane, double scale, const PlaneSearchOptions& opts);

/// Largest principal angle between the direction spaces of two planes of equal dimension.
double plane_angle(const AffinePlane& a, const AffinePlane& b);

}  // namespace gdl
